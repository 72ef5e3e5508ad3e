#pragma once

// Scripted studies: run configuration, initial data, the eps sweep, the
// small-data global run, existence-time scaling, the shock probe, and
// persistence of records and study summaries.

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "rsw/diagnostics.hpp"
#include "rsw/lines_solver.hpp"
#include "rsw/mild_solver.hpp"
#include "rsw/model.hpp"

namespace rsw {

enum class InitialKind { GaussianBump, Sine, TwoBump, SimpleWave };
InitialKind parse_initial_kind(const std::string& s);
std::string to_string(InitialKind k);

enum class SolverKind { Lines, Mild };

struct RunConfig {
  struct {
    std::size_t n = 256;
    double length = 20.0 * std::numbers::pi;
  } grid;
  Params params{};
  struct {
    std::string profile = "constant";  ///< constant | sine
    double f0 = 1.0;
    double f1 = 0.0;
  } coriolis;
  struct {
    InitialKind kind = InitialKind::GaussianBump;
    double amplitude = 0.05;
    double width = 2.0;
    int modes = 1;
  } init;
  struct {
    SolverKind kind = SolverKind::Lines;
    StepControl step{};
    double window_constant = 0.5;
    std::size_t window_intervals = 32;
    double tol = 1e-10;
    std::size_t max_iter = 60;
  } solver;
  struct {
    std::vector<double> eps_list{4e-3, 2e-3, 1e-3, 5e-4};
    double eps_ref = 2.5e-4;
    std::vector<double> delta_list{1e-3};
    std::vector<double> amplitudes{0.1, 0.2, 0.4};
    double a_large = 0.3;
    std::size_t bisect_steps = 0;
  } study;
  double horizon = 1.0;
  std::uint64_t seed = 42;
  std::string output_dir = "out";

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);

Grid make_grid(const RunConfig& cfg);
CoriolisProfile make_coriolis(const RunConfig& cfg, const Grid& grid);

/// h0 = h_bar (1 + A phi), u0 = v0 = A sqrt(g h_bar) phi' / ||phi'||_inf.
/// phi is a periodic bump of the given width (gaussian_bump, two_bump) or
/// sin(2 pi modes x / L) (sine). simple_wave keeps the bump height but sets
/// u0 = 2 (sqrt(g h0) - sqrt(g h_bar)), v0 = 0: a right-moving wave of the
/// non-rotating system. Throws NonPositiveHeight if min h0 <= 0.
PhysState make_initial_data(InitialKind kind, double amplitude, double width, const Grid& grid, const Params& p,
                            int modes = 1);
State3 initial_state(const RunConfig& cfg, const Grid& grid);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;   ///< 95% interval of the slope (collapses to the slope without residual dof)
  double ci_high = 0.0;
  std::size_t points = 0;
};
/// Least squares fit of log(y) against log(x).
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct Verdict {
  std::string name;
  std::string expectation;  ///< names the diagnostic or fit it tested
  double measured = 0.0;
  bool pass = false;
};

struct RunSummary {
  std::string id;
  std::string status;
  std::vector<std::pair<std::string, double>> values;
  double value(const std::string& key) const;
};

struct StudyResult {
  std::string study;
  std::vector<RunSummary> runs;
  std::vector<std::pair<std::string, LinearFit>> fits;
  std::vector<Verdict> verdicts;
  /// Records of the study's primary run (written to records.csv; not serialized in JSON).
  std::vector<DiagnosticsRecord> primary_records;
  bool passed() const;
  const Verdict* verdict(const std::string& name) const;
};

nlohmann::json to_json(const StudyResult& r);
StudyResult study_from_json(const nlohmann::json& j);

struct SingleRun {
  IntegrationResult result;
  std::size_t windows = 0;  ///< mild solver only
};
/// One run of the configured solver with records every sample.
SingleRun run_single(const RunConfig& cfg);

StudyResult eps_cauchy_sweep(const RunConfig& base, std::span<const double> eps_list, double eps_ref);
StudyResult small_data_global(const RunConfig& cfg, std::span<const double> delta_list, double horizon);
StudyResult t0_scaling(const RunConfig& cfg, std::span<const double> amplitudes);
StudyResult shock_probe(const RunConfig& cfg, double a_large);

/// Amplitude A for which the initial data has ||V0 - E||_{H1} = delta.
double amplitude_for_h1(const RunConfig& cfg, const Grid& grid, double delta);

/// Fraction of perturbation energy in modes n/6 < |j| <= n/3 (the upper half of the dealiased band).
double spectral_tail_fraction(const State3& v, double lambda_bar);

/// Runs fn(i) for i in [0, count) on up to worker_count() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);
/// RSW_THREADS if set and positive, else the hardware concurrency.
std::size_t worker_count();

// Persistence.
inline constexpr const char* kRecordsHeader =
    "t,l2_dist,h1_dist,n_norm,sup_vx,entropy,dissipation,min_h,mass,log_h_h1,hessian_min_eig";
std::string code_version();
void write_records_csv(const std::filesystem::path& path, std::span<const DiagnosticsRecord> records);
std::vector<DiagnosticsRecord> read_records_csv(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);
nlohmann::json manifest(const RunConfig& cfg, const std::string& command);

/// records.csv, summary.json and manifest.json in dir (created if missing).
void persist(const std::filesystem::path& dir, const RunConfig& cfg, const std::string& command,
             std::span<const DiagnosticsRecord> records, const nlohmann::json& summary);

}  // namespace rsw
