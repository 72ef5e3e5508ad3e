#pragma once

// Norms, entropy identities, stopping times and positivity checks evaluated
// on solution samples. Every a-priori estimate of the regularized system has a
// checker here that returns a verdict together with the measured margin.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "rsw/model.hpp"
#include "rsw/state.hpp"

namespace rsw {

struct DiagnosticsRecord {
  double t = 0.0;
  double l2_dist = 0.0;   ///< ||V - E||_{L2}
  double h1_dist = 0.0;   ///< ||V - E||_{H1}
  double n_norm = 0.0;    ///< sqrt(||V - E||^2 + ||V_xx||^2)
  double sup_vx = 0.0;    ///< sup_x |V_x(x)|, Euclidean in R^3
  double entropy = 0.0;   ///< integral of eta(V)
  double dissipation = 0.0;  ///< eps * integral of V_x . eta''(V) V_x
  double min_h = 0.0;
  double mass = 0.0;      ///< integral of (h - h_bar)
  double log_h_h1 = 0.0;  ///< ||ln(h / h_bar)||_{H1}
  double hessian_min_eig = 0.0;

  // Auxiliary quantities used by the checks; not part of records.csv.
  double vx_l2 = 0.0;    ///< ||V_x||_{L2}
  double h2_dist = 0.0;  ///< ||V - E||_{H2}
  double sx_sup = 0.0;   ///< |||S_x||| = sup_x ||S_x(x)||
  double ux_sup = 0.0;   ///< ||u_x||_{Linf}
  double ux_h1 = 0.0;    ///< ||u_x||_{H1}
  double max_h = 0.0;
};

/// Evaluates every record entry at one state. Requires lambda > 0.
DiagnosticsRecord make_record(double t, const State3& v, const Params& p);

using Mat3 = std::array<std::array<double, 3>, 3>;

/// eta(V) = (lambda^2/8)(u^2 + v^2) + (1/2)((lambda^2 - lambda_bar^2)/4)^2.
double entropy_density(double lambda, double u, double v, double lambda_bar);
Field entropy_density(const State3& v, double lambda_bar);
/// G(V) = (lambda^2 u/8)(u^2 + v^2) + (lambda^2 u/4)((lambda^2 - lambda_bar^2)/4).
Field entropy_flux(const State3& v, double lambda_bar);
Mat3 entropy_hessian(double lambda, double u, double v, double lambda_bar);
/// Smallest eigenvalue of entropy_hessian, closed form for its arrow structure.
double entropy_hessian_min_eig(double lambda, double u, double v, double lambda_bar);
/// eps * integral of V_x . eta''(V) V_x.
double entropy_dissipation(const State3& v, const Params& p);

struct Coercivity {
  double min_eig;
  double threshold;  ///< lambda_bar^2 / 8
  bool coercive;
};
Coercivity hessian_coercivity(const State3& v, double lambda_bar);

struct EntropyBalance {
  std::vector<double> times;
  std::vector<double> residual;  ///< d/dt int eta + dissipation at each sample
  double max_abs = 0.0;
  double max_dissipation = 0.0;
  /// max_abs / max_dissipation, or max_abs itself when there is no dissipation.
  double normalized = 0.0;
};
/// Needs >= 3 uniformly spaced samples; second-order one-sided stencils at the ends.
EntropyBalance entropy_balance(std::span<const DiagnosticsRecord> records);
EntropyBalance entropy_balance(const TrajectoryMesh& traj, const Params& p);

struct StoppingTimes {
  std::optional<double> tau;      ///< first t with ||V - E||_{H2} > 2 M0
  std::optional<double> t_delta;  ///< first t with max(||V - E||, ||V_x||) > sqrt(delta)
};
StoppingTimes stopping_times(std::span<const DiagnosticsRecord> records, double m0, double delta);

struct EnergyInequality {
  bool pass = true;
  double min_margin = 0.0;
  std::vector<double> margins;  ///< 9 delta^2 - (||V - E||^2 + 4 eps int ||V_x||^2)
};
/// Checked on samples up to T_delta (all samples if it is not reached).
EnergyInequality energy_inequality_check(std::span<const DiagnosticsRecord> records, const Params& p,
                                         double delta);

struct GrowthBound {
  bool pass = true;
  std::vector<double> increments;  ///< ||V_x||^2(t_{k+1}) - ||V_x||^2(t_k)
  std::vector<double> bounds;      ///< trapezoidal integral of the right-hand side
  double worst_excess = 0.0;       ///< max(increment - 1.05 bound)
};
/// d/dt ||V_x||^2 <= 3/(2 (4 eps)^{1/3}) ||V_x||^{10/3} + 6 delta ||f'|| ||V_x||, 5% tolerance.
GrowthBound vx_growth_bound(std::span<const DiagnosticsRecord> records, const Params& p, double delta,
                            const CoriolisProfile& cor);

struct L2Balance {
  bool pass = true;
  double worst_excess = 0.0;
};
/// d/dt ||V - E||^2 + 2 eps ||V_x||^2 <= |||S_x||| ||V - E||^2, sample to sample with 5% tolerance.
L2Balance l2_balance_check(std::span<const DiagnosticsRecord> records, const Params& p);

struct Interpolation {
  bool pass;
  double lhs;  ///< ||V_x||^2
  double rhs;  ///< ||V_xx|| ||V - E||
  double slack;
};
Interpolation interpolation_check(const State3& v, const State3& e);

struct PositivityReport {
  std::vector<double> times;
  std::vector<double> min_h;
  std::vector<double> max_h;
  std::vector<double> log_h_h1;
  std::vector<double> envelope;
  std::vector<std::size_t> violations;  ///< samples with log_h_h1 > 1.05 envelope
  double alpha = 0.0;                   ///< largest alpha with alpha <= h <= 1/alpha on all samples
  bool pass() const { return violations.empty(); }
};
/// Tracks min h and ||ln(h/h_bar)||_{H1} against the Gronwall envelope of
/// d/dt y <= ||u_x||_inf y + 2 ||u_x||_{H1} (explicit Euler on the sample mesh).
/// Throws NonPositiveHeight if any min h <= alpha_floor.
PositivityReport positivity_monitor(const PhysTrajectory& traj, double h_bar, double alpha_floor);
/// Same report from recorded diagnostics (min_h, max_h, log_h_h1, ux_sup, ux_h1).
PositivityReport positivity_monitor(std::span<const DiagnosticsRecord> records, double alpha_floor);

struct RegularityRatios {
  double ratio_fwd;  ///< ||sqrt h - sqrt h_bar||_{H^m} / ||h - h_bar||_{H^m}
  double ratio_bwd;
  /// m = 0 only: |sqrt h - sqrt h_bar| <= |h - h_bar| / sqrt h_bar and
  /// |h - h_bar| <= |sqrt h - sqrt h_bar| (sqrt h_bar + ||sqrt h||_inf) at every point.
  bool pointwise_bounds_hold = true;
};
RegularityRatios regularity_equivalence(const Field& h, double h_bar, int m);

}  // namespace rsw
