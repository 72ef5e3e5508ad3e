#include "rsw/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "rsw/config.hpp"
#include "rsw/errors.hpp"

#ifndef RSW_VERSION
#define RSW_VERSION "unknown"
#endif

namespace rsw {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Profile {
  Field phi;
  Field dphi;
};

// exp(kappa (cos(2 pi (x - xc) / L) - 1)) with kappa = (L / (2 pi w))^2 is
// periodic and close to exp(-(x - xc)^2 / (2 w^2)) for w << L.
void add_bump(Profile& p, const Grid& g, double center, double width, double weight) {
  const double L = g.length();
  const double kappa = std::pow(L / (kTwoPi * width), 2);
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double theta = kTwoPi * (g.x(i) - center) / L;
    const double b = std::exp(kappa * (std::cos(theta) - 1.0));
    p.phi[i] += weight * b;
    p.dphi[i] += weight * (-kappa * std::sin(theta) * kTwoPi / L) * b;
  }
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

IntegrationResult lines_run(const State3& v0, const StepControl& step, const Params& p, const CoriolisProfile& cor,
                            const std::vector<Monitor>& monitors = {}) {
  return integrate(v0, step, p, cor, monitors);
}

std::optional<double> first_time(std::span<const DiagnosticsRecord> records,
                                 const std::function<bool(const DiagnosticsRecord&)>& failed) {
  for (const auto& r : records) {
    if (failed(r)) return r.t;
  }
  return std::nullopt;
}

}  // namespace

InitialKind parse_initial_kind(const std::string& s) {
  if (s == "gaussian_bump") return InitialKind::GaussianBump;
  if (s == "sine") return InitialKind::Sine;
  if (s == "two_bump") return InitialKind::TwoBump;
  if (s == "simple_wave") return InitialKind::SimpleWave;
  throw InvalidArgument("unknown initial data kind '" + s + "'");
}

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::GaussianBump: return "gaussian_bump";
    case InitialKind::Sine: return "sine";
    case InitialKind::TwoBump: return "two_bump";
    case InitialKind::SimpleWave: return "simple_wave";
  }
  return "unknown";
}

void RunConfig::validate() const {
  (void)Grid(grid.n, grid.length);
  params.validate();
  solver.step.validate();
  if (coriolis.profile != "constant" && coriolis.profile != "sine") {
    throw InvalidArgument("coriolis.profile must be 'constant' or 'sine'");
  }
  if (!(init.width > 0.0)) throw InvalidArgument("init.width must be positive");
  if (init.modes < 1) throw InvalidArgument("init.modes must be at least 1");
  if (!(init.amplitude >= 0.0)) throw InvalidArgument("init.amplitude must be non-negative");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  if (!(solver.window_constant > 0.0)) throw InvalidArgument("solver.window_constant must be positive");
  if (solver.window_intervals == 0) throw InvalidArgument("solver.window_intervals must be positive");
  if (!(solver.tol > 0.0)) throw InvalidArgument("solver.tol must be positive");
  if (solver.kind == SolverKind::Mild && !(params.eps > 0.0)) {
    throw InvalidArgument("params.eps must be positive for the mild solver");
  }
}

nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  return json{
      {"grid", {{"n", c.grid.n}, {"length", c.grid.length}}},
      {"params", {{"g", c.params.g}, {"h_bar", c.params.h_bar}, {"eps", c.params.eps}}},
      {"coriolis", {{"profile", c.coriolis.profile}, {"f0", c.coriolis.f0}, {"f1", c.coriolis.f1}}},
      {"init",
       {{"kind", to_string(c.init.kind)},
        {"amplitude", c.init.amplitude},
        {"width", c.init.width},
        {"modes", c.init.modes}}},
      {"solver",
       {{"kind", c.solver.kind == SolverKind::Lines ? "lines" : "mild"},
        {"cfl", c.solver.step.cfl},
        {"dt_max", c.solver.step.dt_max},
        {"sample_every", c.solver.step.sample_every},
        {"fixed_step", c.solver.step.fixed_step},
        {"window_constant", c.solver.window_constant},
        {"window_intervals", c.solver.window_intervals},
        {"tol", c.solver.tol},
        {"max_iter", c.solver.max_iter}}},
      {"study",
       {{"eps_list", c.study.eps_list},
        {"eps_ref", c.study.eps_ref},
        {"delta_list", c.study.delta_list},
        {"amplitudes", c.study.amplitudes},
        {"a_large", c.study.a_large},
        {"bisect_steps", c.study.bisect_steps}}},
      {"horizon", c.horizon},
      {"seed", c.seed},
      {"output", {{"dir", c.output_dir}}},
  };
}

Grid make_grid(const RunConfig& cfg) { return Grid(cfg.grid.n, cfg.grid.length); }

CoriolisProfile make_coriolis(const RunConfig& cfg, const Grid& grid) {
  if (cfg.coriolis.profile == "sine") return CoriolisProfile::sine(grid, cfg.coriolis.f0, cfg.coriolis.f1);
  return CoriolisProfile::constant(grid, cfg.coriolis.f0);
}

PhysState make_initial_data(InitialKind kind, double amplitude, double width, const Grid& grid, const Params& p,
                            int modes) {
  p.validate();
  Profile prof{Field(grid), Field(grid)};
  const double L = grid.length();
  switch (kind) {
    case InitialKind::GaussianBump:
    case InitialKind::SimpleWave:
      if (!(width > 0.0)) throw InvalidArgument("bump width must be positive");
      add_bump(prof, grid, 0.5 * L, width, 1.0);
      break;
    case InitialKind::TwoBump:
      if (!(width > 0.0)) throw InvalidArgument("bump width must be positive");
      add_bump(prof, grid, L / 3.0, width, 1.0);
      add_bump(prof, grid, 2.0 * L / 3.0, width, 0.5);
      break;
    case InitialKind::Sine: {
      if (modes < 1) throw InvalidArgument("sine data needs at least one mode");
      const double k = kTwoPi * modes / L;
      for (std::size_t i = 0; i < grid.n(); ++i) {
        prof.phi[i] = std::sin(k * grid.x(i));
        prof.dphi[i] = k * std::cos(k * grid.x(i));
      }
      break;
    }
  }
  const double slope = sup_norm(prof.dphi);
  const double c0 = std::sqrt(p.g * p.h_bar);
  PhysState s(grid);
  for (std::size_t i = 0; i < grid.n(); ++i) {
    s.h[i] = p.h_bar * (1.0 + amplitude * prof.phi[i]);
    const double shape = slope > 0.0 ? prof.dphi[i] / slope : 0.0;
    s.u[i] = amplitude * c0 * shape;
    s.v[i] = amplitude * c0 * shape;
    if (kind == InitialKind::SimpleWave) {
      s.u[i] = 2.0 * (std::sqrt(p.g * s.h[i]) - c0);
      s.v[i] = 0.0;
    }
  }
  if (!(min_value(s.h) > 0.0)) throw NonPositiveHeight(min_value(s.h));
  return s;
}

State3 initial_state(const RunConfig& cfg, const Grid& grid) {
  return symmetrize(make_initial_data(cfg.init.kind, cfg.init.amplitude, cfg.init.width, grid, cfg.params,
                                      cfg.init.modes),
                    cfg.params.g);
}

LinearFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_loglog needs at least two points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("fit_loglog needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_loglog needs distinct abscissae");
  LinearFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.ci_low = f.ci_high = f.slope;
  if (n > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - (f.intercept + f.slope * lx[i]);
      sse += r * r;
    }
    const double dof = static_cast<double>(n - 2);
    const double se = std::sqrt(sse / dof / sxx);
    const double tq = boost::math::quantile(boost::math::complement(boost::math::students_t(dof), 0.025));
    f.ci_low = f.slope - tq * se;
    f.ci_high = f.slope + tq * se;
  }
  return f;
}

double RunSummary::value(const std::string& key) const {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  throw InvalidArgument("run summary has no value '" + key + "'");
}

bool StudyResult::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

const Verdict* StudyResult::verdict(const std::string& name) const {
  for (const auto& v : verdicts) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

nlohmann::json to_json(const StudyResult& r) {
  using nlohmann::json;
  json runs = json::array();
  for (const auto& run : r.runs) {
    json values = json::array();
    for (const auto& [k, v] : run.values) values.push_back({k, v});
    runs.push_back({{"id", run.id}, {"status", run.status}, {"values", values}});
  }
  json fits = json::array();
  for (const auto& [name, f] : r.fits) {
    fits.push_back({{"name", name},
                    {"slope", f.slope},
                    {"intercept", f.intercept},
                    {"ci_low", f.ci_low},
                    {"ci_high", f.ci_high},
                    {"points", f.points}});
  }
  json verdicts = json::array();
  for (const auto& v : r.verdicts) {
    verdicts.push_back(
        {{"name", v.name}, {"expectation", v.expectation}, {"measured", v.measured}, {"pass", v.pass}});
  }
  return json{{"study", r.study}, {"passed", r.passed()}, {"runs", runs}, {"fits", fits}, {"verdicts", verdicts}};
}

StudyResult study_from_json(const nlohmann::json& j) {
  StudyResult r;
  r.study = j.at("study").get<std::string>();
  for (const auto& run : j.at("runs")) {
    RunSummary s;
    s.id = run.at("id").get<std::string>();
    s.status = run.at("status").get<std::string>();
    for (const auto& kv : run.at("values")) s.values.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<double>());
    r.runs.push_back(std::move(s));
  }
  for (const auto& f : j.at("fits")) {
    LinearFit fit;
    fit.slope = f.at("slope").get<double>();
    fit.intercept = f.at("intercept").get<double>();
    fit.ci_low = f.at("ci_low").get<double>();
    fit.ci_high = f.at("ci_high").get<double>();
    fit.points = f.at("points").get<std::size_t>();
    r.fits.emplace_back(f.at("name").get<std::string>(), fit);
  }
  for (const auto& v : j.at("verdicts")) {
    r.verdicts.push_back({v.at("name").get<std::string>(), v.at("expectation").get<std::string>(),
                          v.at("measured").get<double>(), v.at("pass").get<bool>()});
  }
  return r;
}

SingleRun run_single(const RunConfig& cfg) {
  cfg.validate();
  const Grid grid = make_grid(cfg);
  const CoriolisProfile cor = make_coriolis(cfg, grid);
  const State3 v0 = initial_state(cfg, grid);
  SingleRun out;
  if (cfg.solver.kind == SolverKind::Lines) {
    StepControl step = cfg.solver.step;
    step.t_end = cfg.horizon;
    out.result = integrate(v0, step, cfg.params, cor);
    return out;
  }
  ContinuationOptions opts;
  opts.window_constant = cfg.solver.window_constant;
  opts.window.intervals = cfg.solver.window_intervals;
  opts.window.tol = cfg.solver.tol;
  opts.window.max_iter = cfg.solver.max_iter;
  IntegrationResult& res = out.result;
  try {
    ContinuationResult c = continuation(v0, cfg.horizon, cfg.params, cor, opts);
    out.windows = c.window_lengths.size();
    for (std::size_t k = 0; k < c.mesh.size(); ++k) {
      if (k % cfg.solver.step.sample_every != 0 && k + 1 != c.mesh.size()) continue;
      res.samples.push_back(c.mesh.times[k], c.mesh.states[k]);
      res.records.push_back(make_record(c.mesh.times[k], c.mesh.states[k], cfg.params));
    }
    res.steps = c.mesh.size() - 1;
    res.stop_time = c.mesh.times.back();
    // A suspected blow-up is reported as a monitor stop: the run ended early on a diagnostic.
    res.stop_reason =
        c.status == ContinuationStatus::Completed ? StopReason::Completed : StopReason::MonitorStop;
  } catch (const NonPositiveHeight&) {
    res.stop_reason = StopReason::NonPositiveHeight;
  }
  return out;
}

StudyResult eps_cauchy_sweep(const RunConfig& base, std::span<const double> eps_list, double eps_ref) {
  base.validate();
  if (eps_list.empty()) throw InvalidArgument("eps sweep needs at least one eps");
  if (!(eps_ref >= 0.0)) throw InvalidArgument("reference eps must be non-negative");
  for (double e : eps_list) {
    if (e < eps_ref) throw InvalidArgument("reference eps must not exceed any swept eps");
  }
  const Grid grid = make_grid(base);
  const CoriolisProfile cor = make_coriolis(base, grid);
  const State3 v0 = initial_state(base, grid);

  // One fixed step for every run, so all runs are sampled at identical times.
  StepControl step = base.solver.step;
  step.t_end = base.horizon;
  step.fixed_step = true;
  step.dt_max = cfl_dt(v0, grid, step.cfl, step.dt_max);

  std::vector<double> all(eps_list.begin(), eps_list.end());
  all.push_back(eps_ref);
  std::vector<IntegrationResult> runs(all.size());
  parallel_for(all.size(), [&](std::size_t i) {
    Params p = base.params;
    p.eps = all[i];
    runs[i] = lines_run(v0, step, p, cor);
  });
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!runs[i].completed()) {
      throw Error("eps sweep aborted: run eps=" + format_number(all[i]) + " stopped early (" +
                  to_string(runs[i].stop_reason) + ")");
    }
  }

  const TrajectoryMesh& ref = runs.back().samples;
  StudyResult out;
  out.study = "eps_cauchy_sweep";
  std::vector<double> distances;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    const TrajectoryMesh& s = runs[i].samples;
    double d = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) d = std::max(d, l2_norm(s.states[k] - ref.states[k]));
    distances.push_back(d);
    out.runs.push_back({"eps=" + format_number(all[i]),
                        "completed",
                        {{"eps", all[i]}, {"distance", d}, {"final_l2_dist", runs[i].records.back().l2_dist}}});
  }
  out.primary_records = runs.back().records;
  out.runs.push_back({"reference eps=" + format_number(eps_ref),
                      "completed",
                      {{"eps", eps_ref}, {"dt", step.dt_max}, {"samples", static_cast<double>(ref.size())}}});

  std::vector<double> xs, ys, gaps;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (distances[i] > 0.0) {
      xs.push_back(eps_list[i]);
      ys.push_back(distances[i]);
      gaps.push_back(eps_list[i] - eps_ref);
    }
  }
  bool monotone = true;
  std::vector<std::size_t> order(eps_list.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eps_list[a] < eps_list[b]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (distances[order[i]] < distances[order[i - 1]]) monotone = false;
  }
  out.verdicts.push_back({"distance_monotone_in_eps",
                          "sup_t ||V^eps - V^ref||_L2 non-decreasing in eps", monotone ? 1.0 : 0.0, monotone});
  if (xs.size() >= 2) {
    const LinearFit fit = fit_loglog(xs, ys);
    out.fits.emplace_back("log_distance_vs_log_eps", fit);
    out.fits.emplace_back("log_distance_vs_log_eps_gap", fit_loglog(gaps, ys));
    out.verdicts.push_back({"slope_in_range",
                            "slope of log sup_t ||V^eps - V^ref||_L2 against log eps in [0.8, 1.2]", fit.slope,
                            fit.slope >= 0.8 && fit.slope <= 1.2});
  }
  return out;
}

double amplitude_for_h1(const RunConfig& cfg, const Grid& grid, double delta) {
  if (!(delta > 0.0)) return 0.0;
  const State3 e = rest_state(grid, cfg.params.lambda_bar());
  auto norm_at = [&](double a) {
    const PhysState s = make_initial_data(cfg.init.kind, a, cfg.init.width, grid, cfg.params, cfg.init.modes);
    return sobolev_norm(symmetrize(s, cfg.params.g) - e, 1);
  };
  double lo = 0.0;
  double hi = 1e-6;
  while (norm_at(hi) < delta) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw InvalidArgument("no amplitude reaches the requested H1 size");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm_at(mid) < delta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

StudyResult small_data_global(const RunConfig& cfg, std::span<const double> delta_list, double horizon) {
  cfg.validate();
  if (!(cfg.params.eps > 0.0)) throw InvalidArgument("small_data_global needs eps > 0");
  const Grid grid = make_grid(cfg);
  const CoriolisProfile cor = make_coriolis(cfg, grid);

  struct Outcome {
    RunSummary summary;
    bool global = false;
    std::vector<DiagnosticsRecord> records;
  };
  auto evaluate = [&](double delta) {
    Outcome o;
    o.summary.id = "delta=" + format_number(delta);
    if (delta == 0.0) {
      o.summary.status = "trivially_global";
      o.summary.values = {{"delta", 0.0}, {"amplitude", 0.0}};
      o.global = true;
      return o;
    }
    RunConfig c = cfg;
    c.init.amplitude = amplitude_for_h1(cfg, grid, delta);
    const State3 v0 = initial_state(c, grid);
    StepControl step = cfg.solver.step;
    step.t_end = horizon;
    const IntegrationResult run = integrate(v0, step, cfg.params, cor);
    const auto& rec = run.records;

    const StoppingTimes st = stopping_times(rec, rec.front().h2_dist, delta);
    const EnergyInequality energy = energy_inequality_check(rec, cfg.params, delta);
    const double root = std::sqrt(delta);
    std::optional<double> vx_fail = first_time(rec, [&](const DiagnosticsRecord& r) { return r.vx_l2 > root; });
    std::optional<double> l2_fail =
        first_time(rec, [&](const DiagnosticsRecord& r) { return r.l2_dist > 3.0 * delta; });
    std::optional<double> energy_fail;
    for (std::size_t k = 0; k < energy.margins.size(); ++k) {
      if (energy.margins[k] < 0.0) {
        energy_fail = rec[k].t;
        break;
      }
    }
    const GrowthBound growth = vx_growth_bound(rec, cfg.params, delta, cor);
    const L2Balance balance = l2_balance_check(rec, cfg.params);

    double max_vx = 0.0, max_l2 = 0.0;
    for (const auto& r : rec) {
      max_vx = std::max(max_vx, r.vx_l2);
      max_l2 = std::max(max_l2, r.l2_dist);
    }
    o.records = run.records;
    o.global = run.completed() && !st.t_delta && energy.pass && !vx_fail && !l2_fail;

    // Which condition broke first, if any.
    std::string first = "none";
    double first_t = std::numeric_limits<double>::infinity();
    auto consider = [&](const std::optional<double>& t, const char* name) {
      if (t && *t < first_t) {
        first_t = *t;
        first = name;
      }
    };
    consider(st.t_delta, "t_delta_reached");
    consider(energy_fail, "energy_inequality");
    consider(vx_fail, "vx_l2_above_sqrt_delta");
    consider(l2_fail, "l2_above_3_delta");
    if (!run.completed()) consider(run.stop_time, "run_stopped");

    o.summary.status = o.global ? "global" : "failed:" + first;
    o.summary.values = {{"delta", delta},
                        {"amplitude", c.init.amplitude},
                        {"samples", static_cast<double>(rec.size())},
                        {"max_l2_dist", max_l2},
                        {"max_vx_l2", max_vx},
                        {"energy_min_margin", energy.min_margin},
                        {"growth_bound_pass", growth.pass ? 1.0 : 0.0},
                        {"l2_balance_pass", balance.pass ? 1.0 : 0.0},
                        {"first_failure_time", std::isfinite(first_t) ? first_t : -1.0},
                        {"final_t", run.stop_time}};
    return o;
  };

  std::vector<Outcome> outcomes(delta_list.size());
  parallel_for(delta_list.size(), [&](std::size_t i) { outcomes[i] = evaluate(delta_list[i]); });

  StudyResult out;
  out.study = "small_data_global";
  if (!outcomes.empty()) out.primary_records = outcomes.front().records;
  double best_pass = -1.0;
  double worst_fail = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const double delta = delta_list[i];
    out.verdicts.push_back({"global_delta=" + format_number(delta),
                            "T_delta not reached, energy_inequality_check margin >= 0, ||V_x||_L2 <= sqrt(delta), "
                            "||V - E||_L2 <= 3 delta at every sample",
                            delta, outcomes[i].global});
    if (outcomes[i].global) {
      best_pass = std::max(best_pass, delta);
    } else {
      worst_fail = std::min(worst_fail, delta);
    }
    out.runs.push_back(std::move(outcomes[i].summary));
  }
  if (cfg.study.bisect_steps > 0 && best_pass > 0.0 && std::isfinite(worst_fail) && best_pass < worst_fail) {
    double lo = best_pass, hi = worst_fail;
    for (std::size_t it = 0; it < cfg.study.bisect_steps; ++it) {
      const double mid = std::sqrt(lo * hi);
      Outcome o = evaluate(mid);
      o.summary.id = "bisect " + o.summary.id;
      (o.global ? lo : hi) = mid;
      out.runs.push_back(std::move(o.summary));
    }
    out.runs.push_back({"delta_range", "bisection", {{"largest_global_delta", lo}, {"smallest_failing_delta", hi}}});
  }
  return out;
}

StudyResult t0_scaling(const RunConfig& cfg, std::span<const double> amplitudes) {
  cfg.validate();
  const Grid grid = make_grid(cfg);
  const CoriolisProfile cor = make_coriolis(cfg, grid);
  const State3 e = rest_state(grid, cfg.params.lambda_bar());

  struct Doubling {
    std::optional<double> time;
    double n0 = 0.0;
    std::string status;
    std::vector<DiagnosticsRecord> records;
  };
  std::vector<Doubling> found(amplitudes.size());
  parallel_for(amplitudes.size(), [&](std::size_t i) {
    RunConfig c = cfg;
    c.init.amplitude = amplitudes[i];
    const State3 v0 = initial_state(c, grid);
    Doubling& d = found[i];
    d.n0 = n_norm(v0, e);
    if (!(d.n0 > 0.0)) {
      d.status = "excluded:rest_state";
      return;
    }
    StepControl step = cfg.solver.step;
    step.t_end = cfg.horizon;
    step.sample_every = 1;
    double prev_t = 0.0, prev_n = d.n0;
    const Monitor watch = [&](const DiagnosticsRecord& r, const State3&) {
      if (r.n_norm >= 2.0 * d.n0) {
        // Linear interpolation between the bracketing steps.
        const double s = (2.0 * d.n0 - prev_n) / (r.n_norm - prev_n);
        d.time = prev_t + s * (r.t - prev_t);
        return false;
      }
      prev_t = r.t;
      prev_n = r.n_norm;
      return true;
    };
    const IntegrationResult run = integrate(v0, step, cfg.params, cor, {watch});
    d.records = run.records;
    if (d.time) {
      d.status = "doubled";
    } else {
      d.status = run.completed() ? "excluded:not_doubled_within_horizon" : "excluded:" + to_string(run.stop_reason);
    }
  });

  StudyResult out;
  out.study = "t0_scaling";
  for (const Doubling& d : found) {
    if (!d.records.empty()) out.primary_records = d.records;
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    RunSummary s{"A=" + format_number(amplitudes[i]), found[i].status, {{"amplitude", amplitudes[i]}, {"n0", found[i].n0}}};
    if (found[i].time) {
      s.values.emplace_back("doubling_time", *found[i].time);
      xs.push_back(amplitudes[i]);
      ys.push_back(*found[i].time);
    }
    out.runs.push_back(std::move(s));
  }
  if (xs.size() >= 2) {
    const LinearFit fit = fit_loglog(xs, ys);
    out.fits.emplace_back("log_doubling_time_vs_log_amplitude", fit);
    out.verdicts.push_back({"slope_near_minus_one", "slope of log T2 (first t with n_norm >= 2 N(0)) against log A in [-1.3, -0.7]",
                            fit.slope, fit.slope >= -1.3 && fit.slope <= -0.7});
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = 0; j < xs.size(); ++j) {
        if (std::abs(xs[j] - 2.0 * xs[i]) <= 1e-12 * xs[j]) {
          const double ratio = ys[j] / ys[i];
          out.verdicts.push_back({"ratio_A=" + format_number(xs[i]),
                                  "T2(2A) / T2(A) in [0.35, 0.7]", ratio, ratio >= 0.35 && ratio <= 0.7});
        }
      }
    }
  } else {
    out.verdicts.push_back({"slope_near_minus_one", "needs two amplitudes whose norm doubles", 0.0, false});
  }
  return out;
}

double spectral_tail_fraction(const State3& v, double lambda_bar) {
  const State3 d = v - rest_state(v.grid(), lambda_bar);
  const long n = static_cast<long>(v.grid().n());
  double tail = 0.0, total = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Spectrum s = to_spectrum(d.component(c));
    for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
      const double e = std::norm(s.coeffs[j]);
      total += e;
      const long m = std::labs(v.grid().mode(j));
      if (6 * m > n && 3 * m <= n) tail += e;
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

StudyResult shock_probe(const RunConfig& cfg, double a_large) {
  cfg.validate();
  const Grid grid = make_grid(cfg);
  const CoriolisProfile cor = make_coriolis(cfg, grid);

  struct Probe {
    std::string id;
    double amplitude;
    double eps;
    std::vector<double> times, sup_vx, tail;
    std::optional<double> loss_time;
    IntegrationResult run;
  };
  std::vector<Probe> probes{{"large_A_inviscid", a_large, 0.0, {}, {}, {}, {}, {}},
                            {"small_A_inviscid", 0.1 * a_large, 0.0, {}, {}, {}, {}, {}},
                            {"large_A_viscous", a_large, 1e-2, {}, {}, {}, {}, {}}};
  parallel_for(probes.size(), [&](std::size_t i) {
    Probe& pr = probes[i];
    RunConfig c = cfg;
    c.init.amplitude = pr.amplitude;
    c.params.eps = pr.eps;
    const State3 v0 = initial_state(c, grid);
    StepControl step = cfg.solver.step;
    step.t_end = cfg.horizon;
    const double lambda_bar = c.params.lambda_bar();
    const Monitor track = [&](const DiagnosticsRecord& r, const State3& s) {
      const double tail = spectral_tail_fraction(s, lambda_bar);
      pr.times.push_back(r.t);
      pr.sup_vx.push_back(r.sup_vx);
      pr.tail.push_back(tail);
      if (!pr.loss_time && tail > 0.01) pr.loss_time = r.t;
      return true;
    };
    pr.run = integrate(v0, step, c.params, cor, {track});
  });

  StudyResult out;
  out.study = "shock_probe";
  out.primary_records = probes[0].run.records;
  for (const Probe& pr : probes) {
    // sup |V_x| up to resolution loss (or the end of the run).
    std::size_t end = pr.times.size();
    if (pr.loss_time) {
      end = static_cast<std::size_t>(std::find(pr.times.begin(), pr.times.end(), *pr.loss_time) - pr.times.begin()) + 1;
    }
    bool monotone = true;
    for (std::size_t k = 1; k < end; ++k) {
      if (pr.sup_vx[k] < pr.sup_vx[k - 1]) monotone = false;
    }
    const double t_last = pr.times[end - 1];
    const double rate = t_last > 0.0 ? (pr.sup_vx[end - 1] - pr.sup_vx[0]) / t_last : 0.0;
    RunSummary s{pr.id,
                 to_string(pr.run.stop_reason),
                 {{"amplitude", pr.amplitude},
                  {"eps", pr.eps},
                  {"resolution_loss_time", pr.loss_time ? *pr.loss_time : -1.0},
                  {"sup_vx_initial", pr.sup_vx.front()},
                  {"sup_vx_at_loss_or_end", pr.sup_vx[end - 1]},
                  {"steepening_rate", rate},
                  {"sup_vx_monotone", monotone ? 1.0 : 0.0},
                  {"stop_time", pr.run.stop_time}}};
    out.runs.push_back(std::move(s));
  }
  const Probe& large = probes[0];
  const Probe& small = probes[1];
  const Probe& viscous = probes[2];
  out.verdicts.push_back({"large_A_loses_resolution", "spectral tail above 1% of perturbation energy within horizon",
                          large.loss_time.value_or(-1.0), large.loss_time.has_value()});
  out.verdicts.push_back({"large_A_steepens_monotonically", "sup_vx non-decreasing before resolution loss",
                          out.runs[0].value("sup_vx_monotone"), out.runs[0].value("sup_vx_monotone") == 1.0});
  out.verdicts.push_back({"small_A_keeps_resolution", "spectral tail below 1% over the horizon",
                          small.loss_time.value_or(-1.0), !small.loss_time.has_value()});
  out.verdicts.push_back({"viscous_keeps_resolution", "spectral tail below 1% over the horizon with eps = 1e-2",
                          viscous.loss_time.value_or(-1.0), !viscous.loss_time.has_value()});
  return out;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("RSW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string code_version() { return RSW_VERSION; }

void write_records_csv(const std::filesystem::path& path, std::span<const DiagnosticsRecord> records) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << kRecordsHeader << '\n';
  char buf[64];
  for (const auto& r : records) {
    const double cols[] = {r.t,       r.l2_dist,     r.h1_dist, r.n_norm, r.sup_vx,        r.entropy,
                           r.dissipation, r.min_h, r.mass,    r.log_h_h1, r.hessian_min_eig};
    bool first = true;
    for (double c : cols) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      os << (first ? "" : ",") << buf;
      first = false;
    }
    os << '\n';
  }
  if (!os) throw Error("failed while writing " + path.string());
}

std::vector<DiagnosticsRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path.string());
  std::string line;
  std::getline(is, line);
  if (line != kRecordsHeader) throw Error("unexpected records header in " + path.string());
  std::vector<DiagnosticsRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(std::strtod(cell.c_str(), nullptr));
    if (cols.size() != 11) throw Error("malformed records row in " + path.string());
    DiagnosticsRecord r;
    r.t = cols[0];
    r.l2_dist = cols[1];
    r.h1_dist = cols[2];
    r.n_norm = cols[3];
    r.sup_vx = cols[4];
    r.entropy = cols[5];
    r.dissipation = cols[6];
    r.min_h = cols[7];
    r.mass = cols[8];
    r.log_h_h1 = cols[9];
    r.hessian_min_eig = cols[10];
    out.push_back(r);
  }
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << j.dump(2) << '\n';
  if (!os) throw Error("failed while writing " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path.string());
  return nlohmann::json::parse(is);
}

nlohmann::json manifest(const RunConfig& cfg, const std::string& command) {
  return nlohmann::json{{"command", command},
                        {"code_version", code_version()},
                        {"config", to_json(cfg)},
                        {"config_text", to_config_text(cfg)}};
}

void persist(const std::filesystem::path& dir, const RunConfig& cfg, const std::string& command,
             std::span<const DiagnosticsRecord> records, const nlohmann::json& summary) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  write_records_csv(dir / "records.csv", records);
  write_json(dir / "summary.json", summary);
  write_json(dir / "manifest.json", manifest(cfg, command));
}

}  // namespace rsw
