#include "rsw/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsw/errors.hpp"

namespace rsw {

namespace {

void require_uniform(std::span<const DiagnosticsRecord> records, std::size_t min_count, const char* who) {
  if (records.size() < min_count) throw TooFewSamples(std::string(who) + ": not enough samples");
  const double dt = records[1].t - records[0].t;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const double step = records[k].t - records[k - 1].t;
    if (!(step > 0.0) || std::abs(step - dt) > 1e-9 * std::max(1.0, dt)) {
      throw InvalidArgument(std::string(who) + ": samples must be uniformly spaced");
    }
  }
}

double quadratic_form(const Mat3& m, double a, double b, double c) {
  const std::array<double, 3> x{a, b, c};
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) s += x[i] * m[i][j] * x[j];
  }
  return s;
}

// Index one past the last sample strictly before T_delta.
std::size_t end_before_t_delta(std::span<const DiagnosticsRecord> records, double delta) {
  const double threshold = std::sqrt(delta);
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (std::max(records[k].l2_dist, records[k].vx_l2) > threshold) return k;
  }
  return records.size();
}

}  // namespace

DiagnosticsRecord make_record(double t, const State3& v, const Params& p) {
  const double lambda_bar = p.lambda_bar();
  const Grid& grid = v.grid();
  const State3 e = rest_state(grid, lambda_bar);
  const State3 d = v - e;

  DiagnosticsRecord r;
  r.t = t;
  r.l2_dist = l2_norm(d);
  r.h1_dist = sobolev_norm(d, 1);
  r.h2_dist = sobolev_norm(d, 2);
  r.n_norm = n_norm(v, e);

  const State3 vx = derivative(v, 1);
  r.sup_vx = sup_norm(pointwise_magnitude(vx));
  r.vx_l2 = l2_norm(vx);
  r.entropy = integral(entropy_density(v, lambda_bar));

  double diss = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const Mat3 hess = entropy_hessian(v.lambda[i], v.u[i], v.v[i], lambda_bar);
    diss += quadratic_form(hess, vx.lambda[i], vx.u[i], vx.v[i]);
    min_eig = std::min(min_eig, entropy_hessian_min_eig(v.lambda[i], v.u[i], v.v[i], lambda_bar));
  }
  r.dissipation = p.eps * diss * grid.dx();
  r.hessian_min_eig = min_eig;

  Field h(grid);
  Field log_h(grid);
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const double l = v.lambda[i];
    h[i] = std::copysign(l * l / (4.0 * p.g), l);
    log_h[i] = l > 0.0 ? 2.0 * std::log(l / lambda_bar) : std::numeric_limits<double>::quiet_NaN();
  }
  r.min_h = min_value(h);
  r.max_h = max_value(h);
  r.mass = integral(h - p.h_bar);
  r.log_h_h1 = sobolev_norm(log_h, 1);

  r.sx_sup = sup_norm(s_x_opnorm(v));
  r.ux_sup = sup_norm(vx.u);
  r.ux_h1 = sobolev_norm(vx.u, 1);
  return r;
}

double entropy_density(double lambda, double u, double v, double lambda_bar) {
  const double l2 = lambda * lambda;
  const double q = (l2 - lambda_bar * lambda_bar) / 4.0;
  return l2 / 8.0 * (u * u + v * v) + 0.5 * q * q;
}

Field entropy_density(const State3& v, double lambda_bar) {
  Field r(v.grid());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = entropy_density(v.lambda[i], v.u[i], v.v[i], lambda_bar);
  return r;
}

Field entropy_flux(const State3& v, double lambda_bar) {
  Field r(v.grid());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double l2 = v.lambda[i] * v.lambda[i];
    const double u = v.u[i];
    const double w = v.v[i];
    r[i] = l2 * u / 8.0 * (u * u + w * w) + l2 * u / 4.0 * ((l2 - lambda_bar * lambda_bar) / 4.0);
  }
  return r;
}

Mat3 entropy_hessian(double lambda, double u, double v, double lambda_bar) {
  const double l2 = lambda * lambda;
  const double a = (u * u + v * v) / 4.0 + 3.0 * l2 / 8.0 - lambda_bar * lambda_bar / 8.0;
  const double b = lambda * u / 2.0;
  const double c = lambda * v / 2.0;
  const double d = l2 / 4.0;
  return Mat3{{{a, b, c}, {b, d, 0.0}, {c, 0.0, d}}};
}

double entropy_hessian_min_eig(double lambda, double u, double v, double lambda_bar) {
  // [[a, b, c], [b, d, 0], [c, 0, d]] has eigenvalue d on (0, c, -b) and the
  // eigenvalues of [[a, r], [r, d]], r = |(b, c)|, on the complement.
  const Mat3 m = entropy_hessian(lambda, u, v, lambda_bar);
  const double a = m[0][0];
  const double d = m[1][1];
  const double r = std::hypot(m[0][1], m[0][2]);
  const double lower = 0.5 * (a + d) - std::hypot(0.5 * (a - d), r);
  return std::min(d, lower);
}

double entropy_dissipation(const State3& v, const Params& p) {
  const State3 vx = derivative(v, 1);
  const double lambda_bar = p.lambda_bar();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.grid().n(); ++i) {
    sum += quadratic_form(entropy_hessian(v.lambda[i], v.u[i], v.v[i], lambda_bar), vx.lambda[i], vx.u[i],
                          vx.v[i]);
  }
  return p.eps * sum * v.grid().dx();
}

Coercivity hessian_coercivity(const State3& v, double lambda_bar) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.grid().n(); ++i) {
    m = std::min(m, entropy_hessian_min_eig(v.lambda[i], v.u[i], v.v[i], lambda_bar));
  }
  const double threshold = lambda_bar * lambda_bar / 8.0;
  return {m, threshold, m >= threshold};
}

EntropyBalance entropy_balance(std::span<const DiagnosticsRecord> records) {
  require_uniform(records, 3, "entropy_balance");
  const std::size_t m = records.size();
  const double dt = records[1].t - records[0].t;
  EntropyBalance out;
  for (std::size_t k = 0; k < m; ++k) {
    double didt;
    if (k == 0) {
      didt = (-3.0 * records[0].entropy + 4.0 * records[1].entropy - records[2].entropy) / (2.0 * dt);
    } else if (k == m - 1) {
      didt = (3.0 * records[k].entropy - 4.0 * records[k - 1].entropy + records[k - 2].entropy) / (2.0 * dt);
    } else {
      didt = (records[k + 1].entropy - records[k - 1].entropy) / (2.0 * dt);
    }
    const double r = didt + records[k].dissipation;
    out.times.push_back(records[k].t);
    out.residual.push_back(r);
    out.max_abs = std::max(out.max_abs, std::abs(r));
    out.max_dissipation = std::max(out.max_dissipation, std::abs(records[k].dissipation));
  }
  out.normalized = out.max_dissipation > 0.0 ? out.max_abs / out.max_dissipation : out.max_abs;
  return out;
}

EntropyBalance entropy_balance(const TrajectoryMesh& traj, const Params& p) {
  std::vector<DiagnosticsRecord> records;
  records.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) records.push_back(make_record(traj.times[k], traj.states[k], p));
  return entropy_balance(records);
}

StoppingTimes stopping_times(std::span<const DiagnosticsRecord> records, double m0, double delta) {
  StoppingTimes st;
  const double root = std::sqrt(delta);
  for (const auto& r : records) {
    if (!st.tau && r.h2_dist > 2.0 * m0) st.tau = r.t;
    if (!st.t_delta && std::max(r.l2_dist, r.vx_l2) > root) st.t_delta = r.t;
  }
  return st;
}

EnergyInequality energy_inequality_check(std::span<const DiagnosticsRecord> records, const Params& p,
                                         double delta) {
  EnergyInequality out;
  const double bound = 9.0 * delta * delta;
  out.min_margin = bound;
  const std::size_t end = end_before_t_delta(records, delta);
  double dissipated = 0.0;
  for (std::size_t k = 0; k < end; ++k) {
    if (k > 0) {
      const double dt = records[k].t - records[k - 1].t;
      dissipated += 0.5 * dt * (records[k].vx_l2 * records[k].vx_l2 + records[k - 1].vx_l2 * records[k - 1].vx_l2);
    }
    const double lhs = records[k].l2_dist * records[k].l2_dist + 4.0 * p.eps * dissipated;
    const double margin = bound - lhs;
    out.margins.push_back(margin);
    out.min_margin = std::min(out.min_margin, margin);
    if (margin < 0.0) out.pass = false;
  }
  return out;
}

GrowthBound vx_growth_bound(std::span<const DiagnosticsRecord> records, const Params& p, double delta,
                            const CoriolisProfile& cor) {
  if (!(p.eps > 0.0)) throw InvalidArgument("vx_growth_bound needs eps > 0");
  const double c1 = 3.0 / (2.0 * std::cbrt(4.0 * p.eps));
  const double c2 = 6.0 * delta * cor.sup_fx;
  auto rhs = [&](double x) { return c1 * std::pow(x, 10.0 / 3.0) + c2 * x; };

  GrowthBound out;
  out.worst_excess = -std::numeric_limits<double>::infinity();
  const std::size_t end = end_before_t_delta(records, delta);
  double scale = 0.0;
  for (std::size_t k = 0; k < end; ++k) scale = std::max(scale, records[k].vx_l2 * records[k].vx_l2);
  for (std::size_t k = 1; k < end; ++k) {
    const double dt = records[k].t - records[k - 1].t;
    const double y0 = records[k - 1].vx_l2 * records[k - 1].vx_l2;
    const double y1 = records[k].vx_l2 * records[k].vx_l2;
    const double inc = y1 - y0;
    const double b = 0.5 * dt * (rhs(records[k - 1].vx_l2) + rhs(records[k].vx_l2));
    out.increments.push_back(inc);
    out.bounds.push_back(b);
    const double excess = inc - 1.05 * b;
    out.worst_excess = std::max(out.worst_excess, excess);
    if (excess > 1e-13 * scale) out.pass = false;
  }
  if (out.increments.empty()) out.worst_excess = 0.0;
  return out;
}

L2Balance l2_balance_check(std::span<const DiagnosticsRecord> records, const Params& p) {
  L2Balance out;
  out.worst_excess = -std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (const auto& r : records) scale = std::max(scale, r.l2_dist * r.l2_dist);
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& a = records[k - 1];
    const auto& b = records[k];
    const double dt = b.t - a.t;
    const double lhs = b.l2_dist * b.l2_dist - a.l2_dist * a.l2_dist +
                       2.0 * p.eps * 0.5 * dt * (a.vx_l2 * a.vx_l2 + b.vx_l2 * b.vx_l2);
    const double rhs = 0.5 * dt * (a.sx_sup * a.l2_dist * a.l2_dist + b.sx_sup * b.l2_dist * b.l2_dist);
    const double excess = lhs - rhs - 0.05 * std::abs(rhs);
    out.worst_excess = std::max(out.worst_excess, excess);
    if (excess > 1e-13 * scale) out.pass = false;
  }
  if (records.size() < 2) out.worst_excess = 0.0;
  return out;
}

Interpolation interpolation_check(const State3& v, const State3& e) {
  const State3 d = v - e;
  double vx2 = 0.0;
  double vxx2 = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Spectrum s = to_spectrum(d.component(c));
    const double a = sobolev_norm(derivative(s, 1), 0);
    const double b = sobolev_norm(derivative(s, 2), 0);
    vx2 += a * a;
    vxx2 += b * b;
  }
  const double lhs = vx2;
  const double rhs = std::sqrt(vxx2) * l2_norm(d);
  const double slack = rhs - lhs;
  // Equality holds for a single Fourier mode, so compare up to rounding.
  return {slack >= -1e-12 * std::max(lhs, rhs), lhs, rhs, slack};
}

PositivityReport positivity_monitor(const PhysTrajectory& traj, double h_bar, double alpha_floor) {
  PositivityReport out;
  out.alpha = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const PhysState& s = traj.states[k];
    const double hmin = min_value(s.h);
    if (!(hmin > alpha_floor)) throw NonPositiveHeight(hmin);
    const double hmax = max_value(s.h);
    Field log_h(s.grid());
    for (std::size_t i = 0; i < log_h.size(); ++i) log_h[i] = std::log(s.h[i] / h_bar);
    const double y = sobolev_norm(log_h, 1);
    const Field ux = derivative(s.u, 1);

    double env = y;
    if (k > 0) {
      const double dt = traj.times[k] - traj.times[k - 1];
      const Field ux_prev = derivative(traj.states[k - 1].u, 1);
      env = out.envelope.back() + dt * (sup_norm(ux_prev) * out.envelope.back() + 2.0 * sobolev_norm(ux_prev, 1));
    }
    out.times.push_back(traj.times[k]);
    out.min_h.push_back(hmin);
    out.max_h.push_back(hmax);
    out.log_h_h1.push_back(y);
    out.envelope.push_back(env);
    if (y > 1.05 * env + 1e-14) out.violations.push_back(k);
    out.alpha = std::min({out.alpha, hmin, 1.0 / hmax});
  }
  return out;
}

PositivityReport positivity_monitor(std::span<const DiagnosticsRecord> records, double alpha_floor) {
  PositivityReport out;
  out.alpha = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < records.size(); ++k) {
    const DiagnosticsRecord& r = records[k];
    if (!(r.min_h > alpha_floor)) throw NonPositiveHeight(r.min_h);
    double env = r.log_h_h1;
    if (k > 0) {
      const DiagnosticsRecord& prev = records[k - 1];
      env = out.envelope.back() + (r.t - prev.t) * (prev.ux_sup * out.envelope.back() + 2.0 * prev.ux_h1);
    }
    out.times.push_back(r.t);
    out.min_h.push_back(r.min_h);
    out.max_h.push_back(r.max_h);
    out.log_h_h1.push_back(r.log_h_h1);
    out.envelope.push_back(env);
    if (r.log_h_h1 > 1.05 * env + 1e-14) out.violations.push_back(k);
    out.alpha = std::min({out.alpha, r.min_h, 1.0 / r.max_h});
  }
  return out;
}

RegularityRatios regularity_equivalence(const Field& h, double h_bar, int m) {
  if (!(min_value(h) > 0.0)) throw NonPositiveHeight(min_value(h));
  const double root_bar = std::sqrt(h_bar);
  Field dh = h - h_bar;
  Field droot(h.grid);
  for (std::size_t i = 0; i < h.size(); ++i) droot[i] = std::sqrt(h[i]) - root_bar;

  const double nh = sobolev_norm(dh, m);
  const double nr = sobolev_norm(droot, m);
  RegularityRatios out{1.0, 1.0, true};
  if (nh > 0.0 || nr > 0.0) {
    out.ratio_fwd = nh > 0.0 ? nr / nh : std::numeric_limits<double>::infinity();
    out.ratio_bwd = nr > 0.0 ? nh / nr : std::numeric_limits<double>::infinity();
  }
  if (m == 0) {
    double sup_root = 0.0;
    for (double x : h.values) sup_root = std::max(sup_root, std::sqrt(x));
    for (std::size_t i = 0; i < h.size(); ++i) {
      const double a = std::abs(droot[i]);
      const double b = std::abs(dh[i]);
      const double tol = 1e-14 * std::max(1.0, b);
      if (a > b / root_bar + tol || b > a * (root_bar + sup_root) + tol) out.pointwise_bounds_hold = false;
    }
  }
  return out;
}

}  // namespace rsw
