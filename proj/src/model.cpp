#include "rsw/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rsw/errors.hpp"

namespace rsw {

namespace {

double sup_of(const Field& f) { return sup_norm(f); }

// Assembles S(V) W pointwise from already-dealiased factors.
State3 s_times(const Field& lambda, const Field& u, const State3& w) {
  const Grid& g = lambda.grid;
  State3 r(g);
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double half_l = 0.5 * lambda[i];
    r.lambda[i] = u[i] * w.lambda[i] + half_l * w.u[i];
    r.u[i] = half_l * w.lambda[i] + u[i] * w.u[i];
    r.v[i] = u[i] * w.v[i];
  }
  return r;
}

State3 dealias(const State3& s) { return State3(dealias(s.lambda), dealias(s.u), dealias(s.v)); }

}  // namespace

double Params::lambda_bar() const { return 2.0 * std::sqrt(g * h_bar); }

void Params::validate() const {
  if (!(g > 0.0) || !std::isfinite(g)) throw InvalidArgument("gravity g must be positive");
  if (!(h_bar > 0.0) || !std::isfinite(h_bar)) throw InvalidArgument("rest height h_bar must be positive");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("viscosity eps must be non-negative");
}

CoriolisProfile::CoriolisProfile(Field f_, Field fx, Field fxx)
    : f(std::move(f_)), f_x(std::move(fx)), f_xx(std::move(fxx)) {
  sup_f = sup_of(f);
  sup_fx = sup_of(f_x);
  sup_fxx = sup_of(f_xx);
  if (!std::isfinite(sup_f) || !std::isfinite(sup_fx) || !std::isfinite(sup_fxx)) {
    throw InvalidArgument("Coriolis profile must be bounded with bounded derivatives");
  }
}

CoriolisProfile CoriolisProfile::constant(const Grid& g, double f0) {
  return CoriolisProfile(Field(g, f0), Field(g), Field(g));
}

CoriolisProfile CoriolisProfile::sine(const Grid& g, double f0, double f1) {
  const double k = 2.0 * std::numbers::pi / g.length();
  return CoriolisProfile(Field::from_function(g, [&](double x) { return f0 + f1 * std::sin(k * x); }),
                         Field::from_function(g, [&](double x) { return f1 * k * std::cos(k * x); }),
                         Field::from_function(g, [&](double x) { return -f1 * k * k * std::sin(k * x); }));
}

CoriolisProfile CoriolisProfile::from_field(Field f) {
  Field fx = derivative(f, 1);
  Field fxx = derivative(f, 2);
  return CoriolisProfile(std::move(f), std::move(fx), std::move(fxx));
}

State3 symmetrize(const PhysState& p, double g) {
  const double hmin = min_value(p.h);
  if (!(hmin > 0.0)) throw NonPositiveHeight(hmin);
  Field lambda(p.grid());
  for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] = 2.0 * std::sqrt(g * p.h[i]);
  return State3(std::move(lambda), p.u, p.v);
}

PhysState desymmetrize(const State3& v, double g) {
  const double lmin = min_value(v.lambda);
  if (!(lmin > 0.0)) throw NonPositiveLambda(lmin);
  Field h(v.grid());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = v.lambda[i] * v.lambda[i] / (4.0 * g);
  return PhysState(std::move(h), v.u, v.v);
}

void check_admissible(const State3& v, const Params& p) {
  const double lmin = min_value(v.lambda);
  if (!(lmin > kAdmissibleLambdaFraction * p.lambda_bar())) {
    const double hmin = lmin > 0.0 ? lmin * lmin / (4.0 * p.g) : lmin;
    throw NonPositiveHeight(hmin);
  }
}

State3 apply_S(const State3& v, const State3& w) {
  require_same_grid(v.grid(), w.grid());
  return dealias(s_times(dealias(v.lambda), dealias(v.u), dealias(w)));
}

std::array<Field, 3> char_speeds(const State3& v) {
  Field plus = v.u;
  Field minus = v.u;
  for (std::size_t i = 0; i < plus.size(); ++i) {
    plus[i] += 0.5 * v.lambda[i];
    minus[i] -= 0.5 * v.lambda[i];
  }
  return {v.u, std::move(plus), std::move(minus)};
}

double s_x_opnorm(double u_x, double lambda_x) {
  const double half = 0.5 * lambda_x;
  return std::max({std::abs(u_x), std::abs(u_x + half), std::abs(u_x - half)});
}

Field s_x_opnorm(const State3& v) {
  const Field ux = derivative(v.u, 1);
  const Field lx = derivative(v.lambda, 1);
  Field r(v.grid());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = s_x_opnorm(ux[i], lx[i]);
  return r;
}

State3 coriolis_term(const State3& v, const State3& e, const CoriolisProfile& cor) {
  require_same_grid(v.grid(), e.grid());
  require_same_grid(v.grid(), cor.f.grid);
  const State3 d = v - e;
  State3 r(v.grid());
  for (std::size_t i = 0; i < r.lambda.size(); ++i) {
    r.u[i] = -cor.f[i] * d.v[i];
    r.v[i] = cor.f[i] * d.u[i];
  }
  return r;
}

State3 hyperbolic_rhs(const State3& v, const State3& e, const CoriolisProfile& cor, RhsTerms terms) {
  require_same_grid(v.grid(), e.grid());
  const Grid& g = v.grid();
  State3 r(g);
  if (terms.transport) {
    std::array<Field, 3> vals{Field(g), Field(g), Field(g)};
    State3 vx(g);
    for (int c = 0; c < 3; ++c) {
      const Spectrum s = dealias(to_spectrum(v.component(c)));
      vals[c] = from_spectrum(s);
      vx.component(c) = from_spectrum(derivative(s, 1));
    }
    r -= s_times(vals[0], vals[1], vx);
  }
  if (terms.coriolis) {
    // The product f (V - E) is truncated like every other quadratic term.
    r -= coriolis_term(dealias(v), dealias(e), cor);
  }
  return dealias(r);
}

std::vector<ConservativeResidual> conservative_residual(const PhysTrajectory& traj, const CoriolisProfile& cor,
                                                        double g) {
  const std::size_t m = traj.times.size();
  if (m < 3 || traj.states.size() != m) throw TooFewSamples("conservative_residual needs at least 3 time nodes");
  const double dt = traj.times[1] - traj.times[0];
  for (std::size_t k = 1; k < m; ++k) {
    const double step = traj.times[k] - traj.times[k - 1];
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw InvalidArgument("conservative_residual needs uniformly spaced time nodes");
    }
  }
  const Grid& grid = traj.states.front().grid();
  auto conserved = [&](const PhysState& s) {
    return std::array<Field, 3>{s.h, pointwise_product(s.h, s.u), pointwise_product(s.h, s.v)};
  };

  std::vector<ConservativeResidual> out;
  for (std::size_t k = 1; k + 1 < m; ++k) {
    const auto prev = conserved(traj.states[k - 1]);
    const auto next = conserved(traj.states[k + 1]);
    const PhysState& s = traj.states[k];
    const Field hu = pointwise_product(s.h, s.u);
    const Field hv = pointwise_product(s.h, s.v);
    Field flux_u = pointwise_product(hu, s.u);
    for (std::size_t i = 0; i < flux_u.size(); ++i) flux_u[i] += 0.5 * g * s.h[i] * s.h[i];
    const std::array<Field, 3> flux_x{derivative(hu, 1), derivative(flux_u, 1),
                                      derivative(pointwise_product(hu, s.v), 1)};
    const std::array<Field, 3> source{Field(grid), pointwise_product(cor.f, hv), -pointwise_product(cor.f, hu)};

    ConservativeResidual r{traj.times[k], {Field(grid), Field(grid), Field(grid)}, {}};
    for (int c = 0; c < 3; ++c) {
      Field& res = r.fields[c];
      for (std::size_t i = 0; i < res.size(); ++i) {
        res[i] = (next[c][i] - prev[c][i]) / (2.0 * dt) + flux_x[c][i] - source[c][i];
      }
      r.l2[c] = l2_norm(res);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rsw
