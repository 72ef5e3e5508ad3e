#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "rsw/errors.hpp"
#include "rsw/model.hpp"
#include "support.hpp"

using namespace rsw;
using rsw::testing::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Vector3d eig(double diag, double off, double last) {
  Eigen::Matrix3d m;
  m << diag, off, 0.0, off, diag, 0.0, 0.0, 0.0, last;
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m).eigenvalues();
}

// Fourth-order centered difference on the periodic grid.
Field fd4(const Field& f) {
  const std::size_t n = f.size();
  Field d(f.grid);
  for (std::size_t i = 0; i < n; ++i) {
    const double fm2 = f[(i + n - 2) % n], fm1 = f[(i + n - 1) % n], fp1 = f[(i + 1) % n], fp2 = f[(i + 2) % n];
    d[i] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * f.grid.dx());
  }
  return d;
}

// -S(V) V_x - F x (V - E) assembled pointwise from fourth-order differences.
State3 rhs_fd4(const State3& v, double lambda_bar, const Field& f) {
  const Field lx = fd4(v.lambda), ux = fd4(v.u), vx = fd4(v.v);
  State3 out(v.grid());
  for (std::size_t i = 0; i < v.grid().n(); ++i) {
    out.lambda[i] = -(v.u[i] * lx[i] + 0.5 * v.lambda[i] * ux[i]);
    out.u[i] = -(0.5 * v.lambda[i] * lx[i] + v.u[i] * ux[i]) + f[i] * v.v[i];
    out.v[i] = -v.u[i] * vx[i] - f[i] * v.u[i];
  }
  (void)lambda_bar;
  return out;
}

double max_abs(const Field& f) { return sup_norm(f); }

}  // namespace

TEST_CASE("params") {
  Params p;
  CHECK(p.lambda_bar() == doctest::Approx(2.0 * std::sqrt(9.81)));
  p.eps = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = Params{0.0, 1.0, 0.0};
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("symmetrize and desymmetrize") {
  const Grid g(16, 1.0);
  PhysState rest(Field(g, 1.0), Field(g), Field(g));
  const State3 v = symmetrize(rest, 9.81);
  CHECK(v.lambda[3] == doctest::Approx(6.26418390534633).epsilon(1e-14));
  const PhysState q = desymmetrize(State3(Field(g, 4.0), Field(g), Field(g)), 1.0);
  CHECK(q.h[0] == doctest::Approx(4.0));

  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    PhysState p(testing::smooth_field(g, rng, 3, 0.4) + 1.0, testing::smooth_field(g, rng, 3, 1.0),
                testing::smooth_field(g, rng, 3, 1.0));
    const PhysState back = desymmetrize(symmetrize(p, 9.81), 9.81);
    for (std::size_t i = 0; i < g.n(); ++i) {
      CHECK(std::abs(back.h[i] - p.h[i]) <= 1e-13 * p.h[i]);
      CHECK(back.u[i] == p.u[i]);
    }
    const State3 s = testing::smooth_state(g, rng, 3.0, 3, 0.2);
    const State3 again = symmetrize(desymmetrize(s, 2.0), 2.0);
    CHECK(l2_norm(again - s) <= 1e-13 * l2_norm(s));
  }
  PhysState bad(Field(g, 1.0), Field(g), Field(g));
  bad.h[2] = 0.0;
  CHECK_THROWS_AS(symmetrize(bad, 9.81), NonPositiveHeight);
  State3 neg(Field(g, 1.0), Field(g), Field(g));
  neg.lambda[1] = -0.5;
  CHECK_THROWS_AS(desymmetrize(neg, 9.81), NonPositiveLambda);
}

TEST_CASE("admissibility threshold") {
  const Grid g(16, 1.0);
  Params p;
  State3 v = rest_state(g, p.lambda_bar());
  CHECK_NOTHROW(check_admissible(v, p));
  v.lambda[4] = 0.5 * kAdmissibleLambdaFraction * p.lambda_bar();
  CHECK_THROWS_AS(check_admissible(v, p), NonPositiveHeight);
}

TEST_CASE("apply_S examples and self-adjointness") {
  const Grid g(64, 2.0 * kPi);
  const double lb = 2.0;
  const State3 e = rest_state(g, lb);
  CHECK(l2_norm(apply_S(e, State3(g))) == 0.0);
  State3 w(Field(g, 1.0), Field(g, 2.0), Field(g, 3.0));
  const State3 sw = apply_S(e, w);
  CHECK(sw.lambda[7] == doctest::Approx(lb / 2.0 * 2.0));
  CHECK(sw.u[7] == doctest::Approx(lb / 2.0 * 1.0));
  CHECK(std::abs(sw.v[7]) < 1e-15);

  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const State3 v = testing::smooth_state(g, rng, 2.0, 8, 0.3);
    const State3 a = testing::smooth_state(g, rng, 1.0, 8, 1.0);
    const State3 b = testing::smooth_state(g, rng, 1.0, 8, 1.0);
    const double lhs = inner(apply_S(v, a), b), rhs = inner(a, apply_S(v, b));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * l2_norm(apply_S(v, a)) * l2_norm(b));
  }
}

TEST_CASE("energy-transfer identity") {
  const Grid g(64, 2.0 * kPi);
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const double lb = testing::uniform(rng, 1.0, 5.0);
    const State3 v = testing::smooth_state(g, rng, lb, 6, 0.2);
    const State3 d = v - rest_state(g, lb);
    const Field ux = derivative(v.u, 1), lx = derivative(v.lambda, 1);
    State3 sx(g);
    for (std::size_t i = 0; i < g.n(); ++i) {
      sx.lambda[i] = ux[i] * d.lambda[i] + 0.5 * lx[i] * d.u[i];
      sx.u[i] = 0.5 * lx[i] * d.lambda[i] + ux[i] * d.u[i];
      sx.v[i] = ux[i] * d.v[i];
    }
    const double lhs = -2.0 * inner(d, apply_S(v, derivative(v, 1)));
    const double rhs = inner(d, sx);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(std::abs(lhs), std::abs(rhs)));
  }
}

TEST_CASE("characteristic speeds") {
  const Grid g(16, 1.0);
  const auto rest = char_speeds(rest_state(g, 3.0));
  CHECK(rest[0][0] == 0.0);
  CHECK(rest[1][0] == doctest::Approx(1.5));
  CHECK(rest[2][0] == doctest::Approx(-1.5));
  const auto s = char_speeds(State3(Field(g, 2.0), Field(g, 0.5), Field(g)));
  CHECK(s[0][2] == doctest::Approx(0.5));
  CHECK(s[1][2] == doctest::Approx(1.5));
  CHECK(s[2][2] == doctest::Approx(-0.5));

  // u +- sqrt(g h) in physical variables
  PhysState p(Field(g, 2.0), Field(g, 0.3), Field(g));
  const auto phys = char_speeds(symmetrize(p, 9.81));
  CHECK(phys[1][0] == doctest::Approx(0.3 + std::sqrt(9.81 * 2.0)).epsilon(1e-14));
  CHECK(phys[2][0] == doctest::Approx(0.3 - std::sqrt(9.81 * 2.0)).epsilon(1e-14));

  Rng rng(13);
  const Grid gg(32, 2.0 * kPi);
  for (int trial = 0; trial < 20; ++trial) {
    const State3 v = testing::smooth_state(gg, rng, 3.0, 4, 0.3);
    const auto sp = char_speeds(v);
    for (std::size_t i = 0; i < gg.n(); ++i) {
      const Eigen::Vector3d ev = eig(v.u[i], 0.5 * v.lambda[i], v.u[i]);
      std::array<double, 3> got{sp[0][i], sp[1][i], sp[2][i]};
      std::sort(got.begin(), got.end());
      for (int c = 0; c < 3; ++c) CHECK(got[c] == doctest::Approx(ev[c]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("S_x operator norm") {
  CHECK(s_x_opnorm(1.0, 4.0) == doctest::Approx(3.0));
  CHECK(s_x_opnorm(0.0, 0.0) == 0.0);
  const Grid g(32, 2.0 * kPi);
  CHECK(max_abs(s_x_opnorm(rest_state(g, 2.0))) == 0.0);
  Rng rng(14);
  for (int trial = 0; trial < 1000; ++trial) {
    const double ux = testing::uniform(rng, -10.0, 10.0), lx = testing::uniform(rng, -10.0, 10.0);
    const double oracle = eig(ux, 0.5 * lx, ux).cwiseAbs().maxCoeff();
    CHECK(std::abs(s_x_opnorm(ux, lx) - oracle) <= 1e-12 * std::max(1.0, oracle));
    CHECK(s_x_opnorm(ux, lx) <= std::abs(ux) + 0.5 * std::abs(lx) + 1e-15);
  }
}

TEST_CASE("Coriolis term") {
  const Grid g(32, 2.0 * kPi);
  const State3 e = rest_state(g, 2.0);
  const CoriolisProfile one = CoriolisProfile::constant(g, 1.0);
  CHECK(l2_norm(coriolis_term(e, e, one)) == 0.0);
  State3 v = e;
  v.v = Field(g, 1.0);
  const State3 c = coriolis_term(v, e, one);
  CHECK(c.lambda[0] == 0.0);
  CHECK(c.u[0] == doctest::Approx(-1.0));
  CHECK(c.v[0] == 0.0);

  const CoriolisProfile sine = CoriolisProfile::sine(g, 1.0, 0.6);
  CHECK(sine.sup_f == doctest::Approx(1.6).epsilon(1e-3));
  CHECK(sine.f_x[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(sine.sup_fx == doctest::Approx(0.6).epsilon(1e-3));
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const State3 w = testing::smooth_state(g, rng, 2.0, 5, 0.4);
    const State3 d = w - e;
    const State3 cw = coriolis_term(w, e, sine);
    for (std::size_t i = 0; i < g.n(); ++i) {
      const double dot = d.lambda[i] * cw.lambda[i] + d.u[i] * cw.u[i] + d.v[i] * cw.v[i];
      CHECK(std::abs(dot) <= 1e-15 * (1.0 + d.u[i] * d.u[i] + d.v[i] * d.v[i]));
    }
  }
  const CoriolisProfile spectral = CoriolisProfile::from_field(sine.f);
  CHECK(sup_norm(spectral.f_x - sine.f_x) < 1e-12);
  CHECK(sup_norm(spectral.f_xx - sine.f_xx) < 1e-12);
}

TEST_CASE("hyperbolic right-hand side") {
  const Grid g(64, 2.0 * kPi);
  const double lb = 3.0;
  const State3 e = rest_state(g, lb);
  const CoriolisProfile cor = CoriolisProfile::sine(g, 1.0, 0.5);
  CHECK(l2_norm(hyperbolic_rhs(e, e, cor)) < 1e-14);

  Rng rng(16);
  State3 v = testing::smooth_state(g, rng, lb, 4, 0.2);
  v.v = Field(g);
  CHECK(sup_norm(hyperbolic_rhs(v, e, CoriolisProfile::constant(g, 0.0)).v) < 1e-14);

  RhsTerms none{false, false};
  CHECK(l2_norm(hyperbolic_rhs(testing::smooth_state(g, rng, lb, 4, 0.2), e, cor, none)) == 0.0);
}

TEST_CASE("hyperbolic right-hand side matches a fourth-order difference oracle") {
  Rng rng(17);
  const double lb = 3.0, L = 2.0 * kPi;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> errs;
    const std::uint64_t seed = rng();
    for (std::size_t n : {64, 128}) {
      const Grid g(n, L);
      Rng local(seed);
      const State3 v = testing::smooth_state(g, local, lb, 3, 0.2);
      const CoriolisProfile cor = CoriolisProfile::sine(g, 1.0, 0.5);
      errs.push_back(l2_norm(hyperbolic_rhs(v, rest_state(g, lb), cor) - rhs_fd4(v, lb, cor.f)));
    }
    CHECK(errs[1] < 1e-4);
    CHECK(errs[0] / errs[1] == doctest::Approx(16.0).epsilon(0.15));
  }
}

TEST_CASE("conservative residual") {
  const Grid g(64, 2.0 * kPi);
  const double gg = 9.81, hbar = 1.0, f0 = 1.0;
  const CoriolisProfile cor = CoriolisProfile::constant(g, f0);
  PhysTrajectory rest;
  for (int k = 0; k < 5; ++k) {
    rest.times.push_back(0.1 * k);
    rest.states.emplace_back(Field(g, hbar), Field(g), Field(g));
  }
  for (const auto& r : conservative_residual(rest, cor, gg)) {
    for (double x : r.l2) CHECK(x == 0.0);
  }

  // Linear inertia-gravity wave: omega^2 = f^2 + g h_bar k^2.
  const double k = 2.0, omega = std::sqrt(f0 * f0 + gg * hbar * k * k);
  auto wave = [&](double a, double dt) {
    PhysTrajectory traj;
    for (int m = 0; m < 5; ++m) {
      const double t = m * dt;
      traj.times.push_back(t);
      traj.states.emplace_back(
          Field::from_function(g, [&](double x) { return hbar + a * std::cos(k * x - omega * t); }),
          Field::from_function(g, [&](double x) { return a * omega / (hbar * k) * std::cos(k * x - omega * t); }),
          Field::from_function(g, [&](double x) { return a * f0 / (hbar * k) * std::sin(k * x - omega * t); }));
    }
    double worst = 0.0;
    for (const auto& r : conservative_residual(traj, cor, gg)) worst = std::max({worst, r.l2[0], r.l2[1], r.l2[2]});
    return worst;
  };
  // Amplitude squared at tiny dt, dt squared at tiny amplitude.
  CHECK(wave(1e-3, 1e-5) / wave(5e-4, 1e-5) == doctest::Approx(4.0).epsilon(0.05));
  CHECK(wave(1e-7, 4e-3) / wave(1e-7, 2e-3) == doctest::Approx(4.0).epsilon(0.05));

  PhysTrajectory two{{0.0, 1.0}, {rest.states[0], rest.states[1]}};
  CHECK_THROWS_AS(conservative_residual(two, cor, gg), TooFewSamples);
}

TEST_CASE("conservative residual of a computed run is second order") {
  const Grid g(64, 10.0 * kPi);
  Params p;
  const CoriolisProfile cor = CoriolisProfile::constant(g, 1.0);
  const State3 v0 = testing::bump_state(g, p, 0.05);
  auto worst = [&](double dt) {
    const IntegrationResult r = testing::fixed_run(v0, p, cor, 0.4, dt);
    PhysTrajectory traj;
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
      traj.times.push_back(r.samples.times[k]);
      traj.states.push_back(desymmetrize(r.samples.states[k], p.g));
    }
    double w = 0.0;
    for (const auto& c : conservative_residual(traj, cor, p.g)) w = std::max({w, c.l2[0], c.l2[1], c.l2[2]});
    return w;
  };
  CHECK(worst(0.02) / worst(0.01) == doctest::Approx(4.0).epsilon(0.15));
}
