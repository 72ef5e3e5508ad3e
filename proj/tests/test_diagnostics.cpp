#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "rsw/diagnostics.hpp"
#include "rsw/errors.hpp"
#include "rsw/lines_solver.hpp"
#include "support.hpp"

using namespace rsw;
using rsw::testing::Rng;
using rsw::testing::uniform;

namespace {

constexpr double kPi = std::numbers::pi;

DiagnosticsRecord rec(double t) {
  DiagnosticsRecord r;
  r.t = t;
  return r;
}

Eigen::Matrix3d to_eigen(const Mat3& m) {
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) e(i, j) = m[i][j];
  }
  return e;
}

PhysTrajectory to_phys(const TrajectoryMesh& mesh, double g) {
  PhysTrajectory t;
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    t.times.push_back(mesh.times[k]);
    t.states.push_back(desymmetrize(mesh.states[k], g));
  }
  return t;
}

}  // namespace

TEST_CASE("entropy density and flux examples") {
  const double lb = 3.0;
  CHECK(entropy_density(lb, 0.0, 0.0, lb) == 0.0);
  CHECK(entropy_density(lb, 1.0, 0.0, lb) == doctest::Approx(lb * lb / 8.0));
  CHECK(entropy_density(lb, 0.6, 0.8, lb) == doctest::Approx(lb * lb / 8.0));
  // lambda^2 - lambda_bar^2 = 4 gives a potential part of 1/2.
  CHECK(entropy_density(std::sqrt(lb * lb + 4.0), 0.0, 0.0, lb) == doctest::Approx(0.5));

  const Grid g(16, 1.0);
  const State3 v(Field(g, lb), Field(g, 0.7), Field(g, 0.0));
  const Field flux = entropy_flux(v, lb);
  for (double x : flux.values) CHECK(x == doctest::Approx(lb * lb / 8.0 * 0.343));
  CHECK(sup_norm(entropy_flux(rest_state(g, lb), lb)) == 0.0);
}

TEST_CASE("entropy flux is compatible with the symmetric operator") {
  // grad G = grad eta . S(V), and grad eta is orthogonal to the Coriolis term.
  Rng rng(11);
  const double h = 1e-5;
  for (int trial = 0; trial < 200; ++trial) {
    const double lb = uniform(rng, 0.5, 6.0);
    const double l = lb * uniform(rng, 0.5, 1.5);
    const double u = uniform(rng, -1.0, 1.0);
    const double w = uniform(rng, -1.0, 1.0);
    const Grid g(8, 1.0);
    auto G = [&](double a, double b, double c) {
      return entropy_flux(State3(Field(g, a), Field(g, b), Field(g, c)), lb)[0];
    };
    auto eta = [&](double a, double b, double c) { return entropy_density(a, b, c, lb); };
    const double grad_eta[3] = {(eta(l + h, u, w) - eta(l - h, u, w)) / (2 * h),
                                (eta(l, u + h, w) - eta(l, u - h, w)) / (2 * h),
                                (eta(l, u, w + h) - eta(l, u, w - h)) / (2 * h)};
    const double grad_g[3] = {(G(l + h, u, w) - G(l - h, u, w)) / (2 * h), (G(l, u + h, w) - G(l, u - h, w)) / (2 * h),
                              (G(l, u, w + h) - G(l, u, w - h)) / (2 * h)};
    const double s[3][3] = {{u, l / 2, 0}, {l / 2, u, 0}, {0, 0, u}};
    const double scale = 1.0 + std::abs(grad_g[0]) + std::abs(grad_g[1]) + std::abs(grad_g[2]);
    for (int j = 0; j < 3; ++j) {
      double expect = 0.0;
      for (int i = 0; i < 3; ++i) expect += grad_eta[i] * s[i][j];
      CHECK(std::abs(grad_g[j] - expect) <= 1e-7 * scale);
    }
    const double f = uniform(rng, -2.0, 2.0);
    const double cor = grad_eta[1] * (-f * w) + grad_eta[2] * (f * u);
    CHECK(std::abs(cor) <= 1e-7 * (1.0 + std::abs(grad_eta[1]) + std::abs(grad_eta[2])));
  }
}

TEST_CASE("entropy Hessian") {
  const double lb = 2.0;
  const Mat3 at_rest = entropy_hessian(lb, 0.0, 0.0, lb);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(at_rest[i][j] == doctest::Approx(i == j ? lb * lb / 4.0 : 0.0));
  }
  CHECK(entropy_hessian_min_eig(lb, 0.0, 0.0, lb) == doctest::Approx(lb * lb / 4.0));

  Rng rng(12);
  const double h = 1e-4;
  for (int trial = 0; trial < 500; ++trial) {
    const double lbar = uniform(rng, 0.5, 5.0);
    const double l = lbar * uniform(rng, 0.3, 2.0);
    const double x[3] = {l, uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0)};
    const Mat3 m = entropy_hessian(x[0], x[1], x[2], lbar);
    auto eta = [&](const double* y) { return entropy_density(y[0], y[1], y[2], lbar); };
    double scale = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) scale = std::max(scale, std::abs(m[i][j]));
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK(m[i][j] == m[j][i]);
        double pp[3] = {x[0], x[1], x[2]}, pm[3] = {x[0], x[1], x[2]};
        double mp[3] = {x[0], x[1], x[2]}, mm[3] = {x[0], x[1], x[2]};
        pp[i] += h, pp[j] += h;
        pm[i] += h, pm[j] -= h;
        mp[i] -= h, mp[j] += h;
        mm[i] -= h, mm[j] -= h;
        const double fd = (eta(pp) - eta(pm) - eta(mp) + eta(mm)) / (4 * h * h);
        CHECK(std::abs(fd - m[i][j]) <= 1e-5 * (1.0 + scale));
      }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen(m));
    const double closed = entropy_hessian_min_eig(x[0], x[1], x[2], lbar);
    CHECK(std::abs(closed - es.eigenvalues()(0)) <= 1e-12 * (1.0 + scale));
  }
}

TEST_CASE("Hessian coercivity near rest") {
  Rng rng(13);
  const Grid g(64, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double lb = uniform(rng, 0.5, 6.0);
    const State3 v = testing::smooth_state(g, rng, lb, 6, 0.02);
    const Coercivity c = hessian_coercivity(v, lb);
    CHECK(c.threshold == doctest::Approx(lb * lb / 8.0));
    CHECK(c.coercive);
    CHECK(c.min_eig >= c.threshold);
  }
  // Large velocity loses coercivity: a = u^2/4 + lb^2/4, b = lb u / 2.
  const State3 fast(Field(g, 1.0), Field(g, 3.0), Field(g, 0.0));
  CHECK_FALSE(hessian_coercivity(fast, 1.0).coercive);
}

TEST_CASE("make_record at rest and for a shifted height") {
  const Grid g(32, 4.0);
  const Params p{9.81, 2.0, 0.1};
  const DiagnosticsRecord r = make_record(0.5, rest_state(g, p.lambda_bar()), p);
  CHECK(r.t == 0.5);
  CHECK(r.l2_dist == 0.0);
  CHECK(r.n_norm == 0.0);
  CHECK(r.entropy == 0.0);
  CHECK(r.dissipation == 0.0);
  CHECK(r.mass == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r.min_h == doctest::Approx(2.0));
  CHECK(r.log_h_h1 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(r.hessian_min_eig == doctest::Approx(p.lambda_bar() * p.lambda_bar() / 4.0));

  PhysState s(Field(g, 2.5), Field(g, 0.0), Field(g, 0.0));
  const DiagnosticsRecord q = make_record(0.0, symmetrize(s, p.g), p);
  CHECK(q.mass == doctest::Approx(0.5 * 4.0));
  CHECK(q.min_h == doctest::Approx(2.5));
  CHECK(q.log_h_h1 == doctest::Approx(std::log(1.25) * 2.0));
  CHECK(q.sup_vx < 1e-12);
}

TEST_CASE("entropy balance on synthetic records") {
  // entropy t^2 and dissipation -2t balance exactly with second-order stencils.
  std::vector<DiagnosticsRecord> rs;
  for (int k = 0; k <= 10; ++k) {
    DiagnosticsRecord r = rec(0.1 * k);
    r.entropy = r.t * r.t;
    r.dissipation = -2.0 * r.t;
    rs.push_back(r);
  }
  const EntropyBalance b = entropy_balance(rs);
  CHECK(b.residual.size() == rs.size());
  CHECK(b.max_abs < 1e-12);
  CHECK(b.max_dissipation == doctest::Approx(2.0));

  std::vector<DiagnosticsRecord> rest(5);
  for (int k = 0; k < 5; ++k) rest[k] = rec(0.2 * k);
  CHECK(entropy_balance(rest).max_abs == 0.0);
  CHECK(entropy_balance(rest).normalized == 0.0);

  CHECK_THROWS_AS(entropy_balance(std::span(rest).first(2)), TooFewSamples);
  rest[3].t = 0.65;
  CHECK_THROWS_AS(entropy_balance(rest), InvalidArgument);
}

TEST_CASE("entropy balance residual is second order in the time step") {
  const Grid g(64, 10.0 * kPi);
  const Params p{9.81, 1.0, 0.05};
  const auto cor = CoriolisProfile::constant(g, 1.0);
  const State3 v0 = testing::bump_state(g, p, 0.05);
  const auto coarse = testing::fixed_run(v0, p, cor, 0.4, 0.02);
  const auto fine = testing::fixed_run(v0, p, cor, 0.4, 0.01);
  const double rc = entropy_balance(coarse.records).normalized;
  const double rf = entropy_balance(fine.records).normalized;
  CHECK(rf < rc);
  CHECK(rc / rf >= 3.5);
  CHECK(rc / rf <= 4.5);
  // The mesh overload agrees with the record overload.
  CHECK(entropy_balance(fine.samples, p).normalized == doctest::Approx(rf).epsilon(1e-12));
}

TEST_CASE("stopping times") {
  std::vector<DiagnosticsRecord> rs;
  for (int k = 0; k < 5; ++k) rs.push_back(rec(k));
  rs[2].h2_dist = 2.5;
  rs[3].l2_dist = 0.2;
  rs[4].vx_l2 = 0.5;
  StoppingTimes st = stopping_times(rs, 1.0, 0.01);
  REQUIRE(st.tau);
  CHECK(*st.tau == 2.0);
  REQUIRE(st.t_delta);
  CHECK(*st.t_delta == 3.0);

  st = stopping_times(rs, 2.0, 0.2);
  CHECK_FALSE(st.tau);
  REQUIRE(st.t_delta);
  CHECK(*st.t_delta == 4.0);
  // A single step above threshold at t = 1.
  std::vector<DiagnosticsRecord> step{rec(0.0), rec(1.0)};
  step[1].h2_dist = 1.0;
  CHECK(*stopping_times(step, 0.25, 1.0).tau == 1.0);
}

TEST_CASE("energy inequality") {
  const double delta = 1e-2;
  std::vector<DiagnosticsRecord> rs;
  for (int k = 0; k < 4; ++k) rs.push_back(rec(k));
  const Params p{9.81, 1.0, 0.1};
  EnergyInequality e = energy_inequality_check(rs, p, delta);
  CHECK(e.pass);
  CHECK(e.min_margin == doctest::Approx(9.0 * delta * delta));
  CHECK(e.margins.size() == 4);

  // ||V - E||^2 + 4 eps int ||V_x||^2 accumulates the trapezoid integral.
  for (auto& r : rs) r.vx_l2 = 0.05;
  e = energy_inequality_check(rs, p, delta);
  CHECK(e.margins[3] == doctest::Approx(9e-4 - 4.0 * 0.1 * 3.0 * 0.0025));
  CHECK_FALSE(e.pass);

  // Samples from T_delta on are not checked.
  std::vector<DiagnosticsRecord> late{rec(0.0), rec(1.0)};
  late[1].l2_dist = 1.0;
  e = energy_inequality_check(late, p, delta);
  CHECK(e.pass);
  CHECK(e.margins.size() == 1);
}

TEST_CASE("growth bound for ||V_x||^2") {
  const Grid g(64, 10.0 * kPi);
  const Params p{9.81, 1.0, 0.05};
  std::vector<DiagnosticsRecord> rest;
  for (int k = 0; k < 6; ++k) rest.push_back(rec(0.1 * k));
  const auto constant = CoriolisProfile::constant(g, 1.0);
  const GrowthBound gb = vx_growth_bound(rest, p, 1e-3, constant);
  CHECK(gb.pass);
  CHECK(gb.worst_excess <= 0.0);
  CHECK_THROWS_AS(vx_growth_bound(rest, Params{9.81, 1.0, 0.0}, 1e-3, constant), InvalidArgument);

  // Constant f removes the forcing term; a jump in ||V_x|| from zero then violates it.
  rest[3].vx_l2 = 1e-2;
  CHECK_FALSE(vx_growth_bound(rest, p, 1.0, constant).pass);

  const auto cor = CoriolisProfile::sine(g, 1.0, 0.5);
  const State3 v0 = testing::bump_state(g, p, 1e-3);
  const auto run = testing::fixed_run(v0, p, cor, 2.0, 0.02, 5);
  CHECK(vx_growth_bound(run.records, p, 1e-3, cor).pass);
}

TEST_CASE("L2 balance on computed runs") {
  const Grid g(64, 10.0 * kPi);
  for (double eps : {0.0, 0.02}) {
    const Params p{9.81, 1.0, eps};
    const auto cor = CoriolisProfile::sine(g, 1.0, 0.5);
    const auto run = testing::fixed_run(testing::bump_state(g, p, 0.05), p, cor, 1.0, 0.01, 2);
    const L2Balance b = l2_balance_check(run.records, p);
    CHECK(b.pass);
  }
  // A jump in ||V - E|| with no S_x cannot be balanced.
  std::vector<DiagnosticsRecord> rs{rec(0.0), rec(0.1)};
  rs[1].l2_dist = 1.0;
  CHECK_FALSE(l2_balance_check(rs, Params{}).pass);
}

TEST_CASE("interpolation inequality") {
  const Grid g(64, 2.0 * kPi);
  const State3 e = rest_state(g, 2.0);
  for (int k : {1, 3, 9}) {
    State3 v = e;
    v.u = Field::from_function(g, [k](double x) { return 0.3 * std::sin(k * x); });
    const Interpolation it = interpolation_check(v, e);
    CHECK(it.pass);
    CHECK(std::abs(it.slack) <= 1e-12 * it.rhs);
    CHECK(it.lhs == doctest::Approx(0.09 * kPi * k * k).epsilon(1e-12));
  }
  Rng rng(14);
  for (int trial = 0; trial < 1000; ++trial) {
    const State3 v = testing::smooth_state(g, rng, 2.0, 20, 0.1);
    const Interpolation it = interpolation_check(v, e);
    CHECK(it.pass);
    CHECK(it.slack >= 0.0);
  }
}

TEST_CASE("positivity monitor") {
  const Grid g(64, 10.0 * kPi);
  const Params p{9.81, 1.0, 0.02};
  const auto cor = CoriolisProfile::constant(g, 1.0);

  const auto rest = testing::fixed_run(rest_state(g, p.lambda_bar()), p, cor, 0.2, 0.05);
  const PositivityReport r0 = positivity_monitor(to_phys(rest.samples, p.g), p.h_bar, 0.0);
  CHECK(r0.pass());
  for (std::size_t k = 0; k < r0.times.size(); ++k) {
    CHECK(r0.log_h_h1[k] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(r0.envelope[k] == doctest::Approx(0.0).epsilon(1e-14));
  }
  CHECK(r0.alpha == doctest::Approx(1.0));

  const auto run = testing::fixed_run(testing::bump_state(g, p, 0.1), p, cor, 2.0, 0.01, 5);
  const PositivityReport r = positivity_monitor(to_phys(run.samples, p.g), p.h_bar, 0.0);
  CHECK(r.pass());
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    CHECK(r.min_h[k] > 0.0);
    CHECK(r.log_h_h1[k] <= 1.05 * r.envelope[k] + 1e-14);
    CHECK(r.alpha <= r.min_h[k]);
    CHECK(r.alpha <= 1.0 / r.max_h[k]);
  }
  const PositivityReport from_records = positivity_monitor(run.records, 0.0);
  REQUIRE(from_records.times.size() == r.times.size());
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    CHECK(from_records.log_h_h1[k] == doctest::Approx(r.log_h_h1[k]).epsilon(1e-12));
    CHECK(from_records.envelope[k] == doctest::Approx(r.envelope[k]).epsilon(1e-12));
    CHECK(from_records.max_h[k] == doctest::Approx(r.max_h[k]).epsilon(1e-14));
  }
  CHECK(from_records.alpha == doctest::Approx(r.alpha).epsilon(1e-14));
  CHECK(from_records.pass());
  const double floor = *std::min_element(r.min_h.begin(), r.min_h.end());
  CHECK_THROWS_AS(positivity_monitor(to_phys(run.samples, p.g), p.h_bar, floor), NonPositiveHeight);
  CHECK_THROWS_AS(positivity_monitor(run.records, floor), NonPositiveHeight);
}

TEST_CASE("regularity equivalence of h and sqrt h") {
  const Grid g(128, 2.0 * kPi);
  const double h_bar = 1.5;
  const RegularityRatios flat = regularity_equivalence(Field(g, h_bar), h_bar, 1);
  CHECK(flat.ratio_fwd == 1.0);
  CHECK(flat.ratio_bwd == 1.0);
  for (double a : {0.01, 0.1, 0.3, 0.5}) {
    const Field h = Field::from_function(g, [&](double x) { return h_bar * (1.0 + a * std::sin(x)); });
    const double sup_root = std::sqrt(h_bar * (1.0 + a));
    const RegularityRatios r0 = regularity_equivalence(h, h_bar, 0);
    CHECK(r0.pointwise_bounds_hold);
    CHECK(r0.ratio_fwd <= 1.0 / std::sqrt(h_bar));
    CHECK(r0.ratio_bwd <= std::sqrt(h_bar) + sup_root);
    // Linearization: sqrt h - sqrt h_bar ~ (h - h_bar) / (2 sqrt h_bar).
    if (a == 0.01) CHECK(r0.ratio_fwd == doctest::Approx(0.5 / std::sqrt(h_bar)).epsilon(1e-3));
    for (int m : {1, 2}) {
      const RegularityRatios r = regularity_equivalence(h, h_bar, m);
      CHECK(std::isfinite(r.ratio_fwd));
      CHECK(r.ratio_fwd * r.ratio_bwd == doctest::Approx(1.0));
    }
  }
  CHECK_THROWS_AS(regularity_equivalence(Field::from_function(g, [](double x) { return std::sin(x); }), 1.0, 0),
                  NonPositiveHeight);
}
