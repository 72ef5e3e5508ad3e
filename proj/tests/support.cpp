#include "support.hpp"

#include <cmath>
#include <numbers>

namespace rsw::testing {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Field white_noise(const Grid& g, Rng& rng) {
  std::normal_distribution<double> nd;
  Field f(g);
  for (auto& x : f.values) x = nd(rng);
  return f;
}

Field smooth_field(const Grid& g, Rng& rng, int kmax, double amp) {
  Field f(g);
  for (int k = 1; k <= kmax; ++k) {
    const double a = uniform(rng, -amp, amp) / k;
    const double b = uniform(rng, -amp, amp) / k;
    const double w = 2.0 * std::numbers::pi * k / g.length();
    for (std::size_t i = 0; i < g.n(); ++i) f[i] += a * std::cos(w * g.x(i)) + b * std::sin(w * g.x(i));
  }
  return f;
}

State3 smooth_state(const Grid& g, Rng& rng, double lambda_bar, int kmax, double amp) {
  return State3(smooth_field(g, rng, kmax, amp * lambda_bar) + lambda_bar, smooth_field(g, rng, kmax, amp),
                smooth_field(g, rng, kmax, amp));
}

State3 bump_state(const Grid& g, const Params& p, double amplitude, double width) {
  return symmetrize(make_initial_data(InitialKind::GaussianBump, amplitude, width, g, p), p.g);
}

IntegrationResult fixed_run(const State3& v0, const Params& p, const CoriolisProfile& cor, double t_end, double dt,
                            std::size_t sample_every) {
  StepControl c;
  c.t_end = t_end;
  c.dt_max = dt;
  c.fixed_step = true;
  c.sample_every = sample_every;
  return integrate(v0, c, p, cor);
}

bool bitwise_equal(const State3& a, const State3& b) {
  return a.lambda.values == b.lambda.values && a.u.values == b.u.values && a.v.values == b.v.values;
}

}  // namespace rsw::testing
