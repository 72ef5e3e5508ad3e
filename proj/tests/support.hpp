#pragma once

// Shared fixtures for the test binaries.

#include <cstdint>
#include <random>

#include "rsw/experiments.hpp"

namespace rsw::testing {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
/// Independent normal samples at every grid point.
Field white_noise(const Grid& g, Rng& rng);
/// Trigonometric polynomial with modes 1..kmax, coefficient size amp / k.
Field smooth_field(const Grid& g, Rng& rng, int kmax, double amp);
/// lambda = lambda_bar (1 + smooth), u and v smooth of size amp.
State3 smooth_state(const Grid& g, Rng& rng, double lambda_bar, int kmax, double amp);

/// Periodic bump data of amplitude A, symmetrized.
State3 bump_state(const Grid& g, const Params& p, double amplitude, double width = 2.0);

/// Fixed-step integration to t_end.
IntegrationResult fixed_run(const State3& v0, const Params& p, const CoriolisProfile& cor, double t_end, double dt,
                            std::size_t sample_every = 1);

bool bitwise_equal(const State3& a, const State3& b);

}  // namespace rsw::testing
