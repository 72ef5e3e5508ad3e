#pragma once

// Method-of-lines integrator for the regularized system: Strang splitting of
// the exact heat flow (half steps) around an explicit RK4 step of the
// hyperbolic part. For eps = 0 it is plain RK4.

#include <functional>
#include <string>
#include <vector>

#include "rsw/diagnostics.hpp"
#include "rsw/model.hpp"
#include "rsw/state.hpp"

namespace rsw {

struct StepControl {
  double cfl = 0.4;
  double dt_max = 1e-2;
  double t_end = 1.0;
  /// Record a sample every this many steps; the final state is always sampled.
  std::size_t sample_every = 1;
  /// Take dt = dt_max on every step (the last one is shortened to hit t_end).
  bool fixed_step = false;

  void validate() const;
};

enum class StopReason { Completed, NonFinite, NonPositiveHeight, MonitorStop };
std::string to_string(StopReason r);

/// Called on every sample; returning false stops the run with MonitorStop.
using Monitor = std::function<bool(const DiagnosticsRecord&, const State3&)>;

struct IntegrationResult {
  TrajectoryMesh samples;
  std::vector<DiagnosticsRecord> records;
  StopReason stop_reason = StopReason::Completed;
  double stop_time = 0.0;
  std::size_t steps = 0;
  bool completed() const { return stop_reason == StopReason::Completed; }
};

/// cfl dx / max|char speed|, capped at dt_max.
double cfl_dt(const State3& v, const Grid& grid, double cfl, double dt_max);

State3 step_hyperbolic_rk4(const State3& v, double dt, const State3& e, const CoriolisProfile& cor,
                           RhsTerms terms = {});
State3 step_strang(const State3& v, double dt, const Params& p, const CoriolisProfile& cor, RhsTerms terms = {});

/// Advances from t0 to t1 with steps no longer than cfl_dt; lands exactly on t1.
State3 advance(const State3& v, double t0, double t1, const StepControl& ctrl, const Params& p,
               const CoriolisProfile& cor);

IntegrationResult integrate(const State3& v0, const StepControl& ctrl, const Params& p, const CoriolisProfile& cor,
                            const std::vector<Monitor>& monitors = {});

}  // namespace rsw
