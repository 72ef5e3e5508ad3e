#include "rsw/lines_solver.hpp"

#include <algorithm>
#include <cmath>

#include "rsw/errors.hpp"

namespace rsw {

void StepControl::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidArgument("cfl must lie in (0, 1]");
  if (!(dt_max > 0.0)) throw InvalidArgument("dt_max must be positive");
  if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be non-negative");
  if (sample_every == 0) throw InvalidArgument("sample_every must be at least 1");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Completed: return "completed";
    case StopReason::NonFinite: return "non_finite";
    case StopReason::NonPositiveHeight: return "non_positive_height";
    case StopReason::MonitorStop: return "monitor_stop";
  }
  return "unknown";
}

double cfl_dt(const State3& v, const Grid& grid, double cfl, double dt_max) {
  double speed = 0.0;
  for (const Field& c : char_speeds(v)) speed = std::max(speed, sup_norm(c));
  if (!(speed > 0.0)) return dt_max;
  return std::min(dt_max, cfl * grid.dx() / speed);
}

State3 step_hyperbolic_rk4(const State3& v, double dt, const State3& e, const CoriolisProfile& cor,
                           RhsTerms terms) {
  const State3 k1 = hyperbolic_rhs(v, e, cor, terms);
  const State3 k2 = hyperbolic_rhs(v + (0.5 * dt) * k1, e, cor, terms);
  const State3 k3 = hyperbolic_rhs(v + (0.5 * dt) * k2, e, cor, terms);
  const State3 k4 = hyperbolic_rhs(v + dt * k3, e, cor, terms);
  State3 out = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!all_finite(out)) throw NonFinite("RK4 step produced non-finite values");
  return out;
}

State3 step_strang(const State3& v, double dt, const Params& p, const CoriolisProfile& cor, RhsTerms terms) {
  if (!(dt > 0.0)) throw InvalidArgument("step_strang needs dt > 0");
  const State3 e = rest_state(v.grid(), p.lambda_bar());
  if (p.eps == 0.0) return step_hyperbolic_rk4(v, dt, e, cor, terms);
  // E is constant, so W(t) acts on V - E and on V identically.
  const State3 half = heat_propagate(v, p.eps, 0.5 * dt);
  return heat_propagate(step_hyperbolic_rk4(half, dt, e, cor, terms), p.eps, 0.5 * dt);
}

State3 advance(const State3& v, double t0, double t1, const StepControl& ctrl, const Params& p,
               const CoriolisProfile& cor) {
  State3 cur = v;
  double t = t0;
  while (t < t1) {
    double dt = ctrl.fixed_step ? ctrl.dt_max : cfl_dt(cur, cur.grid(), ctrl.cfl, ctrl.dt_max);
    if (t + dt >= t1 || t1 - (t + dt) < 1e-12 * dt) dt = t1 - t;
    cur = step_strang(cur, dt, p, cor);
    t = (dt == t1 - t) ? t1 : t + dt;
  }
  return cur;
}

IntegrationResult integrate(const State3& v0, const StepControl& ctrl, const Params& p, const CoriolisProfile& cor,
                            const std::vector<Monitor>& monitors) {
  ctrl.validate();
  p.validate();
  IntegrationResult out;
  check_admissible(v0, p);

  auto sample = [&](double t, const State3& s) {
    DiagnosticsRecord r = make_record(t, s, p);
    bool keep_going = true;
    for (const auto& m : monitors) keep_going = m(r, s) && keep_going;
    out.samples.push_back(t, s);
    out.records.push_back(r);
    return keep_going;
  };

  State3 cur = v0;
  double t = 0.0;
  out.stop_time = 0.0;
  if (!sample(t, cur)) {
    out.stop_reason = StopReason::MonitorStop;
    return out;
  }
  // With fixed steps the step count is precomputed so sample times are exact multiples of dt.
  const std::size_t fixed_count =
      ctrl.fixed_step ? static_cast<std::size_t>(std::ceil(ctrl.t_end / ctrl.dt_max - 1e-9)) : 0;

  std::size_t step = 0;
  while (ctrl.fixed_step ? step < fixed_count : t < ctrl.t_end) {
    double dt;
    double t_next;
    if (ctrl.fixed_step) {
      dt = ctrl.t_end / static_cast<double>(fixed_count);
      t_next = static_cast<double>(step + 1) * dt;
    } else {
      dt = cfl_dt(cur, cur.grid(), ctrl.cfl, ctrl.dt_max);
      if (t + dt >= ctrl.t_end || ctrl.t_end - (t + dt) < 1e-12 * dt) dt = ctrl.t_end - t;
      t_next = (dt == ctrl.t_end - t) ? ctrl.t_end : t + dt;
    }
    try {
      cur = step_strang(cur, dt, p, cor);
      check_admissible(cur, p);
    } catch (const NonFinite&) {
      out.stop_reason = StopReason::NonFinite;
      out.stop_time = t;
      out.steps = step;
      return out;
    } catch (const NonPositiveHeight&) {
      out.stop_reason = StopReason::NonPositiveHeight;
      out.stop_time = t;
      out.steps = step;
      return out;
    }
    ++step;
    t = t_next;
    const bool last = ctrl.fixed_step ? step == fixed_count : t >= ctrl.t_end;
    if (step % ctrl.sample_every == 0 || last) {
      if (!sample(t, cur)) {
        out.stop_reason = StopReason::MonitorStop;
        out.stop_time = t;
        out.steps = step;
        return out;
      }
    }
  }
  out.stop_time = t;
  out.steps = step;
  return out;
}

}  // namespace rsw
