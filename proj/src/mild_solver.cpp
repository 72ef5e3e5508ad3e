#include "rsw/mild_solver.hpp"

#include <algorithm>
#include <cmath>

#include "rsw/errors.hpp"

namespace rsw {

namespace {

// Trapezoid weights for integrating over [times[0], times[i]] with the nodes 0..i.
std::vector<double> trapezoid_weights(const std::vector<double>& times, std::size_t i) {
  std::vector<double> w(i + 1, 0.0);
  for (std::size_t j = 0; j < i; ++j) {
    const double h = times[j + 1] - times[j];
    w[j] += 0.5 * h;
    w[j + 1] += 0.5 * h;
  }
  return w;
}

}  // namespace

TrajectoryMesh constant_mesh(const State3& v0, double duration, std::size_t intervals) {
  if (!(duration > 0.0)) throw InvalidArgument("window duration must be positive");
  if (intervals == 0) throw InvalidArgument("window mesh needs at least one interval");
  TrajectoryMesh mesh;
  for (std::size_t i = 0; i <= intervals; ++i) {
    mesh.push_back(duration * static_cast<double>(i) / static_cast<double>(intervals), v0);
  }
  return mesh;
}

TrajectoryMesh duhamel_map(const TrajectoryMesh& traj, const State3& v0, const Params& p, const CoriolisProfile& cor,
                           RhsTerms terms) {
  if (traj.empty()) throw InvalidArgument("duhamel_map needs a non-empty trajectory");
  const Grid& grid = v0.grid();
  require_same_grid(grid, traj.states.front().grid());
  const std::size_t n = grid.n();
  const std::size_t m = traj.size();
  const State3 e = rest_state(grid, p.lambda_bar());

  std::vector<double> k2(n);
  for (std::size_t j = 0; j < n; ++j) k2[j] = grid.wavenumber(j) * grid.wavenumber(j);

  // Nonlinearity S(V) V_x + F x (V - E) = -hyperbolic_rhs at every node, in Fourier space.
  std::vector<std::array<Spectrum, 3>> forcing;
  forcing.reserve(m);
  for (const State3& s : traj.states) {
    const State3 rhs = hyperbolic_rhs(s, e, cor, terms);
    forcing.push_back({to_spectrum(rhs.lambda), to_spectrum(rhs.u), to_spectrum(rhs.v)});
  }
  const State3 d0 = v0 - e;
  const std::array<Spectrum, 3> initial{to_spectrum(d0.lambda), to_spectrum(d0.u), to_spectrum(d0.v)};

  TrajectoryMesh out;
  out.push_back(traj.times[0], v0);
  for (std::size_t i = 1; i < m; ++i) {
    const double t = traj.times[i] - traj.times[0];
    const std::vector<double> w = trapezoid_weights(traj.times, i);
    State3 next = e;
    for (int c = 0; c < 3; ++c) {
      Spectrum acc(grid);
      for (std::size_t j = 0; j < n; ++j) acc.coeffs[j] = std::exp(-p.eps * t * k2[j]) * initial[c].coeffs[j];
      for (std::size_t q = 0; q <= i; ++q) {
        const double lag = traj.times[i] - traj.times[q];
        // forcing holds -N, so adding it subtracts the Duhamel integral.
        for (std::size_t j = 0; j < n; ++j) {
          acc.coeffs[j] += w[q] * std::exp(-p.eps * lag * k2[j]) * forcing[q][c].coeffs[j];
        }
      }
      next.component(c) += from_spectrum(acc);
    }
    out.push_back(traj.times[i], std::move(next));
  }
  return out;
}

WindowResult solve_window(const State3& v0, double duration, const Params& p, const CoriolisProfile& cor,
                          const WindowOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidArgument("solve_window needs tol > 0");
  WindowResult result{constant_mesh(v0, duration, opts.intervals), {}};
  FixedPointReport& rep = result.report;
  int growing = 0;
  for (std::size_t k = 0; k < opts.max_iter; ++k) {
    TrajectoryMesh next = duhamel_map(result.mesh, v0, p, cor, opts.terms);
    double dist = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (!all_finite(next.states[i])) {
        finite = false;
        break;
      }
      dist = std::max(dist, n_norm(next.states[i], result.mesh.states[i]));
    }
    if (!finite || !std::isfinite(dist)) throw NotContracting("fixed-point iterates became non-finite");
    rep.iterations = k + 1;
    rep.distances.push_back(dist);
    if (rep.distances.size() > 1) {
      const double prev = rep.distances[rep.distances.size() - 2];
      const double ratio = prev > 0.0 ? dist / prev : 0.0;
      rep.contraction_ratios.push_back(ratio);
      growing = ratio > 1.0 ? growing + 1 : 0;
    }
    result.mesh = std::move(next);
    if (dist <= opts.tol) {
      rep.converged = true;
      return result;
    }
    if (growing >= 3) throw NotContracting("fixed-point distance grew on three consecutive iterations");
  }
  return result;
}

double window_length(const State3& v, const Params& p, double window_constant) {
  const double nn = n_norm(v, rest_state(v.grid(), p.lambda_bar()));
  const double factor = nn > 1.0 ? 1.0 / (nn * nn) : 1.0;
  return window_constant * p.eps * factor;
}

ContinuationResult continuation(const State3& v0, double t_total, const Params& p, const CoriolisProfile& cor,
                                const ContinuationOptions& opts) {
  p.validate();
  if (!(p.eps > 0.0)) throw InvalidArgument("the mild solver needs eps > 0");
  if (!(t_total > 0.0)) throw InvalidArgument("continuation needs a positive horizon");
  check_admissible(v0, p);
  const State3 e = rest_state(v0.grid(), p.lambda_bar());

  ContinuationResult out;
  out.mesh.push_back(0.0, v0);
  State3 cur = v0;
  double t = 0.0;
  while (t < t_total) {
    double length = std::min(window_length(cur, p, opts.window_constant), t_total - t);
    // Absorb a remainder left over from rounding in the accumulated time.
    if (t_total - t - length <= 1e-9 * length) length = t_total - t;
    std::optional<WindowResult> win;
    while (!win) {
      if (length < opts.min_window) throw NotContracting("window length fell below the minimum");
      try {
        WindowResult attempt = solve_window(cur, length, p, cor, opts.window);
        if (attempt.report.converged) {
          win = std::move(attempt);
          break;
        }
      } catch (const NotContracting&) {
      }
      length *= 0.5;
      ++out.halvings;
    }
    const bool last = t_total - t - length <= 1e-9 * length;
    for (std::size_t i = 1; i < win->mesh.size(); ++i) {
      const State3& s = win->mesh.states[i];
      check_admissible(s, p);
      const double node_t = (last && i + 1 == win->mesh.size()) ? t_total : t + win->mesh.times[i];
      out.mesh.push_back(node_t, s);
      if (n_norm(s, e) > opts.n_ceiling) {
        out.status = ContinuationStatus::BlowupSuspected;
        out.window_lengths.push_back(length);
        out.reports.push_back(std::move(win->report));
        return out;
      }
    }
    out.window_lengths.push_back(length);
    out.reports.push_back(std::move(win->report));
    cur = win->mesh.states.back();
    t = last ? t_total : t + length;
  }
  return out;
}

}  // namespace rsw
