#pragma once

// Mild (Duhamel) formulation of the regularized system,
//
//   V(t) - E = W(t)(V0 - E) - int_0^t W(t - s) [S(V) V_x + F x (V - E)](s) ds,
//
// solved by Picard iteration on short windows and chained by continuation.
// W is the heat semigroup of eps d_xx, applied exactly in Fourier space; the
// s-integral uses the composite trapezoid rule on the window nodes.

#include <optional>
#include <vector>

#include "rsw/model.hpp"
#include "rsw/state.hpp"

namespace rsw {

struct FixedPointReport {
  std::size_t iterations = 0;
  /// sup over nodes of n_norm(V^{k+1} - V^k), one entry per iteration.
  std::vector<double> distances;
  /// distances[k] / distances[k-1].
  std::vector<double> contraction_ratios;
  bool converged = false;
};

struct WindowOptions {
  /// Number of intervals of the window mesh (M + 1 nodes).
  std::size_t intervals = 32;
  double tol = 1e-10;
  std::size_t max_iter = 60;
  RhsTerms terms{};
};

/// Uniform window mesh on [0, T] holding V0 at every node.
TrajectoryMesh constant_mesh(const State3& v0, double duration, std::size_t intervals);

/// One application of the Duhamel map. Node 0 of the output is V0.
TrajectoryMesh duhamel_map(const TrajectoryMesh& traj, const State3& v0, const Params& p, const CoriolisProfile& cor,
                           RhsTerms terms = {});

struct WindowResult {
  TrajectoryMesh mesh;
  FixedPointReport report;
};

/// Picard iteration from the constant-in-time guess. Throws NotContracting when
/// the ratio exceeds 1 on three consecutive iterations or iterates become non-finite.
WindowResult solve_window(const State3& v0, double duration, const Params& p, const CoriolisProfile& cor,
                          const WindowOptions& opts = {});

enum class ContinuationStatus { Completed, BlowupSuspected };

struct ContinuationOptions {
  /// Window length C_w eps min(1, N^-2).
  double window_constant = 0.5;
  WindowOptions window{};
  /// N(t) above this ends the run with BlowupSuspected.
  double n_ceiling = 1e6;
  /// Give up halving below this window length.
  double min_window = 1e-10;
};

struct ContinuationResult {
  TrajectoryMesh mesh;
  ContinuationStatus status = ContinuationStatus::Completed;
  std::vector<double> window_lengths;
  std::vector<FixedPointReport> reports;
  std::size_t halvings = 0;
};

/// Window length proposed for the current state (before any halving).
double window_length(const State3& v, const Params& p, double window_constant);

/// Chains windows over [0, t_total]. Requires eps > 0.
ContinuationResult continuation(const State3& v0, double t_total, const Params& p, const CoriolisProfile& cor,
                                const ContinuationOptions& opts = {});

}  // namespace rsw
