#pragma once

// Rotating shallow water in one direction, physical form
//   h_t + (hu)_x = 0,  (hu)_t + (hu^2 + g h^2/2)_x = f h v,  (hv)_t + (huv)_x = -f h u,
// and the symmetrized form in V = (lambda, u, v), lambda = 2 sqrt(g h):
//   (V - E)_t + S(V) V_x + F x (V - E) = eps (V - E)_xx,
// with S(V) = [[u, lambda/2, 0], [lambda/2, u, 0], [0, 0, u]] and F = (f, 0, 0).

#include <array>

#include "rsw/grid.hpp"
#include "rsw/state.hpp"

namespace rsw {

struct Params {
  double g = 9.81;
  double h_bar = 1.0;
  double eps = 0.0;

  double lambda_bar() const;
  /// Throws InvalidArgument unless g > 0, h_bar > 0, eps >= 0.
  void validate() const;
};

/// Smallest admissible lambda relative to lambda_bar.
inline constexpr double kAdmissibleLambdaFraction = 1e-8;

struct CoriolisProfile {
  Field f;
  Field f_x;
  Field f_xx;
  double sup_f = 0.0;
  double sup_fx = 0.0;
  double sup_fxx = 0.0;

  /// f = f0 everywhere.
  static CoriolisProfile constant(const Grid& g, double f0);
  /// f = f0 + f1 sin(2 pi x / L), the periodic stand-in for a beta-plane.
  static CoriolisProfile sine(const Grid& g, double f0, double f1);
  /// Derivatives taken spectrally.
  static CoriolisProfile from_field(Field f);

 private:
  CoriolisProfile(Field f, Field fx, Field fxx);
};

/// Which parts of the hyperbolic operator are active; both on for the real model.
struct RhsTerms {
  bool transport = true;
  bool coriolis = true;
};

State3 symmetrize(const PhysState& p, double g);
PhysState desymmetrize(const State3& v, double g);

/// Throws NonPositiveHeight when min lambda <= kAdmissibleLambdaFraction * lambda_bar.
void check_admissible(const State3& v, const Params& p);

/// S(V) W with 2/3-rule dealiased products.
State3 apply_S(const State3& v, const State3& w);

/// Eigenvalues of S(V): (u, u + lambda/2, u - lambda/2).
std::array<Field, 3> char_speeds(const State3& v);

/// Operator norm of the symmetric matrix S_x at one point.
double s_x_opnorm(double u_x, double lambda_x);
/// Pointwise ||S_x(x)||; its sup over x is |||S_x|||.
Field s_x_opnorm(const State3& v);

/// F x (V - E) = (0, -f v, f u), pointwise.
State3 coriolis_term(const State3& v, const State3& e, const CoriolisProfile& cor);

/// -S(V) V_x - F x (V - E), spectral derivatives and dealiased products.
State3 hyperbolic_rhs(const State3& v, const State3& e, const CoriolisProfile& cor, RhsTerms terms = {});

struct ConservativeResidual {
  double t;
  /// Residuals of the mass, x-momentum and y-momentum equations.
  std::array<Field, 3> fields;
  std::array<double, 3> l2;
};

/// Residual of the conservative system on a uniformly spaced trajectory,
/// central differences in time and spectral derivatives in space.
std::vector<ConservativeResidual> conservative_residual(const PhysTrajectory& traj, const CoriolisProfile& cor,
                                                        double g);

}  // namespace rsw
