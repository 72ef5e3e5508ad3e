#pragma once

#include <array>
#include <vector>

#include "rsw/grid.hpp"

namespace rsw {

/// Symmetrized unknown V = (lambda, u, v), lambda = 2 sqrt(g h).
struct State3 {
  Field lambda;
  Field u;
  Field v;

  explicit State3(const Grid& g) : lambda(g), u(g), v(g) {}
  State3(Field l, Field uu, Field vv);

  const Grid& grid() const { return lambda.grid; }
  Field& component(int i);
  const Field& component(int i) const;

  State3& operator+=(const State3& o);
  State3& operator-=(const State3& o);
  State3& operator*=(double s);
};

State3 operator+(State3 a, const State3& b);
State3 operator-(State3 a, const State3& b);
State3 operator*(double s, State3 a);

/// The rest state E = (lambda_bar, 0, 0).
State3 rest_state(const Grid& g, double lambda_bar);

/// Physical unknown (h, u, v).
struct PhysState {
  Field h;
  Field u;
  Field v;

  explicit PhysState(const Grid& g) : h(g), u(g), v(g) {}
  PhysState(Field hh, Field uu, Field vv);
  const Grid& grid() const { return h.grid; }
};

/// Uniform or non-uniform time series of symmetrized states.
struct TrajectoryMesh {
  std::vector<double> times;
  std::vector<State3> states;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  void push_back(double t, State3 s);
};

struct PhysTrajectory {
  std::vector<double> times;
  std::vector<PhysState> states;
};

/// Discrete L2 inner product summed over the three components.
double inner(const State3& a, const State3& b);
double l2_norm(const State3& a);
double sobolev_norm(const State3& a, int m);
/// Euclidean norm of the vector at each point.
Field pointwise_magnitude(const State3& a);
State3 derivative(const State3& a, int order);
State3 heat_propagate(const State3& a, double eps, double t);
bool all_finite(const State3& a);

/// N = sqrt(||V - E||^2 + ||V_xx||^2) in L2.
double n_norm(const State3& v, const State3& e);
/// Full H2 distance ||V - E||_{H^2}.
double h2_distance(const State3& v, const State3& e);

}  // namespace rsw
