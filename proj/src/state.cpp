#include "rsw/state.hpp"

#include <cmath>

#include "rsw/errors.hpp"

namespace rsw {

State3::State3(Field l, Field uu, Field vv) : lambda(std::move(l)), u(std::move(uu)), v(std::move(vv)) {
  require_same_grid(lambda.grid, u.grid);
  require_same_grid(lambda.grid, v.grid);
}

Field& State3::component(int i) {
  switch (i) {
    case 0: return lambda;
    case 1: return u;
    case 2: return v;
  }
  throw InvalidArgument("State3 component index out of range");
}

const Field& State3::component(int i) const { return const_cast<State3*>(this)->component(i); }

State3& State3::operator+=(const State3& o) {
  lambda += o.lambda;
  u += o.u;
  v += o.v;
  return *this;
}

State3& State3::operator-=(const State3& o) {
  lambda -= o.lambda;
  u -= o.u;
  v -= o.v;
  return *this;
}

State3& State3::operator*=(double s) {
  lambda *= s;
  u *= s;
  v *= s;
  return *this;
}

State3 operator+(State3 a, const State3& b) { return a += b; }
State3 operator-(State3 a, const State3& b) { return a -= b; }
State3 operator*(double s, State3 a) { return a *= s; }

State3 rest_state(const Grid& g, double lambda_bar) { return State3(Field(g, lambda_bar), Field(g), Field(g)); }

PhysState::PhysState(Field hh, Field uu, Field vv) : h(std::move(hh)), u(std::move(uu)), v(std::move(vv)) {
  require_same_grid(h.grid, u.grid);
  require_same_grid(h.grid, v.grid);
}

void TrajectoryMesh::push_back(double t, State3 s) {
  if (!times.empty()) {
    if (!(t > times.back())) throw InvalidArgument("trajectory times must be strictly increasing");
    require_same_grid(states.front().grid(), s.grid());
  }
  times.push_back(t);
  states.push_back(std::move(s));
}

double inner(const State3& a, const State3& b) {
  return inner(a.lambda, b.lambda) + inner(a.u, b.u) + inner(a.v, b.v);
}

double l2_norm(const State3& a) { return std::sqrt(inner(a, a)); }

double sobolev_norm(const State3& a, int m) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double c = sobolev_norm(a.component(i), m);
    sum += c * c;
  }
  return std::sqrt(sum);
}

Field pointwise_magnitude(const State3& a) {
  Field r(a.grid());
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = std::sqrt(a.lambda[i] * a.lambda[i] + a.u[i] * a.u[i] + a.v[i] * a.v[i]);
  }
  return r;
}

State3 derivative(const State3& a, int order) {
  return State3(derivative(a.lambda, order), derivative(a.u, order), derivative(a.v, order));
}

State3 heat_propagate(const State3& a, double eps, double t) {
  return State3(heat_propagate(a.lambda, eps, t), heat_propagate(a.u, eps, t), heat_propagate(a.v, eps, t));
}

bool all_finite(const State3& a) {
  for (int c = 0; c < 3; ++c) {
    for (double x : a.component(c).values) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

double n_norm(const State3& v, const State3& e) {
  require_same_grid(v.grid(), e.grid());
  const State3 d = v - e;
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Spectrum s = to_spectrum(d.component(i));
    const double l2 = sobolev_norm(s, 0);
    const Spectrum dxx = derivative(s, 2);
    const double curv = sobolev_norm(dxx, 0);
    sum += l2 * l2 + curv * curv;
  }
  return std::sqrt(sum);
}

double h2_distance(const State3& v, const State3& e) {
  require_same_grid(v.grid(), e.grid());
  return sobolev_norm(v - e, 2);
}

}  // namespace rsw
