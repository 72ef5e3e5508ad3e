#include "rsw/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "rsw/errors.hpp"

namespace rsw {

namespace {

// FFTW planning is not thread-safe, execution with new arrays is. Plans are
// created once per size and kept for the lifetime of the process.
struct PlanPair {
  fftw_plan forward;
  fftw_plan backward;
};

const PlanPair& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> a(n), b(n);
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p{fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, flags),
             fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_BACKWARD, flags)};
  return cache.emplace(n, p).first->second;
}

// Multiplier applied to mode j by the order-m derivative.
std::complex<double> derivative_symbol(const Grid& g, std::size_t j, int order) {
  if (order % 2 == 1 && j == g.nyquist_index()) return 0.0;
  const std::complex<double> ik(0.0, g.wavenumber(j));
  std::complex<double> r = 1.0;
  for (int i = 0; i < order; ++i) r *= ik;
  return r;
}

}  // namespace

Grid::Grid(std::size_t n, double length) : n_(n), length_(length) {
  if (n < 8 || n % 2 != 0) throw InvalidArgument("grid size must be even and >= 8");
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("grid length must be positive");
}

long Grid::mode(std::size_t j) const {
  const auto sj = static_cast<long>(j);
  return j <= n_ / 2 ? sj : sj - static_cast<long>(n_);
}

double Grid::wavenumber(std::size_t j) const {
  return 2.0 * std::numbers::pi * static_cast<double>(mode(j)) / length_;
}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.n()) throw InvalidArgument("field size does not match grid");
}

Field Field::from_function(const Grid& g, const std::function<double(double)>& fn) {
  Field f(g);
  for (std::size_t i = 0; i < g.n(); ++i) f.values[i] = fn(g.x(i));
  return f;
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= other.values[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }
Field operator-(Field a) { return a *= -1.0; }

Field operator+(Field a, double c) {
  for (double& v : a.values) v += c;
  return a;
}

Field operator-(Field a, double c) { return std::move(a) + (-c); }

Field pointwise_product(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid);
  Field r(a.grid);
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] = a.values[i] * b.values[i];
  return r;
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw GridMismatch();
}

Spectrum to_spectrum(const Field& f) {
  const std::size_t n = f.grid.n();
  std::vector<std::complex<double>> in(f.values.begin(), f.values.end());
  Spectrum s(f.grid);
  fftw_execute_dft(plans_for(n).forward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(s.coeffs.data()));
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& c : s.coeffs) c *= scale;
  return s;
}

Field from_spectrum(const Spectrum& s) {
  const std::size_t n = s.grid.n();
  std::vector<std::complex<double>> in = s.coeffs;
  std::vector<std::complex<double>> out(n);
  fftw_execute_dft(plans_for(n).backward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  Field f(s.grid);
  for (std::size_t i = 0; i < n; ++i) f.values[i] = out[i].real();
  return f;
}

double conjugate_asymmetry(const Spectrum& s) {
  const std::size_t n = s.grid.n();
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t mirror = (n - j) % n;
    worst = std::max(worst, std::abs(s.coeffs[j] - std::conj(s.coeffs[mirror])));
    scale = std::max(scale, std::abs(s.coeffs[j]));
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

Spectrum derivative(const Spectrum& s, int order) {
  if (order < 0 || order > 3) throw InvalidArgument("derivative order must be in 0..3");
  Spectrum r = s;
  if (order == 0) return r;
  for (std::size_t j = 0; j < r.coeffs.size(); ++j) r.coeffs[j] *= derivative_symbol(s.grid, j, order);
  return r;
}

Field derivative(const Field& f, int order) { return from_spectrum(derivative(to_spectrum(f), order)); }

Spectrum heat_propagate(const Spectrum& s, double eps, double t) {
  if (eps < 0.0 || t < 0.0) throw InvalidArgument("heat_propagate needs eps >= 0 and t >= 0");
  Spectrum r = s;
  if (eps == 0.0 || t == 0.0) return r;
  for (std::size_t j = 0; j < r.coeffs.size(); ++j) {
    const double k = s.grid.wavenumber(j);
    r.coeffs[j] *= std::exp(-eps * t * k * k);
  }
  return r;
}

Field heat_propagate(const Field& f, double eps, double t) {
  if (eps < 0.0 || t < 0.0) throw InvalidArgument("heat_propagate needs eps >= 0 and t >= 0");
  if (eps == 0.0 || t == 0.0) return f;
  return from_spectrum(heat_propagate(to_spectrum(f), eps, t));
}

Spectrum dealias(const Spectrum& s) {
  Spectrum r = s;
  const long n = static_cast<long>(s.grid.n());
  for (std::size_t j = 0; j < r.coeffs.size(); ++j) {
    if (3 * std::labs(s.grid.mode(j)) > n) r.coeffs[j] = 0.0;
  }
  return r;
}

Field dealias(const Field& f) { return from_spectrum(dealias(to_spectrum(f))); }

Field dealiased_product(const Field& a, const Field& b) {
  return dealias(pointwise_product(dealias(a), dealias(b)));
}

double integral(const Field& f) {
  double sum = 0.0;
  for (double v : f.values) sum += v;
  return sum * f.grid.dx();
}

double inner(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a.values[i] * b.values[i];
  return sum * a.grid.dx();
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

double sup_norm(const Field& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double min_value(const Field& f) { return *std::min_element(f.values.begin(), f.values.end()); }
double max_value(const Field& f) { return *std::max_element(f.values.begin(), f.values.end()); }

double sobolev_norm(const Spectrum& s, int m) {
  if (m < 0 || m > 3) throw InvalidArgument("Sobolev order must be in 0..3");
  double sum = 0.0;
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
    double weight = 0.0;
    for (int order = 0; order <= m; ++order) weight += std::norm(derivative_symbol(s.grid, j, order));
    sum += weight * std::norm(s.coeffs[j]);
  }
  return std::sqrt(sum * s.grid.length());
}

double sobolev_norm(const Field& f, int m) { return sobolev_norm(to_spectrum(f), m); }

double spectral_energy(const Spectrum& s) { return sobolev_norm(s, 0) * sobolev_norm(s, 0); }

}  // namespace rsw
