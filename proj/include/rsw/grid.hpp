#pragma once

// Periodic grid, Fourier transforms, spectral differentiation, Sobolev norms
// and the exact heat-semigroup propagator.
//
// Spectral coefficients are stored in FFT order: index j holds the mode with
// signed index s_j = j for j <= n/2 and s_j = j - n otherwise, wavenumber
// k_j = 2 pi s_j / L. The normalization is c_j = (1/n) sum_m f_m exp(-i k_j x_m),
// so a constant field c has c_0 = c.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rsw {

class Grid {
 public:
  /// n must be even and >= 8, length > 0.
  Grid(std::size_t n, double length);

  std::size_t n() const { return n_; }
  double length() const { return length_; }
  double dx() const { return length_ / static_cast<double>(n_); }
  double x(std::size_t i) const { return dx() * static_cast<double>(i); }

  /// Signed mode index of FFT slot j, in {-n/2+1, ..., n/2}.
  long mode(std::size_t j) const;
  double wavenumber(std::size_t j) const;
  std::size_t nyquist_index() const { return n_ / 2; }

  bool operator==(const Grid& other) const = default;

 private:
  std::size_t n_;
  double length_;
};

struct Field {
  Grid grid;
  std::vector<double> values;

  explicit Field(const Grid& g, double value = 0.0) : grid(g), values(g.n(), value) {}
  Field(const Grid& g, std::vector<double> v);

  static Field from_function(const Grid& g, const std::function<double(double)>& fn);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
Field operator*(Field a, double s);
Field operator-(Field a);
Field operator+(Field a, double c);
Field operator-(Field a, double c);

/// Pointwise product without dealiasing.
Field pointwise_product(const Field& a, const Field& b);

struct Spectrum {
  Grid grid;
  std::vector<std::complex<double>> coeffs;

  explicit Spectrum(const Grid& g) : grid(g), coeffs(g.n()) {}
};

void require_same_grid(const Grid& a, const Grid& b);

Spectrum to_spectrum(const Field& f);
Field from_spectrum(const Spectrum& s);

/// Largest |c_j - conj(c_{-j})| relative to the largest coefficient magnitude.
double conjugate_asymmetry(const Spectrum& s);

/// Spectral multiplier (ik)^order, order in {1,2,3}; the Nyquist mode is zeroed for odd orders.
Spectrum derivative(const Spectrum& s, int order);
Field derivative(const Field& f, int order);

/// Exact heat flow W_t = eps W_xx over duration t: c_j -> exp(-eps t k_j^2) c_j.
Spectrum heat_propagate(const Spectrum& s, double eps, double t);
Field heat_propagate(const Field& f, double eps, double t);

/// 2/3-rule truncation: modes with |s_j| > n/3 are set to zero.
Spectrum dealias(const Spectrum& s);
Field dealias(const Field& f);
/// Product of the truncated factors, truncated again.
Field dealiased_product(const Field& a, const Field& b);

double integral(const Field& f);
/// Discrete L2 inner product sum(a b) dx.
double inner(const Field& a, const Field& b);
double l2_norm(const Field& f);
double sup_norm(const Field& f);
double min_value(const Field& f);
double max_value(const Field& f);

/// sqrt(sum_{j<=m} ||d^j f||^2), m in {0,1,2,3}, evaluated in spectral space.
double sobolev_norm(const Field& f, int m);
double sobolev_norm(const Spectrum& s, int m);

/// L * sum |c_j|^2, equal to sum(f^2) dx by Parseval.
double spectral_energy(const Spectrum& s);

}  // namespace rsw
