#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradflow/errors.hpp"

namespace gradflow {

/// Uniform tensor-product grid on the periodic box [0, L_0) x ... x [0, L_{d-1}).
///
/// Real-space samples are stored row-major with the last dimension fastest.
/// Spectral storage uses the real-to-complex half layout: full extent in every
/// dimension except the last, which keeps n/2 + 1 modes.
class PeriodicGrid {
 public:
  static constexpr int kMaxDims = 3;

  PeriodicGrid() = default;

  PeriodicGrid(std::span<const int> n, std::span<const double> length) {
    if (n.empty() || n.size() > kMaxDims || n.size() != length.size()) {
      throw std::invalid_argument("PeriodicGrid: need 1..3 dimensions with one length each");
    }
    dims_ = static_cast<int>(n.size());
    for (int d = 0; d < dims_; ++d) {
      if (n[d] < 1) throw std::invalid_argument("PeriodicGrid: point count must be positive");
      if (!(length[d] > 0.0) || !std::isfinite(length[d])) {
        throw std::invalid_argument("PeriodicGrid: box length must be positive and finite");
      }
      n_[d] = n[d];
      length_[d] = length[d];
    }
  }

  PeriodicGrid(std::initializer_list<int> n, std::initializer_list<double> length)
      : PeriodicGrid(std::span<const int>(n.begin(), n.size()),
                     std::span<const double>(length.begin(), length.size())) {}

  /// Square/cubic grid with n points per side on [0, length)^dims.
  static PeriodicGrid cube(int dims, int n, double length = 2.0 * std::numbers::pi) {
    std::vector<int> ns(static_cast<std::size_t>(dims), n);
    std::vector<double> ls(static_cast<std::size_t>(dims), length);
    return PeriodicGrid(ns, ls);
  }

  int dims() const noexcept { return dims_; }
  int n(int d) const noexcept { return n_[d]; }
  double length(int d) const noexcept { return length_[d]; }
  double spacing(int d) const noexcept { return length_[d] / n_[d]; }

  std::size_t size() const noexcept {
    std::size_t s = 1;
    for (int d = 0; d < dims_; ++d) s *= static_cast<std::size_t>(n_[d]);
    return s;
  }

  /// Extent of the half-spectrum along dimension d.
  int spectral_extent(int d) const noexcept { return d == dims_ - 1 ? n_[d] / 2 + 1 : n_[d]; }

  std::size_t spectral_size() const noexcept {
    std::size_t s = 1;
    for (int d = 0; d < dims_; ++d) s *= static_cast<std::size_t>(spectral_extent(d));
    return s;
  }

  double cell_volume() const noexcept {
    double v = 1.0;
    for (int d = 0; d < dims_; ++d) v *= spacing(d);
    return v;
  }

  double volume() const noexcept {
    double v = 1.0;
    for (int d = 0; d < dims_; ++d) v *= length_[d];
    return v;
  }

  /// Signed alias of index j in (-n/2, n/2].
  int signed_mode(int d, int j) const noexcept { return j <= n_[d] / 2 ? j : j - n_[d]; }

  bool is_nyquist(int d, int j) const noexcept { return n_[d] % 2 == 0 && j == n_[d] / 2; }

  double wavenumber(int d, int j) const noexcept {
    return 2.0 * std::numbers::pi / length_[d] * signed_mode(d, j);
  }

  /// Wavenumber used for odd (first-order) derivatives: zero at the Nyquist index
  /// so that derivatives of real fields stay real.
  double odd_wavenumber(int d, int j) const noexcept {
    return is_nyquist(d, j) ? 0.0 : wavenumber(d, j);
  }

  double coordinate(int d, int i) const noexcept { return i * spacing(d); }

  /// Multi-index of a flat real-space index.
  std::array<int, kMaxDims> point_index(std::size_t flat) const noexcept {
    std::array<int, kMaxDims> idx{0, 0, 0};
    for (int d = dims_ - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(flat % static_cast<std::size_t>(n_[d]));
      flat /= static_cast<std::size_t>(n_[d]);
    }
    return idx;
  }

  /// Multi-index of a flat half-spectrum index.
  std::array<int, kMaxDims> mode_index(std::size_t flat) const noexcept {
    std::array<int, kMaxDims> idx{0, 0, 0};
    for (int d = dims_ - 1; d >= 0; --d) {
      const auto ext = static_cast<std::size_t>(spectral_extent(d));
      idx[d] = static_cast<int>(flat % ext);
      flat /= ext;
    }
    return idx;
  }

  /// Physical coordinates of a flat real-space index.
  std::array<double, kMaxDims> point(std::size_t flat) const noexcept {
    const auto idx = point_index(flat);
    std::array<double, kMaxDims> x{0.0, 0.0, 0.0};
    for (int d = 0; d < dims_; ++d) x[d] = coordinate(d, idx[d]);
    return x;
  }

  /// Parseval weight of a half-spectrum mode: modes whose conjugate partner is
  /// not stored count twice.
  double parseval_weight(std::size_t flat) const noexcept {
    const int j = mode_index(flat)[dims_ - 1];
    const int nl = n_[dims_ - 1];
    if (j == 0 || (nl % 2 == 0 && j == nl / 2)) return 1.0;
    return 2.0;
  }

  friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) noexcept {
    if (a.dims_ != b.dims_) return false;
    for (int d = 0; d < a.dims_; ++d) {
      if (a.n_[d] != b.n_[d] || a.length_[d] != b.length_[d]) return false;
    }
    return true;
  }

  std::string describe() const {
    std::string s;
    for (int d = 0; d < dims_; ++d) {
      if (d) s += "x";
      s += std::to_string(n_[d]);
    }
    return s;
  }

 private:
  int dims_ = 1;
  std::array<int, kMaxDims> n_{1, 1, 1};
  std::array<double, kMaxDims> length_{1.0, 1.0, 1.0};
};

inline void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* where) {
  if (!(a == b)) throw GridMismatch(std::string(where) + ": operands live on different grids");
}

/// Real samples of one scalar unknown.
class Field {
 public:
  Field() = default;
  explicit Field(const PeriodicGrid& grid, double value = 0.0)
      : grid_(grid), values_(grid.size(), value) {}
  Field(const PeriodicGrid& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw GridMismatch("Field: value count " + std::to_string(values_.size()) +
                         " does not match grid size " + std::to_string(grid_.size()));
    }
  }

  /// Samples fn(x) at every grid point; fn receives the coordinate array.
  template <class Fn>
  static Field from_function(const PeriodicGrid& grid, Fn&& fn) {
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f.values_[i] = fn(grid.point(i));
    return f;
  }

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  bool all_finite() const noexcept {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  double mean() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return values_.empty() ? 0.0 : s / static_cast<double>(values_.size());
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  Field& operator+=(const Field& o) {
    require_same_grid(grid_, o.grid_, "Field +=");
    for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_grid(grid_, o.grid_, "Field -=");
    for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  Field& operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
  }
  /// this += alpha * x
  Field& axpy(double alpha, const Field& x) {
    require_same_grid(grid_, x.grid_, "Field axpy");
    for (std::size_t i = 0; i < size(); ++i) values_[i] += alpha * x.values_[i];
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator*(Field a, double s) { return a *= s; }

  friend bool operator==(const Field& a, const Field& b) noexcept {
    return a.grid_ == b.grid_ && a.values_ == b.values_;
  }

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

/// Linear combination sum_i w_i * f_i of fields on one grid.
inline Field combine(std::span<const double> weights, std::span<const Field* const> fields) {
  Field out(fields.front()->grid());
  for (std::size_t j = 0; j < fields.size(); ++j) {
    if (weights[j] != 0.0) out.axpy(weights[j], *fields[j]);
  }
  return out;
}

/// Fourier coefficients of a Field in the half-spectrum layout (unnormalized
/// forward transform, so a single harmonic of unit amplitude has magnitude N/2).
class SpectralField {
 public:
  using value_type = std::complex<double>;

  SpectralField() = default;
  explicit SpectralField(const PeriodicGrid& grid) : grid_(grid), coeffs_(grid.spectral_size()) {}

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  std::span<value_type> coeffs() noexcept { return coeffs_; }
  std::span<const value_type> coeffs() const noexcept { return coeffs_; }
  value_type& operator[](std::size_t m) noexcept { return coeffs_[m]; }
  const value_type& operator[](std::size_t m) const noexcept { return coeffs_[m]; }

 private:
  PeriodicGrid grid_;
  std::vector<value_type> coeffs_;
};

/// Vector of per-direction fields (gradients, velocities).
using VectorField = std::vector<Field>;

}  // namespace gradflow
