#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "gradflow/fft.hpp"
#include "gradflow/grid.hpp"

namespace gradflow {

/// Diagonal operator in Fourier space: one real multiplier per stored mode.
class OperatorSymbol {
 public:
  OperatorSymbol() = default;
  explicit OperatorSymbol(const PeriodicGrid& grid, double value = 0.0)
      : grid_(grid), values_(grid.spectral_size(), value) {}

  template <class Fn>
  static OperatorSymbol from_wavevector(const PeriodicGrid& grid, Fn&& fn) {
    OperatorSymbol s(grid);
    for (std::size_t m = 0; m < s.size(); ++m) {
      const auto idx = grid.mode_index(m);
      std::array<double, PeriodicGrid::kMaxDims> k{0.0, 0.0, 0.0};
      for (int d = 0; d < grid.dims(); ++d) k[d] = grid.wavenumber(d, idx[d]);
      s.values_[m] = fn(k);
    }
    return s;
  }

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t m) const noexcept { return values_[m]; }
  double& operator[](std::size_t m) noexcept { return values_[m]; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend OperatorSymbol operator*(OperatorSymbol a, const OperatorSymbol& b) {
    require_same_grid(a.grid_, b.grid_, "OperatorSymbol *");
    for (std::size_t m = 0; m < a.size(); ++m) a.values_[m] *= b.values_[m];
    return a;
  }
  friend OperatorSymbol operator*(double s, OperatorSymbol a) {
    for (double& v : a.values_) v *= s;
    return a;
  }
  friend OperatorSymbol operator+(OperatorSymbol a, const OperatorSymbol& b) {
    require_same_grid(a.grid_, b.grid_, "OperatorSymbol +");
    for (std::size_t m = 0; m < a.size(); ++m) a.values_[m] += b.values_[m];
    return a;
  }

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

namespace symbols {

inline OperatorSymbol identity(const PeriodicGrid& grid) { return OperatorSymbol(grid, 1.0); }

/// |k|^2, the symbol of -Laplacian. Exactly zero at the zero mode.
inline OperatorSymbol neg_laplacian(const PeriodicGrid& grid) {
  return OperatorSymbol::from_wavevector(grid, [](const auto& k) {
    return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
  });
}

/// |k|^4, the symbol of the bi-Laplacian.
inline OperatorSymbol biharmonic(const PeriodicGrid& grid) {
  return OperatorSymbol::from_wavevector(grid, [](const auto& k) {
    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    return k2 * k2;
  });
}

}  // namespace symbols

/// In-place s ⊙ F.
inline void multiply(SpectralField& F, const OperatorSymbol& s) {
  require_same_grid(F.grid(), s.grid(), "multiply");
  for (std::size_t m = 0; m < F.size(); ++m) F[m] *= s[m];
}

inline Field apply_symbol(const Field& f, const OperatorSymbol& s) {
  require_same_grid(f.grid(), s.grid(), "apply_symbol");
  SpectralField F = forward(f);
  multiply(F, s);
  return backward(F);
}

/// Per-mode division x = rhs / (alpha + c*s). Throws SingularOperator when a
/// mode has a non-positive diagonal.
inline void solve_shifted_inplace(double alpha, double c, const OperatorSymbol& s,
                                  SpectralField& rhs) {
  require_same_grid(rhs.grid(), s.grid(), "solve_shifted");
  for (std::size_t m = 0; m < rhs.size(); ++m) {
    const double diag = alpha + c * s[m];
    if (!(diag > 0.0)) {
      throw SingularOperator("solve_shifted: alpha + c*s = " + std::to_string(diag) +
                             " at mode " + std::to_string(m));
    }
    rhs[m] /= diag;
  }
}

inline Field solve_shifted(double alpha, double c, const OperatorSymbol& s, const Field& rhs) {
  require_same_grid(rhs.grid(), s.grid(), "solve_shifted");
  SpectralField R = forward(rhs);
  solve_shifted_inplace(alpha, c, s, R);
  return backward(R);
}

using Mat2 = std::array<std::array<double, 2>, 2>;
using FieldPair = std::array<Field, 2>;

/// Per-mode 2x2 solve of (alpha*I + c*s[m]*M) x = rhs.
inline void solve_block2_inplace(double alpha, double c, const Mat2& M, const OperatorSymbol& s,
                                 SpectralField& r0, SpectralField& r1) {
  require_same_grid(r0.grid(), s.grid(), "solve_block2");
  require_same_grid(r1.grid(), s.grid(), "solve_block2");
  for (std::size_t m = 0; m < r0.size(); ++m) {
    const double cs = c * s[m];
    const double a00 = alpha + cs * M[0][0];
    const double a01 = cs * M[0][1];
    const double a10 = cs * M[1][0];
    const double a11 = alpha + cs * M[1][1];
    const double det = a00 * a11 - a01 * a10;
    const double scale = std::abs(a00 * a11) + std::abs(a01 * a10);
    if (!(std::abs(det) > 1e-14 * scale) || !std::isfinite(det)) {
      throw SingularOperator("solve_block2: singular 2x2 block at mode " + std::to_string(m));
    }
    const std::complex<double> x0 = (a11 * r0[m] - a01 * r1[m]) / det;
    const std::complex<double> x1 = (a00 * r1[m] - a10 * r0[m]) / det;
    r0[m] = x0;
    r1[m] = x1;
  }
}

inline FieldPair solve_block2(double alpha, double c, const Mat2& M, const OperatorSymbol& s,
                              const FieldPair& rhs) {
  SpectralField r0 = forward(rhs[0]);
  SpectralField r1 = forward(rhs[1]);
  solve_block2_inplace(alpha, c, M, s, r0, r1);
  return {backward(r0), backward(r1)};
}

/// Grid-sum quadrature: cell_volume * sum f*g.
inline double inner(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  double s = 0.0;
  const auto a = f.values();
  const auto b = g.values();
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * f.grid().cell_volume();
}

inline double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

/// The same pairing evaluated in Fourier space (Parseval).
inline double spectral_inner(const SpectralField& F, const SpectralField& G) {
  require_same_grid(F.grid(), G.grid(), "spectral_inner");
  const PeriodicGrid& grid = F.grid();
  double s = 0.0;
  for (std::size_t m = 0; m < F.size(); ++m) {
    s += grid.parseval_weight(m) * (F[m].real() * G[m].real() + F[m].imag() * G[m].imag());
  }
  return s * grid.cell_volume() / static_cast<double>(grid.size());
}

/// (S f, g) for a diagonal operator S, evaluated spectrally.
inline double symbol_inner(const SpectralField& F, const OperatorSymbol& s,
                           const SpectralField& G) {
  require_same_grid(F.grid(), s.grid(), "symbol_inner");
  const PeriodicGrid& grid = F.grid();
  double acc = 0.0;
  for (std::size_t m = 0; m < F.size(); ++m) {
    acc += grid.parseval_weight(m) * s[m] *
           (F[m].real() * G[m].real() + F[m].imag() * G[m].imag());
  }
  return acc * grid.cell_volume() / static_cast<double>(grid.size());
}

/// ||grad f||^2 = (-Δf, f).
inline double h1_seminorm_squared(const Field& f) {
  const SpectralField F = forward(f);
  return symbol_inner(F, symbols::neg_laplacian(f.grid()), F);
}

inline double h1_seminorm(const Field& f) { return std::sqrt(h1_seminorm_squared(f)); }

/// i*k_d*F for direction d, with the Nyquist mode zeroed.
inline SpectralField spectral_derivative(const SpectralField& F, int d) {
  const PeriodicGrid& grid = F.grid();
  SpectralField out(grid);
  for (std::size_t m = 0; m < F.size(); ++m) {
    const double k = grid.odd_wavenumber(d, grid.mode_index(m)[d]);
    out[m] = std::complex<double>(-k * F[m].imag(), k * F[m].real());
  }
  return out;
}

inline VectorField gradient(const Field& f) {
  const SpectralField F = forward(f);
  VectorField g;
  g.reserve(static_cast<std::size_t>(f.grid().dims()));
  for (int d = 0; d < f.grid().dims(); ++d) g.push_back(backward(spectral_derivative(F, d)));
  return g;
}

inline Field divergence(const VectorField& v) {
  if (v.empty() || static_cast<int>(v.size()) != v.front().grid().dims()) {
    throw GridMismatch("divergence: need one component per dimension");
  }
  const PeriodicGrid& grid = v.front().grid();
  SpectralField acc(grid);
  for (int d = 0; d < grid.dims(); ++d) {
    require_same_grid(grid, v[d].grid(), "divergence");
    const SpectralField D = spectral_derivative(forward(v[d]), d);
    for (std::size_t m = 0; m < acc.size(); ++m) acc[m] += D[m];
  }
  return backward(acc);
}

/// Splits the spectral vector V into its solenoidal part (returned in V) and the
/// scalar potential P with V_in = V_sol + i k P (zero mode of P set to 0).
inline void leray_split_inplace(std::vector<SpectralField>& V, SpectralField* potential) {
  const PeriodicGrid& grid = V.front().grid();
  const int dims = grid.dims();
  if (potential) *potential = SpectralField(grid);
  for (std::size_t m = 0; m < V.front().size(); ++m) {
    const auto idx = grid.mode_index(m);
    std::array<double, PeriodicGrid::kMaxDims> k{0.0, 0.0, 0.0};
    double k2 = 0.0;
    for (int d = 0; d < dims; ++d) {
      k[d] = grid.odd_wavenumber(d, idx[d]);
      k2 += k[d] * k[d];
    }
    if (k2 == 0.0) continue;
    std::complex<double> kv = 0.0;
    for (int d = 0; d < dims; ++d) kv += k[d] * V[d][m];
    for (int d = 0; d < dims; ++d) V[d][m] -= k[d] * kv / k2;
    // i k P = k (k.V)/k2  =>  P = -i (k.V)/k2
    if (potential) (*potential)[m] = std::complex<double>(kv.imag(), -kv.real()) / k2;
  }
}

/// v - grad Δ^{-1} div v.
inline VectorField leray_project(const VectorField& v) {
  std::vector<SpectralField> V;
  V.reserve(v.size());
  for (const Field& c : v) V.push_back(forward(c));
  leray_split_inplace(V, nullptr);
  VectorField out;
  out.reserve(v.size());
  for (const auto& C : V) out.push_back(backward(C));
  return out;
}

/// Zeroes every mode with |signed index| > n/3 in some dimension.
inline void dealias_two_thirds(SpectralField& F) {
  const PeriodicGrid& grid = F.grid();
  for (std::size_t m = 0; m < F.size(); ++m) {
    const auto idx = grid.mode_index(m);
    for (int d = 0; d < grid.dims(); ++d) {
      if (3 * std::abs(grid.signed_mode(d, idx[d])) > grid.n(d)) {
        F[m] = 0.0;
        break;
      }
    }
  }
}

inline double vector_inner(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += inner(a[d], b[d]);
  return s;
}

}  // namespace gradflow
