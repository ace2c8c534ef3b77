#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "gradflow/spectral.hpp"

namespace gradflow {

enum class ModelKind { AllenCahn, CahnHilliard, MbeNoSlope, TernaryCH };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::AllenCahn: return "allen_cahn";
    case ModelKind::CahnHilliard: return "cahn_hilliard";
    case ModelKind::MbeNoSlope: return "mbe";
    case ModelKind::TernaryCH: return "ternary_ch";
  }
  return "?";
}

/// Parameters of one gradient-flow model.
struct ModelSpec {
  ModelKind kind = ModelKind::AllenCahn;
  double mobility = 1.0;
  double epsilon = 1.0;
  double lambda = 0.0;                        // ternary only
  std::array<double, 3> sigma{1.0, 1.0, 1.0};  // (s12, s13, s23), ternary only
  bool dealias = false;                       // 2/3-rule on the nonlinear term

  int n_fields() const noexcept { return kind == ModelKind::TernaryCH ? 2 : 1; }

  /// (Σ1, Σ2, Σ3) derived from the pairwise surface tensions.
  std::array<double, 3> big_sigma() const noexcept {
    const auto [s12, s13, s23] = sigma;
    return {s12 + s13 - s23, s12 + s23 - s13, s13 + s23 - s12};
  }
};

struct EnergyBreakdown {
  double quadratic = 0.0;
  double potential = 0.0;
  double total = 0.0;
};

/// Single-unknown gradient flow  φ_t = -G μ,  μ = Lφ + N(φ),
/// E(φ) = ½(Lφ, φ) + P(φ).
///
/// Allen–Cahn and Cahn–Hilliard use L = -Δ and the double well
/// F(φ) = (φ²-1)²/(4ε²); G is M or -MΔ. The MBE model without slope selection
/// uses L = ε²Δ², G = M and P(φ) = ∫ -½ ln(1+|∇φ|²), whose variational
/// derivative is ∇·f(∇φ) with f(v) = v/(1+|v|²).
class GradientFlowModel {
 public:
  GradientFlowModel(const ModelSpec& spec, const PeriodicGrid& grid) : spec_(spec), grid_(grid) {
    if (spec.kind == ModelKind::TernaryCH) {
      throw std::invalid_argument("GradientFlowModel: ternary model has two unknowns");
    }
    if (!(spec.mobility > 0.0) || !(spec.epsilon > 0.0)) {
      throw std::invalid_argument("GradientFlowModel: mobility and epsilon must be positive");
    }
    const OperatorSymbol k2 = symbols::neg_laplacian(grid);
    switch (spec.kind) {
      case ModelKind::AllenCahn:
        mobility_ = OperatorSymbol(grid, spec.mobility);
        linear_ = k2;
        break;
      case ModelKind::CahnHilliard:
        mobility_ = spec.mobility * k2;
        linear_ = k2;
        break;
      case ModelKind::MbeNoSlope:
        mobility_ = OperatorSymbol(grid, spec.mobility);
        linear_ = (spec.epsilon * spec.epsilon) * symbols::biharmonic(grid);
        break;
      case ModelKind::TernaryCH: break;
    }
    mobility_linear_ = mobility_ * linear_;
  }

  const ModelSpec& spec() const noexcept { return spec_; }
  const PeriodicGrid& grid() const noexcept { return grid_; }
  ModelKind kind() const noexcept { return spec_.kind; }

  /// Symbol of G (mobility included).
  const OperatorSymbol& mobility() const noexcept { return mobility_; }
  /// Symbol of L.
  const OperatorSymbol& linear() const noexcept { return linear_; }
  /// Symbol of GL.
  const OperatorSymbol& mobility_linear() const noexcept { return mobility_linear_; }

  double well(double phi) const noexcept {
    const double e2 = spec_.epsilon * spec_.epsilon;
    const double w = phi * phi - 1.0;
    return w * w / (4.0 * e2);
  }

  double well_derivative(double phi) const noexcept {
    const double e2 = spec_.epsilon * spec_.epsilon;
    return phi * (phi * phi - 1.0) / e2;
  }

  static double mbe_density(double grad_sq) noexcept { return -0.5 * std::log1p(grad_sq); }

  /// Variational derivative of the potential part, N(φ) = δP/δφ.
  Field nonlinear_term(const Field& phi) const {
    require_same_grid(phi.grid(), grid_, "nonlinear_term");
    Field out(grid_);
    if (spec_.kind == ModelKind::MbeNoSlope) {
      VectorField g = gradient(phi);
      for (std::size_t i = 0; i < phi.size(); ++i) {
        double s = 0.0;
        for (const Field& c : g) s += c[i] * c[i];
        const double w = 1.0 / (1.0 + s);
        for (Field& c : g) c[i] *= w;
      }
      out = divergence(g);
    } else {
      for (std::size_t i = 0; i < phi.size(); ++i) out[i] = well_derivative(phi[i]);
    }
    if (spec_.dealias) {
      SpectralField F = forward(out);
      dealias_two_thirds(F);
      out = backward(F);
    }
    return out;
  }

  /// Pointwise integrand of P.
  Field potential_density(const Field& phi) const {
    require_same_grid(phi.grid(), grid_, "potential_density");
    Field out(grid_);
    if (spec_.kind == ModelKind::MbeNoSlope) {
      const VectorField g = gradient(phi);
      for (std::size_t i = 0; i < phi.size(); ++i) {
        double s = 0.0;
        for (const Field& c : g) s += c[i] * c[i];
        out[i] = mbe_density(s);
      }
    } else {
      for (std::size_t i = 0; i < phi.size(); ++i) out[i] = well(phi[i]);
    }
    return out;
  }

  double potential_energy(const Field& phi) const {
    const Field d = potential_density(phi);
    double s = 0.0;
    for (double v : d.values()) s += v;
    return s * grid_.cell_volume();
  }

  double quadratic_energy(const SpectralField& Phi) const {
    return 0.5 * symbol_inner(Phi, linear_, Phi);
  }

  EnergyBreakdown free_energy(const Field& phi) const {
    EnergyBreakdown e;
    e.quadratic = quadratic_energy(forward(phi));
    e.potential = potential_energy(phi);
    e.total = e.quadratic + e.potential;
    return e;
  }

  /// μ = Lφ + N(φ).
  Field chemical_potential(const Field& phi) const {
    return apply_symbol(phi, linear_) + nonlinear_term(phi);
  }

  /// Evaluates w·P(base + η·dir) - ∫ref along a line in field space without any
  /// transform per evaluation. The difference is taken pointwise so that the
  /// result carries no cancellation error from two large totals.
  class PotentialLine {
   public:
    PotentialLine(const GradientFlowModel& model, const Field& base, const Field& dir,
                  const Field& reference, double weight)
        : model_(&model), weight_(weight), reference_(reference) {
      if (model.kind() == ModelKind::MbeNoSlope) {
        base_ = gradient(base);
        dir_ = gradient(dir);
      } else {
        base_ = {base};
        dir_ = {dir};
      }
    }

    double operator()(double eta) const {
      const std::size_t n = reference_.size();
      double s = 0.0;
      if (model_->kind() == ModelKind::MbeNoSlope) {
        for (std::size_t i = 0; i < n; ++i) {
          double g2 = 0.0;
          for (std::size_t d = 0; d < base_.size(); ++d) {
            const double v = base_[d][i] + eta * dir_[d][i];
            g2 += v * v;
          }
          s += weight_ * mbe_density(g2) - reference_[i];
        }
      } else {
        const Field& b = base_.front();
        const Field& q = dir_.front();
        for (std::size_t i = 0; i < n; ++i) s += weight_ * model_->well(b[i] + eta * q[i]) - reference_[i];
      }
      return s * reference_.grid().cell_volume();
    }

   private:
    const GradientFlowModel* model_;
    double weight_;
    Field reference_;
    VectorField base_;
    VectorField dir_;
  };

  PotentialLine potential_line(const Field& base, const Field& dir, const Field& reference,
                               double weight = 1.0) const {
    return PotentialLine(*this, base, dir, reference, weight);
  }

 private:
  ModelSpec spec_;
  PeriodicGrid grid_;
  OperatorSymbol mobility_;
  OperatorSymbol linear_;
  OperatorSymbol mobility_linear_;
};

/// Ternary Cahn–Hilliard with φ3 = 1 - φ1 - φ2 eliminated.
///
/// E = (3ε²/8) ∫ Σ1|∇φ1|² + Σ2|∇φ2|² + Σ3|∇φ1+∇φ2|² + 12 ∫ F(φ1, φ2),
/// ∂t φl = (M/Σl) Δ μl. The quadratic part is ½(LΦ, Φ) with
/// L = (3ε²/4) [[Σ1+Σ3, Σ3], [Σ3, Σ2+Σ3]] ⊗ (-Δ), and G = diag(M/Σl) ⊗ (-Δ).
class TernaryModel {
 public:
  TernaryModel(const ModelSpec& spec, const PeriodicGrid& grid)
      : spec_(spec), grid_(grid), big_sigma_(spec.big_sigma()), k2_(symbols::neg_laplacian(grid)) {
    if (spec.kind != ModelKind::TernaryCH) {
      throw std::invalid_argument("TernaryModel: model kind must be ternary_ch");
    }
    if (!(spec.mobility > 0.0) || !(spec.epsilon > 0.0) || spec.lambda < 0.0) {
      throw std::invalid_argument("TernaryModel: need M > 0, epsilon > 0, Lambda >= 0");
    }
    const auto [S1, S2, S3] = big_sigma_;
    for (int l = 0; l < 3; ++l) {
      if (!(big_sigma_[l] > 0.0)) {
        warnings_.push_back("Sigma_" + std::to_string(l + 1) + " = " +
                            std::to_string(big_sigma_[l]) +
                            " is not positive; the mobility M/Sigma_l is not positive definite");
      }
    }
    if (S1 == 0.0 || S2 == 0.0) {
      throw std::invalid_argument("TernaryModel: Sigma_1 and Sigma_2 must be nonzero");
    }
    const double c = 0.75 * spec.epsilon * spec.epsilon;
    coupling_ = {{{c * (S1 + S3), c * S3}, {c * S3, c * (S2 + S3)}}};
    mobility_ = {spec.mobility / S1, spec.mobility / S2};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) mobility_coupling_[i][j] = mobility_[i] * coupling_[i][j];
    }
    k4_ = k2_ * k2_;
  }

  const ModelSpec& spec() const noexcept { return spec_; }
  const PeriodicGrid& grid() const noexcept { return grid_; }
  const std::array<double, 3>& big_sigma() const noexcept { return big_sigma_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// (3ε²/4) times the Σ coupling matrix; L = coupling ⊗ |k|².
  const Mat2& coupling() const noexcept { return coupling_; }
  /// M/Σl for l = 1, 2; G = diag(mobility) ⊗ |k|².
  const std::array<double, 2>& mobility() const noexcept { return mobility_; }
  /// diag(M/Σl)·coupling; GL = mobility_coupling ⊗ |k|⁴.
  const Mat2& mobility_coupling() const noexcept { return mobility_coupling_; }
  const OperatorSymbol& k2() const noexcept { return k2_; }
  const OperatorSymbol& k4() const noexcept { return k4_; }

  static double h(double x) noexcept { return x * x * (1.0 - x) * (1.0 - x); }
  static double dh(double x) noexcept { return 2.0 * x * (1.0 - x) * (1.0 - 2.0 * x); }

  /// F(φ1, φ2) without the factor 12.
  double bulk(double p1, double p2) const noexcept {
    const auto [S1, S2, S3] = big_sigma_;
    const double s = p1 + p2;
    const double r = 1.0 - s;
    return 0.5 * S1 * h(p1) + 0.5 * S2 * h(p2) + 0.5 * S3 * h(s) +
           3.0 * spec_.lambda * p1 * p1 * p2 * p2 * r * r;
  }

  std::array<double, 2> bulk_gradient(double p1, double p2) const noexcept {
    const auto [S1, S2, S3] = big_sigma_;
    const double s = p1 + p2;
    const double r = 1.0 - s;
    const double common = 0.5 * S3 * dh(s);
    const double lam = 6.0 * spec_.lambda;
    return {0.5 * S1 * dh(p1) + common + lam * p1 * p2 * p2 * r * (r - p1),
            0.5 * S2 * dh(p2) + common + lam * p2 * p1 * p1 * r * (r - p2)};
  }

  /// (12 ∂F/∂φ1, 12 ∂F/∂φ2).
  FieldPair nonlinear_term(const FieldPair& phi) const {
    FieldPair out{Field(grid_), Field(grid_)};
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const auto g = bulk_gradient(phi[0][i], phi[1][i]);
      out[0][i] = 12.0 * g[0];
      out[1][i] = 12.0 * g[1];
    }
    if (spec_.dealias) {
      for (Field& f : out) {
        SpectralField F = forward(f);
        dealias_two_thirds(F);
        f = backward(F);
      }
    }
    return out;
  }

  Field potential_density(const FieldPair& phi) const {
    Field out(grid_);
    for (std::size_t i = 0; i < grid_.size(); ++i) out[i] = 12.0 * bulk(phi[0][i], phi[1][i]);
    return out;
  }

  double quadratic_energy(const SpectralField& P1, const SpectralField& P2) const {
    const double a = symbol_inner(P1, k2_, P1);
    const double b = symbol_inner(P1, k2_, P2);
    const double c = symbol_inner(P2, k2_, P2);
    return 0.5 * (coupling_[0][0] * a + 2.0 * coupling_[0][1] * b + coupling_[1][1] * c);
  }

  EnergyBreakdown free_energy(const FieldPair& phi) const {
    EnergyBreakdown e;
    e.quadratic = quadratic_energy(forward(phi[0]), forward(phi[1]));
    const Field density = potential_density(phi);
    double s = 0.0;
    for (double v : density.values()) s += v;
    e.potential = s * grid_.cell_volume();
    e.total = e.quadratic + e.potential;
    return e;
  }

  FieldPair chemical_potential(const FieldPair& phi) const {
    FieldPair n = nonlinear_term(phi);
    const Field l0 = apply_symbol(phi[0], k2_);
    const Field l1 = apply_symbol(phi[1], k2_);
    n[0].axpy(coupling_[0][0], l0).axpy(coupling_[0][1], l1);
    n[1].axpy(coupling_[1][0], l0).axpy(coupling_[1][1], l1);
    return n;
  }

  static Field third_phase(const FieldPair& phi) {
    Field out(phi[0].grid(), 1.0);
    out -= phi[0];
    out -= phi[1];
    return out;
  }

  /// 12 ∫ [w·F(base + η dir) - ref] with pointwise differences.
  class PotentialLine {
   public:
    PotentialLine(const TernaryModel& model, FieldPair base, FieldPair dir, Field reference,
                  double weight)
        : model_(&model), base_(std::move(base)), dir_(std::move(dir)),
          reference_(std::move(reference)), weight_(weight) {}

    double operator()(double eta) const {
      double s = 0.0;
      for (std::size_t i = 0; i < reference_.size(); ++i) {
        const double p1 = base_[0][i] + eta * dir_[0][i];
        const double p2 = base_[1][i] + eta * dir_[1][i];
        s += weight_ * 12.0 * model_->bulk(p1, p2) - reference_[i];
      }
      return s * reference_.grid().cell_volume();
    }

   private:
    const TernaryModel* model_;
    FieldPair base_;
    FieldPair dir_;
    Field reference_;
    double weight_;
  };

  PotentialLine potential_line(const FieldPair& base, const FieldPair& dir,
                               const Field& reference, double weight = 1.0) const {
    return PotentialLine(*this, base, dir, reference, weight);
  }

 private:
  ModelSpec spec_;
  PeriodicGrid grid_;
  std::array<double, 3> big_sigma_;
  OperatorSymbol k2_;
  OperatorSymbol k4_;
  Mat2 coupling_{};
  std::array<double, 2> mobility_{};
  Mat2 mobility_coupling_{};
  std::vector<std::string> warnings_;
};

/// |(E(φ+hδ) - E(φ-hδ))/(2h) - (μ(φ), δ)| with h = 1e-5.
inline double variational_consistency_check(const GradientFlowModel& model, const Field& phi,
                                            const Field& dphi) {
  constexpr double h = 1e-5;
  const double ep = model.free_energy(phi + h * dphi).total;
  const double em = model.free_energy(phi - h * dphi).total;
  return std::abs((ep - em) / (2.0 * h) - inner(model.chemical_potential(phi), dphi));
}

inline double variational_consistency_check(const TernaryModel& model, const FieldPair& phi,
                                            const FieldPair& dphi) {
  constexpr double h = 1e-5;
  const FieldPair plus{phi[0] + h * dphi[0], phi[1] + h * dphi[1]};
  const FieldPair minus{phi[0] - h * dphi[0], phi[1] - h * dphi[1]};
  const double ep = model.free_energy(plus).total;
  const double em = model.free_energy(minus).total;
  const FieldPair mu = model.chemical_potential(phi);
  return std::abs((ep - em) / (2.0 * h) - inner(mu[0], dphi[0]) - inner(mu[1], dphi[1]));
}

}  // namespace gradflow
