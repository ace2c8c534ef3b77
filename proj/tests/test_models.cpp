#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gradflow/models.hpp"
#include "gradflow/random.hpp"

using namespace gradflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

ModelSpec make(ModelKind kind, double M = 1.0, double eps = 1.0) {
  ModelSpec s;
  s.kind = kind;
  s.mobility = M;
  s.epsilon = eps;
  return s;
}

Field smooth_random(const PeriodicGrid& g, std::uint64_t seed, double offset, double amp,
                    int max_mode = 3, std::uint64_t stream = 0) {
  SpectralField F = forward(seeded_random_field(g, seed, 0.0, 1.0, stream));
  for (std::size_t m = 0; m < F.size(); ++m) {
    const auto idx = g.mode_index(m);
    for (int d = 0; d < g.dims(); ++d) {
      if (std::abs(g.signed_mode(d, idx[d])) > max_mode) {
        F[m] = 0.0;
        break;
      }
    }
  }
  Field f = backward(F);
  f *= amp / std::max(f.max_abs(), 1e-300);
  for (double& v : f.values()) v += offset;
  return f;
}

}  // namespace

TEST_CASE("Allen–Cahn nonlinear term values", "[models]") {
  const auto g = PeriodicGrid::cube(2, 8);
  const GradientFlowModel ac(make(ModelKind::AllenCahn), g);
  CHECK(ac.nonlinear_term(Field(g, 1.0)).max_abs() == 0.0);
  const Field n = ac.nonlinear_term(Field(g, 0.5));
  for (double v : n.values()) CHECK(v == -0.375);
}

TEST_CASE("MBE nonlinear term against a finite-difference oracle", "[models]") {
  const auto g = PeriodicGrid::cube(2, 64);
  const GradientFlowModel mbe(make(ModelKind::MbeNoSlope, 1.0, 0.1), g);
  const Field phi = Field::from_function(g, [](auto x) { return std::sin(x[0]); });
  const Field n = mbe.nonlinear_term(phi);

  // div f(grad phi) with grad phi = (cos x, 0), differenced in x.
  const auto flux = [](double x) {
    const double v = std::cos(x);
    return v / (1.0 + v * v);
  };
  const double h = 1e-4;
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.point(i)[0];
    const double fd = (flux(x + h) - flux(x - h)) / (2.0 * h);
    err = std::max(err, std::abs(n[i] - fd));
  }
  CHECK(err <= 1e-6);
}

TEST_CASE("free energy of constant and single-mode states", "[models]") {
  const auto g = PeriodicGrid::cube(2, 64);
  const GradientFlowModel ac(make(ModelKind::AllenCahn), g);
  CHECK(ac.free_energy(Field(g, 1.0)).total == 0.0);
  CHECK_THAT(ac.free_energy(Field(g, 0.0)).total, WithinRel(pi * pi, 1e-13));

  const auto cosx = [](auto x) { return std::cos(x[0]); };
  const EnergyBreakdown e = ac.free_energy(Field::from_function(g, cosx));
  CHECK_THAT(e.total, WithinRel(pi * pi + 3.0 * pi * pi / 8.0, 1e-12));
  CHECK(e.total == e.quadratic + e.potential);

  // Independent quadrature at 256 points per side: ½|∇φ|² + (φ²-1)²/4.
  const int n = 256;
  const double hx = 2.0 * pi / n;
  double oracle = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = i * hx;
    const double c = std::cos(x);
    const double s = std::sin(x);
    oracle += 0.5 * s * s + 0.25 * (c * c - 1.0) * (c * c - 1.0);
  }
  oracle *= hx * 2.0 * pi;
  CHECK_THAT(e.total, WithinRel(oracle, 1e-12));
}

TEST_CASE("MBE and CH energies of a single mode", "[models]") {
  const auto g = PeriodicGrid::cube(2, 32);
  const Field c = Field::from_function(g, [](auto x) { return std::cos(x[0]); });
  const double eps = 0.3;
  const GradientFlowModel mbe(make(ModelKind::MbeNoSlope, 0.1, eps), g);
  const EnergyBreakdown e = mbe.free_energy(c);
  // ε²/2 ∫ |Δφ|² = ε²/2 · 2π².
  CHECK_THAT(e.quadratic, WithinRel(eps * eps * pi * pi, 1e-12));
  // -½ ∫ ln(1 + sin²x) = -½ · 4π² ln((3/2+√2)/2).
  CHECK_THAT(e.potential, WithinRel(-0.5 * 4.0 * pi * pi * std::log((1.5 + std::sqrt(2.0)) / 2.0), 1e-10));

  const GradientFlowModel ch(make(ModelKind::CahnHilliard, 0.01, 1.0), g);
  CHECK_THAT(ch.mobility()[1], WithinRel(0.01, 1e-15));
  CHECK(ch.mobility()[0] == 0.0);
  CHECK(ch.mobility_linear()[0] == 0.0);
}

TEST_CASE("variational consistency", "[models]") {
  const auto g = PeriodicGrid::cube(2, 32);

  SECTION("Allen–Cahn and Cahn–Hilliard") {
    for (ModelKind k : {ModelKind::AllenCahn, ModelKind::CahnHilliard}) {
      const GradientFlowModel m(make(k, 1.0, 0.5), g);
      const Field phi = smooth_random(g, 1, 0.1, 0.8);
      const Field d = smooth_random(g, 2, 0.0, 1.0);
      const double E = m.free_energy(phi).total;
      CHECK(variational_consistency_check(m, phi, d) <= 1e-6 * (1.0 + std::abs(E)));
      CHECK(variational_consistency_check(m, phi, Field(g)) == 0.0);
    }
  }

  SECTION("MBE") {
    const GradientFlowModel m(make(ModelKind::MbeNoSlope, 0.1, 0.2), g);
    const Field phi = smooth_random(g, 3, 0.0, 0.7);
    const Field d = smooth_random(g, 4, 0.0, 1.0);
    const double E = m.free_energy(phi).total;
    CHECK(variational_consistency_check(m, phi, d) <= 1e-5 * (1.0 + std::abs(E)));
  }

  SECTION("ternary") {
    ModelSpec s = make(ModelKind::TernaryCH, 1.0, 0.3);
    s.lambda = 7.0;
    s.sigma = {1.0, 0.8, 1.4};
    const TernaryModel m(s, g);
    const FieldPair phi{smooth_random(g, 5, 0.3, 0.2), smooth_random(g, 6, 0.4, 0.2)};
    const FieldPair d{smooth_random(g, 7, 0.0, 1.0), smooth_random(g, 8, 0.0, 1.0)};
    const double E = m.free_energy(phi).total;
    CHECK(variational_consistency_check(m, phi, d) <= 1e-5 * (1.0 + std::abs(E)));
  }
}

TEST_CASE("free energy is invariant under refinement for band-limited data", "[models]") {
  const auto coarse = PeriodicGrid::cube(2, 16);
  const auto fine = PeriodicGrid::cube(2, 32);
  const auto fn = [](auto x) {
    return 0.3 + 0.5 * std::cos(x[0]) * std::sin(2.0 * x[1]) + 0.2 * std::sin(x[0] - x[1]);
  };
  for (ModelKind k : {ModelKind::AllenCahn, ModelKind::CahnHilliard}) {
    const double ec = GradientFlowModel(make(k), coarse).free_energy(Field::from_function(coarse, fn)).total;
    const double ef = GradientFlowModel(make(k), fine).free_energy(Field::from_function(fine, fn)).total;
    CHECK_THAT(ec, WithinAbs(ef, 1e-10));
  }
}

TEST_CASE("potential line matches direct evaluation", "[models]") {
  const auto g = PeriodicGrid::cube(2, 16);
  for (ModelKind k : {ModelKind::AllenCahn, ModelKind::MbeNoSlope}) {
    const GradientFlowModel m(make(k, 1.0, 0.4), g);
    const Field b = smooth_random(g, 1, 0.2, 0.6);
    const Field q = smooth_random(g, 2, 0.0, 0.3);
    const Field ref = m.potential_density(b);
    const auto line = m.potential_line(b, q, ref, 3.0);
    for (double eta : {-1.0, 0.0, 0.5, 2.0}) {
      const double direct = 3.0 * m.potential_energy(b + eta * q) - m.potential_energy(b);
      CHECK_THAT(line(eta), WithinAbs(direct, 1e-11 * (1.0 + std::abs(direct))));
    }
  }
}

TEST_CASE("ternary Sigma coefficients and pure phases", "[models][ternary]") {
  ModelSpec s = make(ModelKind::TernaryCH);
  s.sigma = {1.0, 1.0, 1.0};
  CHECK(s.big_sigma() == std::array<double, 3>{1.0, 1.0, 1.0});
  s.sigma = {3.0, 1.0, 1.0};
  CHECK(s.big_sigma() == std::array<double, 3>{3.0, 3.0, -1.0});

  const auto g = PeriodicGrid::cube(2, 8);
  const TernaryModel neg(s, g);
  REQUIRE(neg.warnings().size() == 1);
  CHECK(neg.warnings().front().find("Sigma_3") != std::string::npos);

  s.sigma = {1.0, 1.0, 1.0};
  s.lambda = 7.0;
  const TernaryModel m(s, g);
  CHECK(m.warnings().empty());
  for (auto [p1, p2] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{0.0, 0.0}}) {
    const auto grad = m.bulk_gradient(p1, p2);
    CHECK(grad[0] == 0.0);
    CHECK(grad[1] == 0.0);
    CHECK(m.bulk(p1, p2) == 0.0);
  }
  const FieldPair pure{Field(g, 1.0), Field(g, 0.0)};
  CHECK(m.free_energy(pure).total == 0.0);
  CHECK(TernaryModel::third_phase(pure).max_abs() == 0.0);
}

TEST_CASE("ternary bulk gradient against finite differences", "[models][ternary]") {
  ModelSpec s = make(ModelKind::TernaryCH);
  s.sigma = {1.3, 0.7, 1.1};
  s.lambda = 4.0;
  const TernaryModel m(s, PeriodicGrid::cube(2, 4));
  const double h = 1e-6;
  for (auto [p1, p2] : {std::pair{0.2, 0.3}, std::pair{0.7, 0.1}, std::pair{-0.1, 0.9}}) {
    const auto grad = m.bulk_gradient(p1, p2);
    const double d1 = (m.bulk(p1 + h, p2) - m.bulk(p1 - h, p2)) / (2.0 * h);
    const double d2 = (m.bulk(p1, p2 + h) - m.bulk(p1, p2 - h)) / (2.0 * h);
    CHECK_THAT(grad[0], WithinAbs(d1, 1e-8));
    CHECK_THAT(grad[1], WithinAbs(d2, 1e-8));
  }
}

TEST_CASE("model construction errors", "[models]") {
  const auto g = PeriodicGrid::cube(2, 8);
  CHECK_THROWS_AS(GradientFlowModel(make(ModelKind::TernaryCH), g), std::invalid_argument);
  CHECK_THROWS_AS(GradientFlowModel(make(ModelKind::AllenCahn, -1.0), g), std::invalid_argument);
  CHECK_THROWS_AS(TernaryModel(make(ModelKind::AllenCahn), g), std::invalid_argument);
}
