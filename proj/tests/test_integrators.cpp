#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gradflow/integrators.hpp"
#include "gradflow/random.hpp"

using namespace gradflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

ModelSpec spec(ModelKind kind, double M, double eps) {
  ModelSpec s;
  s.kind = kind;
  s.mobility = M;
  s.epsilon = eps;
  return s;
}

SchemeConfig scheme(SchemeKind kind, double dt, int k = 2) {
  SchemeConfig c;
  c.kind = kind;
  c.dt = dt;
  c.k = k;
  return c;
}

const std::vector<SchemeKind> scalar_schemes = {SchemeKind::ClassicCn, SchemeKind::CombinedCn,
                                                SchemeKind::CombinedBdf2, SchemeKind::CombinedBdfk};

// Independent plain semi-implicit CN step, written out from the scheme:
// (1 + ½Δt g l) Φ̄ = (1 - ½Δt g l) Φⁿ - Δt g N̂(φ*), N = φ(φ²-1)/ε².
Field reference_cn_step(const PeriodicGrid& grid, double M, double eps, bool ch,
                        const Field& phi_n, const Field* phi_nm1, double dt) {
  Field star(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    star[i] = phi_nm1 ? 1.5 * phi_n[i] + -0.5 * (*phi_nm1)[i] : phi_n[i];
  }
  Field N(grid);
  const double e2 = eps * eps;
  for (std::size_t i = 0; i < grid.size(); ++i) N[i] = star[i] * (star[i] * star[i] - 1.0) / e2;
  const OperatorSymbol k2 = symbols::neg_laplacian(grid);
  const OperatorSymbol g = ch ? M * k2 : OperatorSymbol(grid, M);
  const OperatorSymbol gl = g * k2;
  const SpectralField P = forward(phi_n);
  const SpectralField Nh = forward(N);
  SpectralField R(grid);
  for (std::size_t m = 0; m < R.size(); ++m) {
    R[m] = (1.0 - 0.5 * dt * gl[m]) * P[m] - dt * (g[m] * Nh[m]);
    R[m] /= 1.0 + 0.5 * dt * gl[m];
  }
  return backward(R);
}

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("BDF tableaux are consistent on constants", "[integrators]") {
  for (int k = 1; k <= 4; ++k) {
    const BdfTableau t = bdf_tableau(k);
    REQUIRE(t.history.size() == static_cast<std::size_t>(k));
    REQUIRE(t.extrap.size() == static_cast<std::size_t>(k));
    double hs = 0.0;
    double es = 0.0;
    for (int j = 0; j < k; ++j) {
      hs += t.history[j];
      es += t.extrap[j];
    }
    CHECK_THAT(hs, WithinAbs(t.alpha, 1e-15));
    CHECK(es == 1.0);
    // Exact on polynomials of degree k in time (t_{n-j} = -j, target t = 1).
    for (int p = 1; p <= k; ++p) {
      double lhs = t.alpha;  // α·1^p
      double ex = 0.0;
      for (int j = 0; j < k; ++j) {
        lhs -= t.history[j] * std::pow(-j, p);
        ex += t.extrap[j] * std::pow(-j, p);
      }
      CHECK_THAT(lhs, WithinAbs(p, 1e-13));  // derivative of t^p at 1 is p
      if (p < k) CHECK_THAT(ex, WithinAbs(1.0, 1e-13));
    }
  }
  CHECK(bdf_tableau(3).alpha == 11.0 / 6.0);
  CHECK(bdf_tableau(4).history == std::vector<double>{4.0, -3.0, 4.0 / 3.0, -0.25});
  CHECK_THROWS_AS(bdf_tableau(0), std::invalid_argument);
  CHECK_THROWS_AS(bdf_tableau(5), std::invalid_argument);
}

TEST_CASE("constant minimizer is a fixed point of every scheme", "[integrators]") {
  const auto g = PeriodicGrid::cube(2, 8);
  const GradientFlowModel ac(spec(ModelKind::AllenCahn, 1.0, 0.1), g);
  for (SchemeKind kind : scalar_schemes) {
    CAPTURE(to_string(kind));
    GradientFlowIntegrator it(ac, scheme(kind, 0.5, 3), Field(g, 1.0));
    const Trajectory t = it.run(5);
    CHECK(it.current() == Field(g, 1.0));
    for (const auto& d : t.steps) {
      CHECK(d.E_after == 0.0);
      if (kind == SchemeKind::ClassicCn) {
        CHECK(d.branch == Branch::Solve);
        CHECK(d.eta == 1.0);
      } else if (kind == SchemeKind::CombinedBdfk && d.order > 0) {
        CHECK(d.branch == Branch::One);
      } else {
        CHECK(d.branch == Branch::Zero);
        CHECK(d.eta == 0.0);
      }
    }
  }
}

TEST_CASE("run with zero steps is empty", "[integrators]") {
  const auto g = PeriodicGrid::cube(2, 8);
  GradientFlowIntegrator it(GradientFlowModel(spec(ModelKind::AllenCahn, 1.0, 0.3), g),
                            scheme(SchemeKind::CombinedCn, 0.1), seeded_random_field(g, 1, 0.0, 0.5));
  const Field before = it.current();
  const Trajectory t = it.run(0);
  CHECK(t.empty());
  CHECK(it.current() == before);
  CHECK(it.step_index() == 0);
}

TEST_CASE("startup policy", "[integrators]") {
  const auto g = PeriodicGrid::cube(2, 8);
  const GradientFlowModel ac(spec(ModelKind::AllenCahn, 1.0, 0.3), g);
  const Field phi0 = seeded_random_field(g, 3, 0.0, 0.5);
  const auto labels = [&](SchemeConfig c, int n) {
    GradientFlowIntegrator it(ac, c, phi0);
    std::vector<std::string> out;
    for (const auto& d : it.run(n).steps) out.push_back(d.scheme);
    return out;
  };
  using V = std::vector<std::string>;
  CHECK(labels(scheme(SchemeKind::CombinedBdf2, 0.01), 3) == V{"combined_cn", "combined_bdf2", "combined_bdf2"});
  CHECK(labels(scheme(SchemeKind::CombinedBdfk, 0.01, 2), 3) == V{"combined_cn", "combined_bdf2", "combined_bdf2"});
  CHECK(labels(scheme(SchemeKind::CombinedBdfk, 0.01, 4), 5) ==
        V{"combined_cn", "combined_bdf2", "combined_bdf3", "combined_bdf4", "combined_bdf4"});
  CHECK(labels(scheme(SchemeKind::CombinedBdfk, 0.01, 1), 2) == V{"combined_bdf1", "combined_bdf1"});
  CHECK(labels(scheme(SchemeKind::ClassicCn, 0.01), 2) == V{"classic_cn", "classic_cn"});

  GradientFlowIntegrator it(ac, scheme(SchemeKind::CombinedBdfk, 0.01, 4), phi0);
  it.run(6);
  CHECK(it.history().size() == 4);
  GradientFlowIntegrator it2(ac, scheme(SchemeKind::CombinedCn, 0.01), phi0);
  it2.run(6);
  CHECK(it2.history().size() == 2);
}

TEST_CASE("combined CN on the energy-decay setup", "[integrators][energy]") {
  // ε² = 0.005 on [0,2π)², φ⁰ = 0.03 + 0.001 rand.
  const auto g = PeriodicGrid::cube(2, 64);
  const double eps = std::sqrt(0.005);
  const Field phi0 = seeded_random_field(g, 42, 0.03, 0.001);

  long zero_steps = 0;
  long solve_steps = 0;
  for (bool ch : {false, true}) {
    for (double dt : {0.1, 1.0}) {
      CAPTURE(ch, dt);
      const double M = ch ? 0.01 : 1.0;
      const GradientFlowModel model(spec(ch ? ModelKind::CahnHilliard : ModelKind::AllenCahn, M, eps), g);
      GradientFlowIntegrator it(model, scheme(SchemeKind::CombinedCn, dt), phi0);
      const double mean0 = phi0.mean();
      try {
        for (int n = 0; n < 200; ++n) {
          const std::vector<Field> hist = it.history();
          const double E_before = it.energy();
          const StepDiagnostics d = it.step();
          CHECK(d.E_after <= E_before + 1e-10 * (1.0 + std::abs(E_before)));
          if (ch) CHECK(std::abs(it.current().mean() - mean0) <= 1e-10);
          const Field ref = reference_cn_step(g, M, eps, ch, hist[0], hist.size() > 1 ? &hist[1] : nullptr, dt);
          if (d.branch == Branch::Zero) {
            ++zero_steps;
            CHECK(it.current() == ref);
          } else {
            ++solve_steps;
            // φ̄ = φⁿ⁺¹ - ηq with q from the same linear operator.
            const Field star = hist.size() > 1 ? 1.5 * hist[0] - 0.5 * hist[1] : hist[0];
            const Field q = multiplier_direction(model, model.nonlinear_term(star), 1.0, 0.5 * dt, dt);
            Field rec = it.current();
            rec.axpy(-d.eta, q);
            CHECK(max_diff(rec, ref) <= 1e-12 * (1.0 + ref.max_abs()));
            CHECK(d.residual <= 1e-9);
          }
        }
      } catch (const StepAborted& e) {
        WARN("aborted: " << e.what());
      }
    }
  }
  CHECK(zero_steps > 0);
  CHECK(solve_steps > 0);
}

TEST_CASE("combined CN solve branch satisfies the coupled system", "[integrators]") {
  // Stiff potential (ε = 0.2) at Δt = 0.2: the baseline raises the energy.
  const auto g = PeriodicGrid::cube(2, 16);
  const GradientFlowModel ac(spec(ModelKind::AllenCahn, 1.0, 0.2), g);
  const auto base = [](auto x) { return 0.9 * std::cos(x[0]) * std::cos(x[1]); };
  const Field phi_n = Field::from_function(g, base);
  const Field phi_nm1 = Field::from_function(g, [&](auto x) { return base(x) - 0.1 * std::sin(x[0] + x[1]); });
  const std::vector<Field> hist{phi_n, phi_nm1};
  const double dt = 0.2;
  const SchemeConfig cfg = scheme(SchemeKind::CombinedCn, dt);
  StepInput in;
  in.history = hist;
  in.E_prev = ac.free_energy(phi_n).total;
  const StepResult r = step_combined_cn(ac, cfg, in);
  REQUIRE(r.diag.branch == Branch::Solve);
  CHECK(r.diag.E_after <= in.E_prev);

  // (φⁿ⁺¹ - φⁿ)/Δt = -Gμ, μ = ½L(φⁿ⁺¹ + φⁿ) + (1+η)F'(φ*).
  const double eta = r.diag.eta;
  const Field star = 1.5 * phi_n - 0.5 * phi_nm1;
  Field fp(g);
  for (std::size_t i = 0; i < g.size(); ++i) fp[i] = ac.well_derivative(star[i]);
  const Field lap = apply_symbol(r.phi + phi_n, symbols::neg_laplacian(g));
  Field mu = 0.5 * lap;
  mu.axpy(1.0 + eta, fp);
  Field eq1 = (r.phi - phi_n) * (1.0 / dt);
  eq1 += mu;  // G = M = 1
  CHECK(eq1.max_abs() <= 1e-10 * (1.0 + mu.max_abs()));

  // (F(φⁿ⁺¹) - F(φⁿ), 1) = (1+η)(F'(φ*), φⁿ⁺¹ - φⁿ).
  double lhs = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) lhs += ac.well(r.phi[i]) - ac.well(phi_n[i]);
  lhs *= g.cell_volume();
  const double rhs = (1.0 + eta) * inner(fp, r.phi - phi_n);
  CHECK_THAT(lhs, WithinAbs(rhs, 1e-10 * (1.0 + std::abs(lhs))));

  // Discrete energy law.
  const double diss = dt * inner(mu, mu);
  CHECK_THAT(r.diag.E_after - in.E_prev, WithinAbs(-diss, 1e-9 * (1.0 + diss)));
}

TEST_CASE("classic CN matches a Newton solve of the coupled system", "[integrators]") {
  // Single-mode AC on 4²: unknowns (φⁿ⁺¹ at 16 points, η), Newton with a
  // finite-difference Jacobian on the three defining equations.
  const auto g = PeriodicGrid::cube(2, 4);
  const GradientFlowModel ac(spec(ModelKind::AllenCahn, 1.0, 0.7), g);
  const Field phi_n = Field::from_function(g, [](auto x) { return 0.8 * std::cos(x[0]); });
  const Field phi_nm1 = Field::from_function(g, [](auto x) { return 0.82 * std::cos(x[0]); });
  const double dt = 0.01;
  const std::vector<Field> hist{phi_n, phi_nm1};
  StepInput in;
  in.history = hist;
  in.E_prev = ac.free_energy(phi_n).total;
  const StepResult r = step_classic_cn(ac, scheme(SchemeKind::ClassicCn, dt), in);
  CHECK(r.diag.scalar_solves == 1);
  CHECK(r.diag.linear_solves == 2);

  const std::size_t n = g.size();
  const Field star = 1.5 * phi_n - 0.5 * phi_nm1;
  Field fp(g);
  for (std::size_t i = 0; i < n; ++i) fp[i] = ac.well_derivative(star[i]);
  const auto system = [&](const std::vector<double>& x) {
    Field phi(g);
    for (std::size_t i = 0; i < n; ++i) phi[i] = x[i];
    const double eta = x[n];
    const Field lap = apply_symbol(phi + phi_n, symbols::neg_laplacian(g));
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = (phi[i] - phi_n[i]) / dt + 0.5 * lap[i] + eta * fp[i];
    }
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e += ac.well(phi[i]) - ac.well(phi_n[i]) - eta * fp[i] * (phi[i] - phi_n[i]);
    }
    out[n] = e;
    return out;
  };
  // Start from an explicit Euler predictor: with this data the coupled system
  // also admits the spurious solution φⁿ⁺¹ = φⁿ, η = -(Lφⁿ)/F'(φ*), which a
  // start at φⁿ converges to.
  const Field lap_n = apply_symbol(phi_n, symbols::neg_laplacian(g));
  std::vector<double> x(n + 1);
  for (std::size_t i = 0; i < n; ++i) x[i] = phi_n[i] - dt * (lap_n[i] + fp[i]);
  x[n] = 1.0;
  for (int it = 0; it < 30; ++it) {
    const auto f0 = system(x);
    std::vector<std::vector<double>> J(n + 1, std::vector<double>(n + 2));
    for (std::size_t j = 0; j <= n; ++j) {
      auto xp = x;
      auto xm = x;
      const double h = 1e-7;
      xp[j] += h;
      xm[j] -= h;
      const auto fpv = system(xp);
      const auto fmv = system(xm);
      for (std::size_t i = 0; i <= n; ++i) J[i][j] = (fpv[i] - fmv[i]) / (2 * h);
    }
    for (std::size_t i = 0; i <= n; ++i) J[i][n + 1] = -f0[i];
    // Gaussian elimination with partial pivoting.
    for (std::size_t c = 0; c <= n; ++c) {
      std::size_t p = c;
      for (std::size_t r2 = c + 1; r2 <= n; ++r2) {
        if (std::abs(J[r2][c]) > std::abs(J[p][c])) p = r2;
      }
      std::swap(J[c], J[p]);
      for (std::size_t r2 = c + 1; r2 <= n; ++r2) {
        const double f = J[r2][c] / J[c][c];
        for (std::size_t k = c; k <= n + 1; ++k) J[r2][k] -= f * J[c][k];
      }
    }
    std::vector<double> dx(n + 1);
    for (std::size_t c = n + 1; c-- > 0;) {
      double s = J[c][n + 1];
      for (std::size_t k = c + 1; k <= n; ++k) s -= J[c][k] * dx[k];
      dx[c] = s / J[c][c];
    }
    for (std::size_t i = 0; i <= n; ++i) x[i] += dx[i];
  }
  for (std::size_t i = 0; i < n; ++i) CHECK_THAT(r.phi[i], WithinAbs(x[i], 1e-8));
  CHECK_THAT(r.diag.eta, WithinAbs(x[n], 1e-6));
}

TEST_CASE("scheme energy decay, mass conservation and solve counts", "[integrators][energy]") {
  const auto g = PeriodicGrid::cube(2, 32);
  const double eps = std::sqrt(0.005);
  const Field phi0 = seeded_random_field(g, 7, 0.03, 0.001);
  for (bool ch : {false, true}) {
    const GradientFlowModel model(
        spec(ch ? ModelKind::CahnHilliard : ModelKind::AllenCahn, ch ? 0.01 : 1.0, eps), g);
    for (SchemeKind kind : scalar_schemes) {
      CAPTURE(ch, to_string(kind));
      GradientFlowIntegrator it(model, scheme(kind, 0.1, 3), phi0);
      long accepted = 0;
      try {
        for (int n = 0; n < 60; ++n) {
          const double Eb = it.energy();
          const StepDiagnostics d = it.step();
          ++accepted;
          CHECK(d.E_after <= Eb + 1e-10 * (1.0 + std::abs(Eb)));
          if (ch) CHECK(std::abs(it.current().mean() - phi0.mean()) <= 1e-10);
          if (d.branch == Branch::Solve && kind == SchemeKind::CombinedBdf2) {
            REQUIRE(d.bdf2_coeffs);
            CHECK((*d.bdf2_coeffs)(d.eta) <= Eb + 1e-10);
          }
          if (d.branch == Branch::Solve && kind == SchemeKind::CombinedBdfk) {
            CHECK(d.E_after - Eb + d.eta * d.eta * d.dissipation <= 1e-10 * (1.0 + std::abs(Eb)));
          }
        }
      } catch (const StepAborted& e) {
        WARN(to_string(kind) << " aborted: " << e.what());
      }
      const SolveCounters& c = it.counters();
      CHECK(c.steps == accepted);
      if (kind == SchemeKind::ClassicCn) {
        CHECK(c.scalar_solves == c.steps);
        CHECK(c.linear_solves == 2 * c.steps);
      }
      if (kind == SchemeKind::CombinedCn) {
        CHECK(c.scalar_solves == c.solve_branches);
        CHECK(c.linear_solves == c.steps + c.solve_branches);
      }
    }
  }
}

TEST_CASE("BDFk one branch returns the plain BDF step", "[integrators]") {
  const auto g = PeriodicGrid::cube(2, 16);
  const GradientFlowModel ac(spec(ModelKind::AllenCahn, 1.0, 0.5), g);
  const Field phi0 = seeded_random_field(g, 11, 0.0, 0.3);
  GradientFlowIntegrator it(ac, scheme(SchemeKind::CombinedBdfk, 0.01, 2), phi0);
  it.step();
  const std::vector<Field> hist = it.history();
  const StepDiagnostics d = it.step();
  REQUIRE(d.branch == Branch::One);
  const BdfTableau tab = bdf_tableau(2);
  const Field hat = bdf_extrapolant(tab, hist);
  CHECK(it.current() == semi_implicit_bdf(ac, tab, hist, ac.nonlinear_term(hat), 0.01));
  CHECK(d.E_after == d.baseline_energy);
}

TEST_CASE("ternary pure phase is a fixed point", "[integrators][ternary]") {
  const auto g = PeriodicGrid::cube(2, 8, 2.0);
  ModelSpec s = spec(ModelKind::TernaryCH, 1e-2, 0.1);
  s.sigma = {1.0, 1.0, 1.0};
  s.lambda = 7.0;
  TernaryIntegrator it(TernaryModel(s, g), scheme(SchemeKind::TernaryCn, 0.1),
                       FieldPair{Field(g, 1.0), Field(g, 0.0)});
  for (const auto& d : it.run(3).steps) {
    CHECK(d.branch == Branch::Zero);
    CHECK(d.eta == 0.0);
  }
  CHECK(it.current()[0] == Field(g, 1.0));
  CHECK(it.current()[1] == Field(g, 0.0));
}

TEST_CASE("ternary multiplier root against a dense scan", "[integrators][ternary]") {
  const auto g = PeriodicGrid::cube(2, 16, 2.0);
  ModelSpec s = spec(ModelKind::TernaryCH, 1e-2, 0.2);
  s.sigma = {1.0, 0.9, 1.2};
  s.lambda = 7.0;
  const TernaryModel model(s, g);
  const FieldPair phi_n{seeded_random_field(g, 1, 0.3, 0.05), seeded_random_field(g, 1, 0.3, 0.05, 1)};
  const FieldPair star{seeded_random_field(g, 2, 0.35, 0.05), seeded_random_field(g, 2, 0.25, 0.05, 1)};
  const double dt = 0.5;
  const FieldPair N = model.nonlinear_term(star);
  const FieldPair bar = semi_implicit_ternary_cn(model, phi_n, N, dt);
  const FieldPair q = ternary_multiplier_direction(model, N, dt);
  const MultiplierOutcome o = solve_residual(cn_residual(model, phi_n, bar, q, N, 1.0), {});

  // Independent residual: 12(F(φ̄+ηq) - F(φⁿ), 1) - (1+η)(12∂F(φ*), φ̄+ηq-φⁿ).
  const auto [S1, S2, S3] = s.big_sigma();
  const auto hpoly = [](double x) { return x * x * (1 - x) * (1 - x); };
  const auto F = [&](double a, double b) {
    const double c = 1.0 - a - b;
    return 0.5 * S1 * hpoly(a) + 0.5 * S2 * hpoly(b) + 0.5 * S3 * hpoly(c) + 3.0 * 7.0 * a * a * b * b * c * c;
  };
  const auto R = [&](double eta) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double a = bar[0][i] + eta * q[0][i];
      const double b = bar[1][i] + eta * q[1][i];
      acc += 12.0 * (F(a, b) - F(phi_n[0][i], phi_n[1][i])) -
             (1.0 + eta) * (N[0][i] * (a - phi_n[0][i]) + N[1][i] * (b - phi_n[1][i]));
    }
    return acc * g.cell_volume();
  };
  double best = 1e300;
  double prev = R(-2.0);
  for (int i = 1; i <= 400000; ++i) {
    const double eta = -2.0 + 1e-5 * i;
    const double v = R(eta);
    if ((v <= 0.0) != (prev <= 0.0) && std::abs(eta - o.eta) < std::abs(best - o.eta)) best = eta;
    prev = v;
  }
  CHECK_THAT(o.eta, WithinAbs(best, 1e-5));
}

TEST_CASE("ternary accuracy-example data keeps the energy non-increasing", "[integrators][ternary]") {
  const auto g = PeriodicGrid::cube(2, 32, 2.0);
  ModelSpec s = spec(ModelKind::TernaryCH, 1e-5, 0.02);
  s.sigma = {1.0, 1.0, 1.0};
  s.lambda = 7.0;
  const double eps = s.epsilon;
  const auto bubble = [eps](double cx) {
    return [eps, cx](auto x) {
      const double d = std::hypot(x[0] - cx, x[1] - 1.0);
      return 0.5 * (1.0 + std::tanh((0.35 - d) / eps));
    };
  };
  TernaryIntegrator it(TernaryModel(s, g), scheme(SchemeKind::TernaryCn, 1e-3),
                       FieldPair{Field::from_function(g, bubble(1.37)), Field::from_function(g, bubble(0.63))});
  const double m0 = it.current()[0].mean();
  for (int n = 0; n < 20; ++n) {
    const double Eb = it.energy();
    const StepDiagnostics d = it.step();
    CHECK(d.E_after <= Eb + 1e-10 * (1.0 + std::abs(Eb)));
  }
  CHECK_THAT(it.current()[0].mean(), WithinAbs(m0, 1e-12));
}

TEST_CASE("manufactured forcing reproduces the exact solution", "[integrators]") {
  const auto g = PeriodicGrid::cube(2, 16);
  for (ModelKind kind : {ModelKind::AllenCahn, ModelKind::CahnHilliard}) {
    const GradientFlowModel model(spec(kind, 1.0, 1.0), g);
    const Field psi = Field::from_function(g, [](auto x) { return std::cos(x[0]) * std::cos(x[1]); });
    const Forcing f = manufactured_forcing(model, psi);
    double err_prev = 0.0;
    for (double dt : {0.05, 0.025}) {
      GradientFlowIntegrator it(model, scheme(SchemeKind::CombinedCn, dt), psi, 0.0, f);
      const auto t = it.run(static_cast<long>(std::lround(0.5 / dt)));
      CHECK(t.steps.back().multiplier_disabled);
      const double err = max_diff(it.current(), std::exp(-it.time()) * psi);
      if (err_prev > 0.0) CHECK(std::log2(err_prev / err) > 1.7);
      err_prev = err;
    }
  }
}

TEST_CASE("scheme configuration validation", "[integrators]") {
  SchemeConfig c;
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.dt = 0.1;
  c.kind = SchemeKind::CombinedBdfk;
  c.k = 5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  const auto g = PeriodicGrid::cube(2, 4);
  CHECK_THROWS_AS(GradientFlowIntegrator(GradientFlowModel(spec(ModelKind::AllenCahn, 1.0, 1.0), g),
                                         scheme(SchemeKind::TernaryCn, 0.1), Field(g)),
                  std::invalid_argument);
}
