#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gradflow/bdf.hpp"
#include "gradflow/errors.hpp"
#include "gradflow/models.hpp"
#include "gradflow/multiplier.hpp"

namespace gradflow {

enum class SchemeKind { ClassicCn, CombinedCn, CombinedBdf2, CombinedBdfk, TernaryCn };

inline std::string_view to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::ClassicCn: return "classic_cn";
    case SchemeKind::CombinedCn: return "combined_cn";
    case SchemeKind::CombinedBdf2: return "combined_bdf2";
    case SchemeKind::CombinedBdfk: return "combined_bdfk";
    case SchemeKind::TernaryCn: return "ternary_cn";
  }
  return "?";
}

struct SchemeConfig {
  SchemeKind kind = SchemeKind::CombinedCn;
  int k = 2;               // BDF order, used by CombinedBdfk
  double dt = 0.01;
  double tol_E = 1e-12;    // branch test E(φ̄) <= Eⁿ + tol_E (1 + |Eⁿ|); 0 gives a pure <=
  ScalarSolveConfig solve;
  bool verify = false;     // recompute Eⁿ from the stored field before each step

  int bdf_order() const noexcept {
    switch (kind) {
      case SchemeKind::CombinedBdf2: return 2;
      case SchemeKind::CombinedBdfk: return k;
      default: return 0;
    }
  }

  /// Number of past fields the scheme reads once startup is over.
  int history_depth() const noexcept { return std::max(bdf_order(), 2); }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("SchemeConfig: dt must be > 0");
    if (!(tol_E >= 0.0)) throw std::invalid_argument("SchemeConfig: tol_E must be >= 0");
    if (kind == SchemeKind::CombinedBdfk) (void)bdf_tableau(k);
    solve.validate();
  }
};

/// Work counters summed over a run.
struct SolveCounters {
  long steps = 0;
  long linear_solves = 0;       // constant-coefficient spectral solves
  long scalar_solves = 0;       // invocations of a scalar nonlinear solver
  long scalar_iterations = 0;
  long solve_branches = 0;

  SolveCounters& operator+=(const SolveCounters& o) {
    steps += o.steps;
    linear_solves += o.linear_solves;
    scalar_solves += o.scalar_solves;
    scalar_iterations += o.scalar_iterations;
    solve_branches += o.solve_branches;
    return *this;
  }
};

struct StepDiagnostics {
  long step = 0;              // index of the produced field, 1-based
  double time = 0.0;          // t_{n+1}
  std::string scheme;         // what actually ran, e.g. "combined_cn" or "combined_bdf3"
  int order = 0;              // BDF order used, 0 for Crank–Nicolson
  double eta = 0.0;
  Branch branch = Branch::Zero;
  bool multiplier_disabled = false;  // forcing present
  int iterations = 0;
  double E_before = 0.0;
  double E_after = 0.0;
  EnergyBreakdown energy;     // breakdown of E_after
  double baseline_energy = 0.0;
  double residual = 0.0;      // |defining equation| at η over its magnitude scale
  bool constrained_minimum = false;
  double dissipation = 0.0;   // BDFk: D
  std::optional<QuadraticEnergyCoeffs> bdf2_coeffs;
  int linear_solves = 0;
  int scalar_solves = 0;
  std::vector<double> residual_history;
  std::vector<double> other_roots;
};

/// Source term f(t) added to the right-hand side.
using Forcing = std::function<Field(double)>;

/// Everything a single scalar-model step reads. history[0] is φⁿ.
struct StepInput {
  std::span<const Field> history;
  double E_prev = 0.0;
  double time = 0.0;
  long step = 1;                    // index of the field being produced
  const Forcing* forcing = nullptr;
  const Field* extrapolant = nullptr;  // overrides φ* (CN) or φ̂ (BDF)
  int order = 0;                    // BDF order; 0 selects the scheme default
};

struct StepResult {
  Field phi;
  StepDiagnostics diag;
};

namespace detail {

inline bool energy_not_increased(double E_new, double E_old, double tol) {
  return E_new <= E_old + tol * (1.0 + std::abs(E_old));
}

/// Guard on solve branches: the scheme guarantees E_after <= E_before up to the
/// scalar tolerance, so a genuine increase means the step is not trustworthy.
inline void check_energy(const StepDiagnostics& d, double tol = 1e-10) {
  if (!energy_not_increased(d.E_after, d.E_before, tol)) {
    throw StepAborted(d.step, std::string(to_string(d.branch)),
                      "energy increased from " + std::to_string(d.E_before) + " to " +
                          std::to_string(d.E_after),
                      d.residual_history);
  }
}

inline SpectralField forcing_hat(const StepInput& in, double t) { return forward((*in.forcing)(t)); }

template <class Fn>
MultiplierOutcome guarded_solve(const StepInput& in, Fn&& fn) {
  try {
    return fn();
  } catch (const NoRootFound& e) {
    throw StepAborted(in.step, "solve", e.what());
  } catch (const EmptyFeasibleSet& e) {
    throw StepAborted(in.step, "solve", e.what());
  }
}

inline Field cn_default_extrapolant(std::span<const Field> h) {
  if (h.size() < 2) return h[0];
  Field s = 1.5 * h[0];
  s.axpy(-0.5, h[1]);
  return s;
}

}  // namespace detail

/// φ* = 3/2 φⁿ - 1/2 φⁿ⁻¹, or φⁿ when only one field is known.
inline Field cn_extrapolant(std::span<const Field> history) {
  return detail::cn_default_extrapolant(history);
}

/// CN rhs without the F' term and q rhs:
///   (I - ½ΔtGL)Φⁿ [+ Δt f̂],   -Δt G F̂'(φ*).
/// The plain semi-implicit step is their sum fed to (I + ½ΔtGL)⁻¹.
inline Field semi_implicit_cn(const GradientFlowModel& model, const Field& phi_n,
                              const Field& nonlinear_star, double dt,
                              const SpectralField* forcing_mid = nullptr) {
  const OperatorSymbol& g = model.mobility();
  const OperatorSymbol& gl = model.mobility_linear();
  const SpectralField Phi = forward(phi_n);
  const SpectralField N = forward(nonlinear_star);
  SpectralField R(model.grid());
  for (std::size_t m = 0; m < R.size(); ++m) {
    R[m] = (1.0 - 0.5 * dt * gl[m]) * Phi[m] - dt * (g[m] * N[m]);
  }
  if (forcing_mid) {
    for (std::size_t m = 0; m < R.size(); ++m) R[m] += dt * (*forcing_mid)[m];
  }
  solve_shifted_inplace(1.0, 0.5 * dt, gl, R);
  return backward(R);
}

/// q with (alpha + c GL) q = -Δt G F̂'.
inline Field multiplier_direction(const GradientFlowModel& model, const Field& nonlinear_star,
                                  double alpha, double c, double dt) {
  const OperatorSymbol& g = model.mobility();
  const SpectralField N = forward(nonlinear_star);
  SpectralField R(model.grid());
  for (std::size_t m = 0; m < R.size(); ++m) R[m] = -dt * (g[m] * N[m]);
  solve_shifted_inplace(alpha, c, model.mobility_linear(), R);
  return backward(R);
}

/// Plain semi-implicit BDF step: (α + ΔtGL)φ̄ = 𝓐_k(φ) - ΔtGF'(φ̂) [+ Δt f̂].
inline Field semi_implicit_bdf(const GradientFlowModel& model, const BdfTableau& tab,
                               std::span<const Field> history, const Field& nonlinear_hat,
                               double dt, const SpectralField* forcing_new = nullptr) {
  Field A = tab.history[0] * history[0];
  for (int j = 1; j < tab.k; ++j) A.axpy(tab.history[j], history[j]);
  const OperatorSymbol& g = model.mobility();
  const SpectralField Ah = forward(A);
  const SpectralField N = forward(nonlinear_hat);
  SpectralField R(model.grid());
  for (std::size_t m = 0; m < R.size(); ++m) R[m] = Ah[m] - dt * (g[m] * N[m]);
  if (forcing_new) {
    for (std::size_t m = 0; m < R.size(); ++m) R[m] += dt * (*forcing_new)[m];
  }
  solve_shifted_inplace(tab.alpha, dt, model.mobility_linear(), R);
  return backward(R);
}

inline Field bdf_extrapolant(const BdfTableau& tab, std::span<const Field> history) {
  Field e = tab.extrap[0] * history[0];
  for (int j = 1; j < tab.k; ++j) e.axpy(tab.extrap[j], history[j]);
  return e;
}

/// Classic Lagrange-multiplier CN: φⁿ⁺¹ = φ₁ + ηq with one scalar solve per step.
inline StepResult step_classic_cn(const GradientFlowModel& model, const SchemeConfig& cfg,
                                  const StepInput& in) {
  const double dt = cfg.dt;
  const Field& phi_n = in.history[0];
  const Field star = in.extrapolant ? *in.extrapolant : cn_extrapolant(in.history);
  const Field N = model.nonlinear_term(star);

  StepDiagnostics d;
  d.step = in.step;
  d.time = in.time + dt;
  d.scheme = "classic_cn";
  d.E_before = in.E_prev;

  std::optional<SpectralField> fh;
  if (in.forcing) fh = detail::forcing_hat(in, in.time + 0.5 * dt);
  // φ₁ carries the linear part (and the forcing); q the nonlinear direction.
  const OperatorSymbol& gl = model.mobility_linear();
  SpectralField R = forward(phi_n);
  for (std::size_t m = 0; m < R.size(); ++m) R[m] *= (1.0 - 0.5 * dt * gl[m]);
  if (fh) {
    for (std::size_t m = 0; m < R.size(); ++m) R[m] += dt * (*fh)[m];
  }
  solve_shifted_inplace(1.0, 0.5 * dt, gl, R);
  const Field phi1 = backward(R);
  const Field q = multiplier_direction(model, N, 1.0, 0.5 * dt, dt);
  d.linear_solves = 2;
  d.baseline_energy = model.free_energy(phi1).total;

  Field phi = phi1;
  if (in.forcing) {
    d.multiplier_disabled = true;
    d.branch = Branch::One;
    d.eta = 1.0;
    phi += q;
  } else {
    ScalarSolveConfig sc = cfg.solve;
    sc.initial_guess = 1.0;
    sc.natural = 1.0;
    const MultiplierResidual res = cn_residual(model, phi_n, phi1, q, N, 0.0);
    const MultiplierOutcome o = detail::guarded_solve(in, [&] { return solve_residual(res, sc); });
    d.scalar_solves = 1;
    d.branch = Branch::Solve;
    d.eta = o.eta;
    d.iterations = o.iterations;
    d.residual = o.residual / res.scale;
    d.residual_history = o.history;
    d.other_roots = o.other_roots;
    phi.axpy(o.eta, q);
  }
  d.energy = model.free_energy(phi);
  d.E_after = d.energy.total;
  if (!in.forcing) detail::check_energy(d);
  return {std::move(phi), std::move(d)};
}

/// Combined CN: plain semi-implicit CN, then η = 0 unless the energy rose.
inline StepResult step_combined_cn(const GradientFlowModel& model, const SchemeConfig& cfg,
                                   const StepInput& in) {
  const double dt = cfg.dt;
  const Field& phi_n = in.history[0];
  const Field star = in.extrapolant ? *in.extrapolant : cn_extrapolant(in.history);
  const Field N = model.nonlinear_term(star);

  StepDiagnostics d;
  d.step = in.step;
  d.time = in.time + dt;
  d.scheme = "combined_cn";
  d.E_before = in.E_prev;

  std::optional<SpectralField> fh;
  if (in.forcing) fh = detail::forcing_hat(in, in.time + 0.5 * dt);
  Field phi = semi_implicit_cn(model, phi_n, N, dt, fh ? &*fh : nullptr);
  d.linear_solves = 1;
  const EnergyBreakdown eb = model.free_energy(phi);
  d.baseline_energy = eb.total;

  if (in.forcing) {
    d.multiplier_disabled = true;
  } else if (!detail::energy_not_increased(eb.total, in.E_prev, cfg.tol_E)) {
    const Field q = multiplier_direction(model, N, 1.0, 0.5 * dt, dt);
    ++d.linear_solves;
    ScalarSolveConfig sc = cfg.solve;
    sc.initial_guess = 0.0;
    sc.natural = 0.0;
    const MultiplierResidual res = cn_residual(model, phi_n, phi, q, N, 1.0);
    const MultiplierOutcome o = detail::guarded_solve(in, [&] { return solve_residual(res, sc); });
    d.scalar_solves = 1;
    d.branch = Branch::Solve;
    d.eta = o.eta;
    d.iterations = o.iterations;
    d.residual = o.residual / res.scale;
    d.residual_history = o.history;
    d.other_roots = o.other_roots;
    phi.axpy(o.eta, q);
    d.energy = model.free_energy(phi);
    d.E_after = d.energy.total;
    detail::check_energy(d);
    return {std::move(phi), std::move(d)};
  }
  d.energy = eb;
  d.E_after = eb.total;
  return {std::move(phi), std::move(d)};
}

/// Combined BDF2: plain semi-implicit BDF2, then the constrained |Q| problem
/// when the energy rose.
inline StepResult step_combined_bdf2(const GradientFlowModel& model, const SchemeConfig& cfg,
                                     const StepInput& in) {
  if (in.history.size() < 2) throw std::invalid_argument("step_combined_bdf2: needs two fields");
  const double dt = cfg.dt;
  const BdfTableau tab = bdf_tableau(2);
  const Field hat = in.extrapolant ? *in.extrapolant : bdf_extrapolant(tab, in.history);
  const Field N = model.nonlinear_term(hat);

  StepDiagnostics d;
  d.step = in.step;
  d.time = in.time + dt;
  d.scheme = "combined_bdf2";
  d.order = 2;
  d.E_before = in.E_prev;

  std::optional<SpectralField> fh;
  if (in.forcing) fh = detail::forcing_hat(in, in.time + dt);
  Field phi = semi_implicit_bdf(model, tab, in.history, N, dt, fh ? &*fh : nullptr);
  d.linear_solves = 1;
  const EnergyBreakdown eb = model.free_energy(phi);
  d.baseline_energy = eb.total;

  if (in.forcing) {
    d.multiplier_disabled = true;
  } else if (!detail::energy_not_increased(eb.total, in.E_prev, cfg.tol_E)) {
    const Field q = multiplier_direction(model, N, tab.alpha, dt, dt);
    ++d.linear_solves;
    const Bdf2Problem p = bdf2_problem(model, in.history[0], in.history[1], phi, q, N);
    ScalarSolveConfig sc = cfg.solve;
    sc.initial_guess = 0.0;
    sc.natural = 0.0;
    sc.residual_scale *= p.Q.scale;
    const MultiplierOutcome o = detail::guarded_solve(
        in, [&] { return solve_bdf2_constrained(std::cref(p.Q), p.coeffs, in.E_prev, sc); });
    d.scalar_solves = 1;
    d.branch = Branch::Solve;
    d.eta = o.eta;
    d.iterations = o.iterations;
    d.residual = o.residual / p.Q.scale;
    d.constrained_minimum = o.constrained_minimum;
    d.residual_history = o.history;
    d.bdf2_coeffs = p.coeffs;
    phi.axpy(o.eta, q);
    d.energy = model.free_energy(phi);
    d.E_after = d.energy.total;
    // Without a feasible root of Q the energy bound covers only the
    // quadratic model; the true energy decides whether the step stands.
    detail::check_energy(d);
    return {std::move(phi), std::move(d)};
  }
  d.energy = eb;
  d.E_after = eb.total;
  return {std::move(phi), std::move(d)};
}

/// Combined BDFk: φⁿ⁺¹ = [1 - (1-η)^{k+1}] φ̄, η = 1 unless the energy rose.
inline StepResult step_combined_bdfk(const GradientFlowModel& model, const SchemeConfig& cfg,
                                     const StepInput& in) {
  const int k = in.order > 0 ? in.order : cfg.k;
  const BdfTableau tab = bdf_tableau(k);
  if (static_cast<int>(in.history.size()) < k) {
    throw std::invalid_argument("step_combined_bdfk: history shorter than the order");
  }
  const double dt = cfg.dt;
  const Field hat = in.extrapolant ? *in.extrapolant : bdf_extrapolant(tab, in.history);
  const Field N = model.nonlinear_term(hat);

  StepDiagnostics d;
  d.step = in.step;
  d.time = in.time + dt;
  d.scheme = "combined_bdf" + std::to_string(k);
  d.order = k;
  d.E_before = in.E_prev;
  d.eta = 1.0;
  d.branch = Branch::One;

  std::optional<SpectralField> fh;
  if (in.forcing) fh = detail::forcing_hat(in, in.time + dt);
  Field phi = semi_implicit_bdf(model, tab, in.history, N, dt, fh ? &*fh : nullptr);
  d.linear_solves = 1;
  const EnergyBreakdown eb = model.free_energy(phi);
  d.baseline_energy = eb.total;

  if (in.forcing) {
    d.multiplier_disabled = true;
  } else if (!detail::energy_not_increased(eb.total, in.E_prev, cfg.tol_E)) {
    // μ = Lφ̄ + F'(φ̂), D = Δt (Gμ, μ).
    const SpectralField Pb = forward(phi);
    const SpectralField Nh = forward(N);
    SpectralField Mu(model.grid());
    const OperatorSymbol& L = model.linear();
    for (std::size_t m = 0; m < Mu.size(); ++m) Mu[m] = L[m] * Pb[m] + Nh[m];
    d.dissipation = dt * symbol_inner(Mu, model.mobility(), Mu);
    const BdfkResidual R = bdfk_residual(model, phi, in.history[0], in.E_prev, d.dissipation, k);
    const MultiplierOutcome o =
        detail::guarded_solve(in, [&] { return solve_bdfk_residual(R, cfg.solve); });
    d.scalar_solves = 1;
    d.branch = Branch::Solve;
    d.eta = o.eta;
    d.iterations = o.iterations;
    d.residual = o.residual / R.scale;
    d.residual_history = o.history;
    d.other_roots = o.other_roots;
    phi *= BdfkResidual::factor(o.eta, k);
    d.energy = model.free_energy(phi);
    d.E_after = d.energy.total;
    detail::check_energy(d);
    return {std::move(phi), std::move(d)};
  }
  d.energy = eb;
  d.E_after = eb.total;
  return {std::move(phi), std::move(d)};
}

/// Accumulated output of run().
struct Trajectory {
  std::vector<double> times;
  std::vector<double> energies;
  std::vector<double> etas;
  std::vector<StepDiagnostics> steps;

  bool empty() const noexcept { return steps.empty(); }
  void append(const StepDiagnostics& d) {
    times.push_back(d.time);
    energies.push_back(d.E_after);
    etas.push_back(d.eta);
    steps.push_back(d);
  }
};

/// Time stepper for the single-field models.
///
/// Startup from φ⁰ alone: the first step is CN with φ* = φ⁰ (classic CN for
/// the classic scheme, combined CN otherwise). For BDF orders k >= 3 the first
/// step instead uses φ* = ½(φ⁰ + φ̃¹), φ̃¹ being the plain CN step with
/// φ* = φ⁰, so that its local error does not cap the order; steps 2..k-1 use
/// the combined BDF scheme of order equal to the available history.
class GradientFlowIntegrator {
 public:
  using Callback = std::function<void(const StepDiagnostics&, const GradientFlowIntegrator&)>;

  GradientFlowIntegrator(GradientFlowModel model, SchemeConfig cfg, Field phi0, double t0 = 0.0,
                         Forcing forcing = {})
      : model_(std::move(model)), cfg_(std::move(cfg)), forcing_(std::move(forcing)), time_(t0) {
    cfg_.validate();
    if (cfg_.kind == SchemeKind::TernaryCn) {
      throw std::invalid_argument("GradientFlowIntegrator: use TernaryIntegrator for ternary_cn");
    }
    require_same_grid(phi0.grid(), model_.grid(), "GradientFlowIntegrator");
    if (!phi0.all_finite()) throw std::invalid_argument("initial field is not finite");
    energy_ = model_.free_energy(phi0);
    history_.push_back(std::move(phi0));
  }

  const GradientFlowModel& model() const noexcept { return model_; }
  const SchemeConfig& config() const noexcept { return cfg_; }
  const std::vector<Field>& history() const noexcept { return history_; }
  const Field& current() const noexcept { return history_.front(); }
  double energy() const noexcept { return energy_.total; }
  const EnergyBreakdown& energy_breakdown() const noexcept { return energy_; }
  double time() const noexcept { return time_; }
  long step_index() const noexcept { return step_; }
  const SolveCounters& counters() const noexcept { return counters_; }
  bool forced() const noexcept { return static_cast<bool>(forcing_); }

  /// Scheme label of the next step under the startup policy.
  std::string next_scheme() const {
    const int avail = static_cast<int>(history_.size());
    switch (cfg_.kind) {
      case SchemeKind::ClassicCn: return "classic_cn";
      case SchemeKind::CombinedCn: return "combined_cn";
      case SchemeKind::CombinedBdf2: return avail < 2 ? "combined_cn" : "combined_bdf2";
      case SchemeKind::CombinedBdfk:
        if (cfg_.k >= 2 && avail < 2) return "combined_cn";
        return "combined_bdf" + std::to_string(std::min(cfg_.k, avail));
      case SchemeKind::TernaryCn: break;
    }
    return "?";
  }

  StepDiagnostics step() {
    StepInput in;
    in.history = history_;
    in.E_prev = cfg_.verify ? model_.free_energy(history_.front()).total : energy_.total;
    in.time = time_;
    in.step = step_ + 1;
    in.forcing = forcing_ ? &forcing_ : nullptr;

    const int avail = static_cast<int>(history_.size());
    std::optional<Field> startup_star;
    int extra_solves = 0;
    StepResult r;
    switch (cfg_.kind) {
      case SchemeKind::ClassicCn: r = step_classic_cn(model_, cfg_, in); break;
      case SchemeKind::CombinedCn: r = step_combined_cn(model_, cfg_, in); break;
      case SchemeKind::CombinedBdf2:
        r = avail < 2 ? step_combined_cn(model_, cfg_, in) : step_combined_bdf2(model_, cfg_, in);
        break;
      case SchemeKind::CombinedBdfk:
        if (cfg_.k >= 2 && avail < 2) {
          if (cfg_.k >= 3) {
            startup_star = predictor_corrector_star(in);
            in.extrapolant = &*startup_star;
            extra_solves = 1;
          }
          r = step_combined_cn(model_, cfg_, in);
        } else {
          in.order = std::min(cfg_.k, avail);
          r = step_combined_bdfk(model_, cfg_, in);
        }
        break;
      case SchemeKind::TernaryCn: break;
    }
    r.diag.linear_solves += extra_solves;
    accept(std::move(r));
    return last_;
  }

  Trajectory run(long n_steps, const Callback& cb = {}) {
    Trajectory t;
    for (long i = 0; i < n_steps; ++i) {
      const StepDiagnostics& d = step();
      t.append(d);
      if (cb) cb(d, *this);
    }
    return t;
  }

 private:
  Field predictor_corrector_star(const StepInput& in) {
    const Field& phi0 = history_.front();
    std::optional<SpectralField> fh;
    if (in.forcing) fh = forward((*in.forcing)(in.time + 0.5 * cfg_.dt));
    Field pred = semi_implicit_cn(model_, phi0, model_.nonlinear_term(phi0), cfg_.dt,
                                  fh ? &*fh : nullptr);
    pred += phi0;
    pred *= 0.5;
    return pred;
  }

  void accept(StepResult r) {
    if (!r.phi.all_finite()) {
      throw StepAborted(r.diag.step, std::string(to_string(r.diag.branch)),
                        "non-finite field produced");
    }
    history_.insert(history_.begin(), std::move(r.phi));
    if (static_cast<int>(history_.size()) > cfg_.history_depth()) history_.pop_back();
    energy_ = r.diag.energy;
    time_ = r.diag.time;
    step_ = r.diag.step;
    counters_.steps += 1;
    counters_.linear_solves += r.diag.linear_solves;
    counters_.scalar_solves += r.diag.scalar_solves;
    counters_.scalar_iterations += r.diag.iterations;
    if (r.diag.branch == Branch::Solve) counters_.solve_branches += 1;
    last_ = std::move(r.diag);
  }

  GradientFlowModel model_;
  SchemeConfig cfg_;
  Forcing forcing_;
  std::vector<Field> history_;
  EnergyBreakdown energy_;
  double time_ = 0.0;
  long step_ = 0;
  SolveCounters counters_;
  StepDiagnostics last_;
};

// ---------------------------------------------------------------------------
// Ternary Cahn–Hilliard

struct TernaryStepInput {
  std::span<const FieldPair> history;
  double E_prev = 0.0;
  double time = 0.0;
  long step = 1;
};

struct TernaryStepResult {
  FieldPair phi;
  StepDiagnostics diag;
};

/// Plain semi-implicit ternary CN:
///   (I + ½Δt|k|⁴ D C) Φ̄ = (I - ½Δt|k|⁴ D C) Φⁿ - Δt|k|² D N̂(φ*),
/// with D = diag(M/Σl), C the (3ε²/4) Σ coupling and N = 12 ∂F.
inline FieldPair semi_implicit_ternary_cn(const TernaryModel& model, const FieldPair& phi_n,
                                          const FieldPair& nonlinear_star, double dt) {
  const Mat2& MC = model.mobility_coupling();
  const auto& mob = model.mobility();
  const OperatorSymbol& k2 = model.k2();
  const OperatorSymbol& k4 = model.k4();
  const SpectralField P0 = forward(phi_n[0]);
  const SpectralField P1 = forward(phi_n[1]);
  const SpectralField N0 = forward(nonlinear_star[0]);
  const SpectralField N1 = forward(nonlinear_star[1]);
  SpectralField R0(model.grid());
  SpectralField R1(model.grid());
  for (std::size_t m = 0; m < R0.size(); ++m) {
    const double h = 0.5 * dt * k4[m];
    R0[m] = P0[m] - h * (MC[0][0] * P0[m] + MC[0][1] * P1[m]) - dt * k2[m] * mob[0] * N0[m];
    R1[m] = P1[m] - h * (MC[1][0] * P0[m] + MC[1][1] * P1[m]) - dt * k2[m] * mob[1] * N1[m];
  }
  solve_block2_inplace(1.0, 0.5 * dt, MC, k4, R0, R1);
  return {backward(R0), backward(R1)};
}

inline FieldPair ternary_multiplier_direction(const TernaryModel& model,
                                              const FieldPair& nonlinear_star, double dt) {
  const auto& mob = model.mobility();
  const OperatorSymbol& k2 = model.k2();
  SpectralField R0 = forward(nonlinear_star[0]);
  SpectralField R1 = forward(nonlinear_star[1]);
  for (std::size_t m = 0; m < R0.size(); ++m) {
    R0[m] *= -dt * k2[m] * mob[0];
    R1[m] *= -dt * k2[m] * mob[1];
  }
  solve_block2_inplace(1.0, 0.5 * dt, model.mobility_coupling(), model.k4(), R0, R1);
  return {backward(R0), backward(R1)};
}

inline FieldPair ternary_extrapolant(std::span<const FieldPair> h) {
  if (h.size() < 2) return h[0];
  FieldPair s{1.5 * h[0][0], 1.5 * h[0][1]};
  s[0].axpy(-0.5, h[1][0]);
  s[1].axpy(-0.5, h[1][1]);
  return s;
}

/// Combined ternary CN with one shared η for both unknowns.
inline TernaryStepResult step_ternary_cn(const TernaryModel& model, const SchemeConfig& cfg,
                                         const TernaryStepInput& in) {
  const double dt = cfg.dt;
  const FieldPair& phi_n = in.history[0];
  const FieldPair N = model.nonlinear_term(ternary_extrapolant(in.history));

  StepDiagnostics d;
  d.step = in.step;
  d.time = in.time + dt;
  d.scheme = "ternary_cn";
  d.E_before = in.E_prev;

  FieldPair phi = semi_implicit_ternary_cn(model, phi_n, N, dt);
  d.linear_solves = 1;
  const EnergyBreakdown eb = model.free_energy(phi);
  d.baseline_energy = eb.total;
  d.energy = eb;
  d.E_after = eb.total;
  if (detail::energy_not_increased(eb.total, in.E_prev, cfg.tol_E)) return {std::move(phi), d};

  const FieldPair q = ternary_multiplier_direction(model, N, dt);
  ++d.linear_solves;
  const MultiplierResidual res = cn_residual(model, phi_n, phi, q, N, 1.0);
  MultiplierOutcome o;
  try {
    ScalarSolveConfig sc = cfg.solve;
    sc.initial_guess = 0.0;
    sc.natural = 0.0;
    o = solve_residual(res, sc);
  } catch (const NoRootFound& e) {
    throw StepAborted(in.step, "solve", e.what());
  }
  d.scalar_solves = 1;
  d.branch = Branch::Solve;
  d.eta = o.eta;
  d.iterations = o.iterations;
  d.residual = o.residual / res.scale;
  d.residual_history = o.history;
  d.other_roots = o.other_roots;
  phi[0].axpy(o.eta, q[0]);
  phi[1].axpy(o.eta, q[1]);
  d.energy = model.free_energy(phi);
  d.E_after = d.energy.total;
  detail::check_energy(d);
  return {std::move(phi), std::move(d)};
}

class TernaryIntegrator {
 public:
  using Callback = std::function<void(const StepDiagnostics&, const TernaryIntegrator&)>;

  TernaryIntegrator(TernaryModel model, SchemeConfig cfg, FieldPair phi0, double t0 = 0.0)
      : model_(std::move(model)), cfg_(std::move(cfg)), time_(t0) {
    cfg_.kind = SchemeKind::TernaryCn;
    cfg_.validate();
    for (const Field& f : phi0) {
      require_same_grid(f.grid(), model_.grid(), "TernaryIntegrator");
      if (!f.all_finite()) throw std::invalid_argument("initial field is not finite");
    }
    energy_ = model_.free_energy(phi0);
    history_.push_back(std::move(phi0));
  }

  const TernaryModel& model() const noexcept { return model_; }
  const SchemeConfig& config() const noexcept { return cfg_; }
  const std::vector<FieldPair>& history() const noexcept { return history_; }
  const FieldPair& current() const noexcept { return history_.front(); }
  double energy() const noexcept { return energy_.total; }
  const EnergyBreakdown& energy_breakdown() const noexcept { return energy_; }
  double time() const noexcept { return time_; }
  long step_index() const noexcept { return step_; }
  const SolveCounters& counters() const noexcept { return counters_; }

  StepDiagnostics step() {
    TernaryStepInput in;
    in.history = history_;
    in.E_prev = cfg_.verify ? model_.free_energy(history_.front()).total : energy_.total;
    in.time = time_;
    in.step = step_ + 1;
    TernaryStepResult r = step_ternary_cn(model_, cfg_, in);
    for (const Field& f : r.phi) {
      if (!f.all_finite()) throw StepAborted(in.step, "zero", "non-finite field produced");
    }
    history_.insert(history_.begin(), std::move(r.phi));
    if (history_.size() > 2) history_.pop_back();
    energy_ = r.diag.energy;
    time_ = r.diag.time;
    step_ = r.diag.step;
    counters_.steps += 1;
    counters_.linear_solves += r.diag.linear_solves;
    counters_.scalar_solves += r.diag.scalar_solves;
    counters_.scalar_iterations += r.diag.iterations;
    if (r.diag.branch == Branch::Solve) counters_.solve_branches += 1;
    return r.diag;
  }

  Trajectory run(long n_steps, const Callback& cb = {}) {
    Trajectory t;
    for (long i = 0; i < n_steps; ++i) {
      const StepDiagnostics d = step();
      t.append(d);
      if (cb) cb(d, *this);
    }
    return t;
  }

 private:
  TernaryModel model_;
  SchemeConfig cfg_;
  std::vector<FieldPair> history_;
  EnergyBreakdown energy_;
  double time_ = 0.0;
  long step_ = 0;
  SolveCounters counters_;
};

// ---------------------------------------------------------------------------
// Manufactured solutions φ(x, t) = e^{-t} ψ(x)

/// Forcing f = ∂tφ + G(Lφ + F'(φ)) for φ = e^{-t}ψ, evaluated spectrally.
inline Forcing manufactured_forcing(const GradientFlowModel& model, const Field& psi) {
  const SpectralField Psi = forward(psi);
  return [model, psi, Psi](double t) {
    const double e = std::exp(-t);
    const SpectralField N = forward(model.nonlinear_term(e * psi));
    const OperatorSymbol& g = model.mobility();
    const OperatorSymbol& L = model.linear();
    SpectralField F(model.grid());
    for (std::size_t m = 0; m < F.size(); ++m) {
      F[m] = -e * Psi[m] + g[m] * (e * L[m] * Psi[m] + N[m]);
    }
    return backward(F);
  };
}

}  // namespace gradflow
