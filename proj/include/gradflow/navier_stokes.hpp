#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gradflow/errors.hpp"
#include "gradflow/integrators.hpp"
#include "gradflow/multiplier.hpp"
#include "gradflow/spectral.hpp"

namespace gradflow {

/// Two-component periodic velocity field (u, v).
using VelocityField = VectorField;

struct StokesSolution {
  VelocityField w;
  Field pressure;
};

/// Solves (1/Δt - νΔ)w + ∇pr = rhs, ∇·w = 0. The gradient part of rhs is
/// the pressure gradient; its zero mode is fixed to 0.
inline StokesSolution stokes_solve(const VelocityField& rhs, double nu, double dt) {
  if (rhs.size() != 2 || rhs[0].grid().dims() != 2) {
    throw std::invalid_argument("stokes_solve: expects a 2D two-component field");
  }
  if (!(nu > 0.0) || !(dt > 0.0)) throw std::invalid_argument("stokes_solve: need nu, dt > 0");
  const PeriodicGrid& grid = rhs[0].grid();
  std::vector<SpectralField> V{forward(rhs[0]), forward(rhs[1])};
  SpectralField P(grid);
  leray_split_inplace(V, &P);
  const OperatorSymbol k2 = symbols::neg_laplacian(grid);
  for (SpectralField& C : V) solve_shifted_inplace(1.0 / dt, nu, k2, C);
  return {{backward(V[0]), backward(V[1])}, backward(P)};
}

/// Convective form (u·∇)u, component i = Σ_j u_j ∂_j u_i.
inline VelocityField advect(const VelocityField& u) {
  VelocityField out;
  out.reserve(u.size());
  for (const Field& ui : u) {
    const VectorField grad = gradient(ui);
    Field acc(ui.grid());
    for (std::size_t j = 0; j < u.size(); ++j) {
      for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += u[j][p] * grad[j][p];
    }
    out.push_back(std::move(acc));
  }
  return out;
}

inline double kinetic_energy(const VelocityField& u) { return 0.5 * vector_inner(u, u); }

/// Max-norm of ∇·u.
inline double divergence_norm(const VelocityField& u) { return divergence(u).max_abs(); }

inline double velocity_max_abs(const VelocityField& u) {
  double m = 0.0;
  for (const Field& c : u) m = std::max(m, c.max_abs());
  return m;
}

struct NsStepDiagnostics : StepDiagnostics {
  double divergence = 0.0;  // max |∇·uⁿ⁺¹|
};

struct NsState {
  VelocityField u;
  Field p;
  double nu = 0.1;
  double dt = 0.01;
  double E_prev = 0.0;
  double time = 0.0;
  long step = 0;

  static NsState make(VelocityField u0, double nu, double dt, double t0 = 0.0) {
    if (!(nu > 0.0) || !(dt > 0.0)) throw std::invalid_argument("NsState: need nu, dt > 0");
    NsState s;
    s.p = Field(u0.at(0).grid());
    s.E_prev = kinetic_energy(u0);
    s.u = std::move(u0);
    s.nu = nu;
    s.dt = dt;
    s.time = t0;
    return s;
  }
};

/// Plain semi-implicit backward-Euler projection step (the η = 0 output).
inline StokesSolution ns_baseline(const VelocityField& u_n, const VelocityField& adv, double nu,
                                  double dt) {
  VelocityField rhs;
  for (std::size_t i = 0; i < u_n.size(); ++i) {
    Field r = (1.0 / dt) * u_n[i];
    r -= adv[i];
    rhs.push_back(std::move(r));
  }
  return stokes_solve(rhs, nu, dt);
}

/// One combined step; advances `state` in place.
inline NsStepDiagnostics step_ns_combined(NsState& state, double tol_E = 1e-12,
                                          const ScalarSolveConfig& scfg = {}) {
  const double dt = state.dt;
  const double nu = state.nu;
  const VelocityField adv = advect(state.u);

  NsStepDiagnostics d;
  d.step = state.step + 1;
  d.time = state.time + dt;
  d.scheme = "ns_combined";
  d.order = 1;
  d.E_before = state.E_prev;

  StokesSolution bar = ns_baseline(state.u, adv, nu, dt);
  d.linear_solves = 1;
  d.baseline_energy = kinetic_energy(bar.w);

  if (!(d.baseline_energy <= state.E_prev + tol_E * (1.0 + std::abs(state.E_prev)))) {
    VelocityField neg;
    for (const Field& a : adv) neg.push_back(-1.0 * a);
    const StokesSolution two = stokes_solve(neg, nu, dt);
    ++d.linear_solves;
    const NsEtaCoeffs c = ns_eta_coeffs(bar.w, two.w, state.u, nu, dt);
    MultiplierOutcome o;
    try {
      o = solve_ns_eta(c, scfg);
    } catch (const NoRootFound& e) {
      throw StepAborted(d.step, "solve", e.what());
    }
    d.scalar_solves = 1;
    d.branch = Branch::Solve;
    d.eta = o.eta;
    d.residual = o.residual / std::max(1.0, c.scale());
    d.other_roots = o.other_roots;
    for (std::size_t i = 0; i < bar.w.size(); ++i) bar.w[i].axpy(o.eta, two.w[i]);
    bar.pressure.axpy(o.eta, two.pressure);
  }

  d.E_after = kinetic_energy(bar.w);
  d.energy = {d.E_after, 0.0, d.E_after};
  d.divergence = divergence_norm(bar.w);
  if (d.branch == Branch::Solve) detail::check_energy(d);
  for (const Field& c : bar.w) {
    if (!c.all_finite()) throw StepAborted(d.step, std::string(to_string(d.branch)), "non-finite velocity");
  }

  state.u = std::move(bar.w);
  state.p = std::move(bar.pressure);
  state.E_prev = d.E_after;
  state.time = d.time;
  state.step = d.step;
  return d;
}

struct NsTrajectory {
  std::vector<NsStepDiagnostics> steps;
  SolveCounters counters;
};

inline NsTrajectory run_ns(NsState& state, long n_steps, double tol_E = 1e-12,
                           const std::function<void(const NsStepDiagnostics&, const NsState&)>& cb = {}) {
  NsTrajectory t;
  for (long i = 0; i < n_steps; ++i) {
    NsStepDiagnostics d = step_ns_combined(state, tol_E);
    t.counters.steps += 1;
    t.counters.linear_solves += d.linear_solves;
    t.counters.scalar_solves += d.scalar_solves;
    if (d.branch == Branch::Solve) t.counters.solve_branches += 1;
    if (cb) cb(d, state);
    t.steps.push_back(std::move(d));
  }
  return t;
}

/// Taylor–Green vortex u = e^{-2νt}(cos x sin y, -sin x cos y) on [0, 2π)².
inline VelocityField taylor_green(const PeriodicGrid& grid, double amplitude = 1.0) {
  return {Field::from_function(grid, [amplitude](auto x) { return amplitude * std::cos(x[0]) * std::sin(x[1]); }),
          Field::from_function(grid, [amplitude](auto x) { return -amplitude * std::sin(x[0]) * std::cos(x[1]); })};
}

}  // namespace gradflow
