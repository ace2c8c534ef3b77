#pragma once

#include <algorithm>
#include <utility>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gradflow/models.hpp"

namespace gradflow {

enum class Branch { Zero, Solve, One };

inline std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Zero: return "zero";
    case Branch::Solve: return "solve";
    case Branch::One: return "one";
  }
  return "?";
}

struct ScalarSolveConfig {
  double tol = 1e-12;               // on |Q| / residual_scale
  int max_iter = 50;                // Newton iterations before falling back
  double bracket_halfwidth = 2.0;
  double initial_guess = 0.0;
  std::optional<double> natural;    // preferred root location; defaults to initial_guess
  double residual_scale = 1.0;
  bool collect_roots = false;       // refine every bracketed root for diagnostics

  double natural_value() const noexcept { return natural.value_or(initial_guess); }

  void validate() const {
    if (!(tol > 0.0) || max_iter < 1 || !(bracket_halfwidth > 0.0) || !(residual_scale > 0.0)) {
      throw std::invalid_argument("ScalarSolveConfig: need tol > 0, max_iter >= 1, halfwidth > 0");
    }
  }
};

struct ScalarRoot {
  double root = 0.0;
  int iterations = 0;
  double residual = 0.0;             // |Q(root)|
  std::vector<double> history;       // |Q| along the iteration
  std::vector<double> other_roots;   // filled when collect_roots is set
};

using ScalarFunction = std::function<double(double)>;

namespace detail {

inline bool tiny_interval(double a, double b) noexcept {
  const double m = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * m;
}

/// Illinois regula falsi on a sign-change bracket. Stops on |Q| <= tol or when
/// the bracket reaches a few ulps.
inline double refine_bracket(const ScalarFunction& Q, double a, double fa, double b, double fb,
                             double tol, ScalarRoot& out) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  int side = 0;
  for (int it = 0; it < 400; ++it) {
    double c = (it >= 100 || it % 8 == 7) ? 0.5 * (a + b) : (a * fb - b * fa) / (fb - fa);
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    const double fc = Q(c);
    ++out.iterations;
    out.history.push_back(std::abs(fc));
    if (!std::isfinite(fc)) throw NoRootFound("scalar solve: residual not finite at " + std::to_string(c));
    if (std::abs(fc) <= tol) return c;
    if ((fc > 0.0) == (fb > 0.0)) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
    if (tiny_interval(a, b)) return std::abs(fa) < std::abs(fb) ? a : b;
  }
  return std::abs(fa) < std::abs(fb) ? a : b;
}

struct SignChange {
  double a, fa, b, fb;
};

/// Sign changes of Q on n uniform subintervals of [lo, hi].
inline std::vector<SignChange> scan_sign_changes(const ScalarFunction& Q, double lo, double hi,
                                                 int n) {
  std::vector<SignChange> out;
  double xa = lo;
  double fa = Q(xa);
  for (int i = 1; i <= n; ++i) {
    const double xb = (i == n) ? hi : lo + (hi - lo) * i / n;
    const double fb = Q(xb);
    if (std::isfinite(fa) && std::isfinite(fb)) {
      if (fa == 0.0) out.push_back({xa, fa, xa, fa});
      else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) out.push_back({xa, fa, xb, fb});
    }
    xa = xb;
    fa = fb;
  }
  if (std::isfinite(fa) && fa == 0.0) out.push_back({xa, fa, xa, fa});
  return out;
}

inline double distance_to(const SignChange& s, double x) noexcept {
  if (x >= std::min(s.a, s.b) && x <= std::max(s.a, s.b)) return 0.0;
  return std::min(std::abs(s.a - x), std::abs(s.b - x));
}

}  // namespace detail

/// Root of Q near cfg.initial_guess.
///
/// Newton with a central-difference slope first; on failure, a 64-point scan of
/// [guess - w, guess + w] for sign changes followed by bracketed refinement.
/// When several roots are visible the one closest to the natural value wins.
inline ScalarRoot solve_scalar(const ScalarFunction& Q, const ScalarSolveConfig& cfg) {
  cfg.validate();
  const double tol = cfg.tol * cfg.residual_scale;
  const double natural = cfg.natural_value();
  const double guess = cfg.initial_guess;
  const double w = cfg.bracket_halfwidth;
  ScalarRoot out;

  std::optional<double> newton_root;
  {
    double x = guess;
    for (int it = 0; it <= cfg.max_iter; ++it) {
      const double f = Q(x);
      out.history.push_back(std::abs(f));
      if (!std::isfinite(f)) break;
      if (std::abs(f) <= tol) {
        newton_root = x;
        break;
      }
      if (it == cfg.max_iter) break;
      const double h = 1e-7 * (1.0 + std::abs(x));
      const double d = (Q(x + h) - Q(x - h)) / (2.0 * h);
      if (!std::isfinite(d) || d == 0.0) break;
      const double xn = x - f / d;
      ++out.iterations;
      if (!std::isfinite(xn) || std::abs(xn - guess) > 8.0 * w) break;
      if (detail::tiny_interval(x, xn)) {
        // Stagnated at rounding level; accept if Q changes sign within a few ulps.
        const double delta = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x));
        const double fl = Q(x - delta);
        const double fr = Q(x + delta);
        if ((fl <= 0.0 && fr >= 0.0) || (fl >= 0.0 && fr <= 0.0)) newton_root = x;
        break;
      }
      x = xn;
    }
  }

  double root;
  if (newton_root) {
    root = *newton_root;
    // A root strictly closer to the natural value may have been jumped over;
    // look on both sides within the distance already reached.
    const double reach = (1.0 - 1e-6) * std::abs(root - natural);
    if (reach > 1e-9 * (1.0 + std::abs(natural))) {
      const auto changes = detail::scan_sign_changes(Q, natural - reach, natural + reach, 64);
      if (!changes.empty()) {
        const auto s = *std::min_element(changes.begin(), changes.end(), [&](const auto& p, const auto& q) {
          return detail::distance_to(p, natural) < detail::distance_to(q, natural);
        });
        root = detail::refine_bracket(Q, s.a, s.fa, s.b, s.fb, tol, out);
      }
    }
  } else {
    const auto changes = detail::scan_sign_changes(Q, guess - w, guess + w, 64);
    if (changes.empty()) {
      throw NoRootFound("scalar solve: Newton failed and no sign change in [" +
                        std::to_string(guess - w) + ", " + std::to_string(guess + w) + "]");
    }
    const auto best = std::min_element(changes.begin(), changes.end(), [&](const auto& p, const auto& q) {
      return detail::distance_to(p, natural) < detail::distance_to(q, natural);
    });
    root = detail::refine_bracket(Q, best->a, best->fa, best->b, best->fb, tol, out);
  }

  if (cfg.collect_roots) {
    ScalarRoot scratch;
    for (const auto& s : detail::scan_sign_changes(Q, natural - w, natural + w, 64)) {
      const double r = detail::refine_bracket(Q, s.a, s.fa, s.b, s.fb, tol, scratch);
      if (std::abs(r - root) > 1e-9 * (1.0 + std::abs(root))) out.other_roots.push_back(r);
    }
  }

  out.root = root;
  out.residual = std::abs(Q(root));
  return out;
}

/// Result of one multiplier determination.
struct MultiplierOutcome {
  double eta = 0.0;
  Branch branch = Branch::Zero;
  int iterations = 0;
  double residual = 0.0;
  bool constrained_minimum = false;  // BDF2: no root of Q was feasible
  std::vector<double> history;
  std::vector<double> other_roots;
};

/// R(η) = ΔP(η) - (offset + η)(p0 + η p1):
///   ΔP(η) = (w F(base + η q) - ref, 1) evaluated pointwise,
///   p0, p1 the F' pairings with the η-independent and η-linear parts.
/// offset = 1 gives the zero-factor CN and BDF2 equations, offset = 0 the
/// classic CN equation.
struct MultiplierResidual {
  ScalarFunction potential_difference;
  double p0 = 0.0;
  double p1 = 0.0;
  double offset = 1.0;
  double scale = 1.0;

  double operator()(double eta) const {
    return potential_difference(eta) - (offset + eta) * (p0 + eta * p1);
  }
};

/// CN residual for a single-field model:
/// (F(base + ηq) - F(φⁿ), 1) - (offset + η)(F'(φ*), base + ηq - φⁿ).
inline MultiplierResidual cn_residual(const GradientFlowModel& model, const Field& phi_n,
                                      const Field& base, const Field& q,
                                      const Field& fprime_star, double offset) {
  MultiplierResidual r;
  const Field ref = model.potential_density(phi_n);
  r.potential_difference = model.potential_line(base, q, ref);
  r.p0 = inner(fprime_star, base - phi_n);
  r.p1 = inner(fprime_star, q);
  r.offset = offset;
  double pn = 0.0;
  for (double v : ref.values()) pn += std::abs(v);
  r.scale = 1.0 + pn * model.grid().cell_volume() + std::abs(r.p0);
  return r;
}

/// Ternary CN residual with the F' pairing summed over both unknowns.
inline MultiplierResidual cn_residual(const TernaryModel& model, const FieldPair& phi_n,
                                      const FieldPair& base, const FieldPair& q,
                                      const FieldPair& fprime_star, double offset) {
  MultiplierResidual r;
  const Field ref = model.potential_density(phi_n);
  r.potential_difference = model.potential_line(base, q, ref);
  r.p0 = inner(fprime_star[0], base[0] - phi_n[0]) + inner(fprime_star[1], base[1] - phi_n[1]);
  r.p1 = inner(fprime_star[0], q[0]) + inner(fprime_star[1], q[1]);
  r.offset = offset;
  double pn = 0.0;
  for (double v : ref.values()) pn += std::abs(v);
  r.scale = 1.0 + pn * model.grid().cell_volume() + std::abs(r.p0);
  return r;
}

inline MultiplierOutcome solve_residual(const MultiplierResidual& R, ScalarSolveConfig cfg) {
  cfg.residual_scale *= R.scale;
  const ScalarRoot s = solve_scalar(std::cref(R), cfg);
  MultiplierOutcome o;
  o.eta = s.root;
  o.branch = Branch::Solve;
  o.iterations = s.iterations;
  o.residual = s.residual;
  o.history = s.history;
  o.other_roots = s.other_roots;
  return o;
}

/// Zero-factor CN multiplier for the combined scheme (initial guess 0).
inline MultiplierOutcome solve_cn_residual(const GradientFlowModel& model, const Field& phi_n,
                                           const Field& phi_bar, const Field& q,
                                           const Field& fprime_star, ScalarSolveConfig cfg) {
  cfg.initial_guess = 0.0;
  cfg.natural = 0.0;
  return solve_residual(cn_residual(model, phi_n, phi_bar, q, fprime_star, 1.0), cfg);
}

/// Quadratic representation E^{n+1} = aη² + bη + c of the BDF2 energy.
struct QuadraticEnergyCoeffs {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double operator()(double eta) const noexcept { return (a * eta + b) * eta + c; }
};

/// The BDF2 pieces needed on the solve branch: Q of the optimal-choice problem
/// and the a, b, c coefficients, sharing the same pairings.
struct Bdf2Problem {
  MultiplierResidual Q;
  QuadraticEnergyCoeffs coeffs;
};

inline Bdf2Problem bdf2_problem(const GradientFlowModel& model, const Field& phi_n,
                                const Field& phi_nm1, const Field& phi_bar, const Field& q,
                                const Field& fprime_hat) {
  Bdf2Problem p;
  Field ref = 4.0 * model.potential_density(phi_n);
  ref -= model.potential_density(phi_nm1);
  double ref_total = 0.0;
  double ref_abs = 0.0;
  for (double v : ref.values()) {
    ref_total += v;
    ref_abs += std::abs(v);
  }
  ref_total *= model.grid().cell_volume();
  ref_abs *= model.grid().cell_volume();

  Field lin = 3.0 * phi_bar;
  lin.axpy(-4.0, phi_n).axpy(1.0, phi_nm1);  // 3φ̄ - 4φⁿ + φⁿ⁻¹
  const double pf0 = inner(fprime_hat, lin);
  const double pfq = inner(fprime_hat, q);

  p.Q.potential_difference = model.potential_line(phi_bar, q, ref, 3.0);
  p.Q.p0 = pf0;
  p.Q.p1 = 3.0 * pfq;
  p.Q.offset = 1.0;
  p.Q.scale = 1.0 + ref_abs + std::abs(pf0);

  const SpectralField Pb = forward(phi_bar);
  const SpectralField Pq = forward(q);
  const OperatorSymbol& L = model.linear();
  p.coeffs.a = 0.5 * symbol_inner(Pq, L, Pq) + pfq;
  p.coeffs.b = symbol_inner(Pb, L, Pq) + (pf0 + 3.0 * pfq) / 3.0;
  p.coeffs.c = 0.5 * symbol_inner(Pb, L, Pb) + ref_total / 3.0 + pf0 / 3.0;
  return p;
}

inline QuadraticEnergyCoeffs bdf2_energy_coeffs(const GradientFlowModel& model, const Field& phi_n,
                                                const Field& phi_nm1, const Field& phi_bar,
                                                const Field& q, const Field& fprime_hat) {
  return bdf2_problem(model, phi_n, phi_nm1, phi_bar, q, fprime_hat).coeffs;
}

/// Closed interval, possibly unbounded.
struct Interval {
  double lo;
  double hi;
};

/// {η : aη² + bη + c <= bound}, as zero, one or two intervals.
inline std::vector<Interval> quadratic_sublevel_set(const QuadraticEnergyCoeffs& q, double bound) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double a = q.a;
  const double b = q.b;
  const double c = q.c - bound;
  if (a == 0.0) {
    if (b > 0.0) return {{-inf, -c / b}};
    if (b < 0.0) return {{-c / b, inf}};
    if (c <= 0.0) return {{-inf, inf}};
    return {};
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    if (a < 0.0) return {{-inf, inf}};
    return {};
  }
  // Cancellation-free pair of roots.
  const double t = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double r1 = t / a;
  double r2 = t != 0.0 ? c / t : r1;
  if (r1 > r2) std::swap(r1, r2);
  if (a > 0.0) return {{r1, r2}};
  return {{-inf, r1}, {r2, inf}};
}

namespace detail {

/// Golden-section minimization of g on [lo, hi].
template <class G>
double golden_section(const G& g, double lo, double hi, int iters, int& count) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double g1 = g(x1);
  double g2 = g(x2);
  for (int i = 0; i < iters && !tiny_interval(lo, hi); ++i) {
    ++count;
    if (g1 <= g2) {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - invphi * (hi - lo);
      g1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + invphi * (hi - lo);
      g2 = g(x2);
    }
  }
  return g1 <= g2 ? x1 : x2;
}


/// Minimum of g on [lo, hi] by a beam of 128-point scans: each level rescans
/// the neighbouring cells of the best few discrete local minima found so far,
/// so close double minima are told apart; golden section finishes.
template <class G>
double scan_minimize(const G& g, double lo, double hi, int& count) {
  constexpr int n = 128;
  constexpr std::size_t beam = 4;
  if (!(lo < hi)) return lo;
  struct Cell {
    double a, b, x, gx;
  };
  // Local minima of g sampled on [a, b], as cells spanning their neighbours.
  auto scan = [&](double a, double b, std::vector<Cell>& out) {
    std::vector<std::pair<double, double>> pts(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double x = i == n ? b : a + (b - a) * i / n;
      pts[i] = {x, g(x)};
    }
    for (int i = 0; i <= n; ++i) {
      const bool left = i == 0 || pts[i].second <= pts[i - 1].second;
      const bool right = i == n || pts[i].second < pts[i + 1].second;
      if (left && right) {
        out.push_back({pts[std::max(i - 1, 0)].first, pts[std::min(i + 1, n)].first, pts[i].first, pts[i].second});
      }
    }
  };
  auto keep_best = [&](std::vector<Cell>& cells) {
    std::sort(cells.begin(), cells.end(), [](const Cell& u, const Cell& v) { return u.gx < v.gx; });
    if (cells.size() > beam) cells.resize(beam);
  };

  std::vector<Cell> cells;
  scan(lo, hi, cells);
  keep_best(cells);
  Cell best = cells.front();
  for (int level = 0; level < 6; ++level) {
    std::vector<Cell> next;
    for (const Cell& c : cells) {
      if (tiny_interval(c.a, c.b)) next.push_back(c);
      else scan(c.a, c.b, next);
    }
    keep_best(next);
    cells = std::move(next);
    if (cells.front().gx <= best.gx) best = cells.front();
  }
  double x = best.x, gx = best.gx;
  if (best.a < best.b) {
    const double y = golden_section(g, best.a, best.b, 200, count);
    const double gy = g(y);
    if (gy < gx) x = y, gx = gy;
  }
  return x;
}

}  // namespace detail

/// min |Q(η)| subject to aη² + bη + c <= E_prev.
///
/// Roots of Q inside the feasible set are preferred (nearest to the natural
/// value 0); otherwise |Q| is minimized over each feasible piece by a scan
/// with local zoom refinement. Unbounded pieces are searched within
/// the bracket half-width of their finite end (or of 0 for the whole line).
inline MultiplierOutcome solve_bdf2_constrained(const ScalarFunction& Q,
                                                const QuadraticEnergyCoeffs& coeffs,
                                                double E_prev, const ScalarSolveConfig& cfg) {
  cfg.validate();
  const auto pieces = quadratic_sublevel_set(coeffs, E_prev);
  if (pieces.empty()) {
    throw EmptyFeasibleSet("BDF2 multiplier: a*eta^2 + b*eta + c <= E^n has no solution (a=" +
                           std::to_string(coeffs.a) + ", b=" + std::to_string(coeffs.b) +
                           ", c-E=" + std::to_string(coeffs.c - E_prev) + ")");
  }
  const double w = cfg.bracket_halfwidth;
  const double natural = cfg.natural_value();
  const double tol = cfg.tol * cfg.residual_scale;

  std::vector<Interval> windows;
  for (const Interval& p : pieces) {
    Interval s = p;
    if (std::isinf(s.lo) && std::isinf(s.hi)) {
      s = {natural - w, natural + w};
    } else if (std::isinf(s.lo)) {
      s.lo = std::min(natural - w, s.hi - w);
    } else if (std::isinf(s.hi)) {
      s.hi = std::max(natural + w, s.lo + w);
    }
    windows.push_back(s);
  }

  MultiplierOutcome o;
  o.branch = Branch::Solve;
  ScalarRoot work;

  // Feasible roots of Q.
  std::optional<double> best_root;
  for (const Interval& s : windows) {
    if (s.lo == s.hi) {
      if (std::abs(Q(s.lo)) <= tol) best_root = s.lo;
      continue;
    }
    for (const auto& ch : detail::scan_sign_changes(Q, s.lo, s.hi, 128)) {
      const double r = detail::refine_bracket(Q, ch.a, ch.fa, ch.b, ch.fb, tol, work);
      if (!best_root || std::abs(r - natural) < std::abs(*best_root - natural)) best_root = r;
    }
  }

  double eta;
  if (best_root) {
    eta = *best_root;
  } else {
    const auto absQ = [&](double x) { return std::abs(Q(x)); };
    double best = std::numeric_limits<double>::infinity();
    eta = natural;
    for (const Interval& s : windows) {
      const double x = detail::scan_minimize(absQ, s.lo, s.hi, work.iterations);
      const double gx = absQ(x);
      if (gx < best) {
        best = gx;
        eta = x;
      }
    }
    o.constrained_minimum = true;
  }

  // Rounding in the interval ends can leave η a hair outside the set; pull it
  // toward a strictly feasible anchor in growing steps.
  const double slack = 1e-13 * (1.0 + std::abs(E_prev));
  if (coeffs(eta) > E_prev + slack) {
    double anchor = eta;
    for (const Interval& p : pieces) {
      if (eta < p.lo - 1e-6 * (1.0 + std::abs(p.lo)) || eta > p.hi + 1e-6 * (1.0 + std::abs(p.hi))) continue;
      if (coeffs.a > 0.0) anchor = -coeffs.b / (2.0 * coeffs.a);
      else if (std::isinf(p.lo) && std::isinf(p.hi)) anchor = natural;
      else if (std::isinf(p.lo)) anchor = p.hi - 1.0;
      else if (std::isinf(p.hi)) anchor = p.lo + 1.0;
      else anchor = 0.5 * (p.lo + p.hi);
    }
    const double start = eta;
    for (int k = 0; k <= 48 && coeffs(eta) > E_prev + slack; ++k) {
      eta = start + std::ldexp(1e-14, k) * (anchor - start);
    }
  }

  o.eta = eta;
  o.iterations = work.iterations;
  o.history = std::move(work.history);
  o.residual = std::abs(Q(eta));
  return o;
}

/// R(η) = E([1 - (1-η)^{k+1}] φ̄) - E_prev + η² D, with the potential
/// difference against φⁿ evaluated pointwise.
struct BdfkResidual {
  double quad_bar = 0.0;    // ½(Lφ̄, φ̄)
  double quad_prev = 0.0;   // ½(Lφⁿ, φⁿ)
  ScalarFunction potential_difference;  // s ↦ (F(sφ̄) - F(φⁿ), 1)
  double E_prev = 0.0;
  double D = 0.0;
  int k = 1;
  double scale = 1.0;

  static double factor(double eta, int k) noexcept { return 1.0 - std::pow(1.0 - eta, k + 1); }

  double operator()(double eta) const {
    const double s = factor(eta, k);
    return (s * s * quad_bar - quad_prev) + potential_difference(s) + eta * eta * D;
  }
};

inline BdfkResidual bdfk_residual(const GradientFlowModel& model, const Field& phi_bar,
                                  const Field& phi_n, double E_prev, double D, int k) {
  BdfkResidual r;
  r.quad_bar = model.quadratic_energy(forward(phi_bar));
  r.quad_prev = model.quadratic_energy(forward(phi_n));
  r.potential_difference =
      model.potential_line(Field(model.grid()), phi_bar, model.potential_density(phi_n));
  r.E_prev = E_prev;
  r.D = D;
  r.k = k;
  r.scale = 1.0 + std::abs(E_prev);
  return r;
}

/// BDFk multiplier with initial guess 1 and preference for the root nearest 1.
inline MultiplierOutcome solve_bdfk_residual(const BdfkResidual& R, ScalarSolveConfig cfg) {
  if (R.D < 0.0) throw std::invalid_argument("solve_bdfk_residual: dissipation must be >= 0");
  cfg.initial_guess = 1.0;
  cfg.natural = 1.0;
  cfg.residual_scale *= R.scale;
  const ScalarRoot s = solve_scalar(std::cref(R), cfg);
  MultiplierOutcome o;
  o.eta = s.root;
  o.branch = Branch::Solve;
  o.iterations = s.iterations;
  o.residual = s.residual;
  o.history = s.history;
  o.other_roots = s.other_roots;
  return o;
}

/// Inner products defining the Navier–Stokes multiplier equation
///   [(ū+ηu₂, ū+ηu₂) - (uⁿ,uⁿ)]/(2Δt) = -ν(1+η)‖∇(ū+ηu₂)‖².
struct NsEtaCoeffs {
  double A0 = 0, A1 = 0, A2 = 0;  // (ū,ū), (ū,u₂), (u₂,u₂)
  double B0 = 0, B1 = 0, B2 = 0;  // gradient analogues
  double U = 0;                   // (uⁿ,uⁿ)
  double nu = 0;
  double dt = 1;

  double residual(double eta) const noexcept {
    const double kin = (A0 + 2.0 * eta * A1 + eta * eta * A2 - U) / (2.0 * dt);
    const double visc = nu * (1.0 + eta) * (B0 + 2.0 * eta * B1 + eta * eta * B2);
    return kin + visc;
  }

  /// Coefficients (c0, c1, c2, c3) of residual(η) = Σ c_i η^i.
  std::array<double, 4> polynomial() const noexcept {
    return {(A0 - U) / (2.0 * dt) + nu * B0, A1 / dt + nu * (B0 + 2.0 * B1),
            A2 / (2.0 * dt) + nu * (2.0 * B1 + B2), nu * B2};
  }

  double scale() const noexcept {
    return (std::abs(A0) + std::abs(U) + 2.0 * std::abs(A1) + std::abs(A2)) / (2.0 * dt) +
           nu * (std::abs(B0) + 2.0 * std::abs(B1) + std::abs(B2));
  }
};

inline double gradient_inner(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    s += symbol_inner(forward(a[d]), symbols::neg_laplacian(a[d].grid()), forward(b[d]));
  }
  return s;
}

inline NsEtaCoeffs ns_eta_coeffs(const VectorField& u_bar, const VectorField& u2,
                                 const VectorField& u_n, double nu, double dt) {
  NsEtaCoeffs c;
  c.A0 = vector_inner(u_bar, u_bar);
  c.A1 = vector_inner(u_bar, u2);
  c.A2 = vector_inner(u2, u2);
  c.B0 = gradient_inner(u_bar, u_bar);
  c.B1 = gradient_inner(u_bar, u2);
  c.B2 = gradient_inner(u2, u2);
  c.U = vector_inner(u_n, u_n);
  c.nu = nu;
  c.dt = dt;
  return c;
}

/// Real roots of c0 + c1 x + c2 x² + c3 x³, polished by Newton on the
/// polynomial. Returns an empty list for the zero polynomial.
inline std::vector<double> real_cubic_roots(const std::array<double, 4>& c) {
  const double cmax = std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2]), std::abs(c[3])});
  std::vector<double> roots;
  if (cmax == 0.0 || !std::isfinite(cmax)) return roots;
  const double e = 1e-14 * cmax;
  const auto poly = [&](double x) { return ((c[3] * x + c[2]) * x + c[1]) * x + c[0]; };
  const auto dpoly = [&](double x) { return (3.0 * c[3] * x + 2.0 * c[2]) * x + c[1]; };

  if (std::abs(c[3]) > e) {
    const double a = c[2] / c[3], b = c[1] / c[3], d = c[0] / c[3];
    const double Qv = (a * a - 3.0 * b) / 9.0;
    const double Rv = (2.0 * a * a * a - 9.0 * a * b + 27.0 * d) / 54.0;
    const double Q3 = Qv * Qv * Qv;
    if (Rv * Rv < Q3) {
      const double th = std::acos(std::clamp(Rv / std::sqrt(Q3), -1.0, 1.0));
      const double s = -2.0 * std::sqrt(Qv);
      roots = {s * std::cos(th / 3.0) - a / 3.0,
               s * std::cos((th + 2.0 * std::numbers::pi) / 3.0) - a / 3.0,
               s * std::cos((th - 2.0 * std::numbers::pi) / 3.0) - a / 3.0};
    } else {
      const double A = -std::copysign(std::cbrt(std::abs(Rv) + std::sqrt(Rv * Rv - Q3)), Rv);
      const double B = A != 0.0 ? Qv / A : 0.0;
      roots = {A + B - a / 3.0};
    }
  } else if (std::abs(c[2]) > e) {
    const double disc = c[1] * c[1] - 4.0 * c[2] * c[0];
    if (disc >= 0.0) {
      const double t = -0.5 * (c[1] + std::copysign(std::sqrt(disc), c[1]));
      roots.push_back(t / c[2]);
      if (t != 0.0) roots.push_back(c[0] / t);
    }
  } else if (std::abs(c[1]) > e) {
    roots.push_back(-c[0] / c[1]);
  }
  for (double& r : roots) {
    for (int i = 0; i < 8; ++i) {
      const double d = dpoly(r);
      if (d == 0.0) break;
      const double step = poly(r) / d;
      if (!std::isfinite(step)) break;
      r -= step;
      if (std::abs(step) <= 1e-16 * (1.0 + std::abs(r))) break;
    }
  }
  return roots;
}

/// Navier–Stokes multiplier: the real root of the cubic with smallest |η|.
inline MultiplierOutcome solve_ns_eta(const NsEtaCoeffs& k, const ScalarSolveConfig& cfg = {}) {
  const auto c = k.polynomial();
  for (double v : c) {
    if (!std::isfinite(v)) throw NoRootFound("NS multiplier: non-finite cubic coefficients");
  }
  MultiplierOutcome o;
  o.branch = Branch::Solve;
  const double cmax = std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2]), std::abs(c[3])});
  if (cmax <= 1e-300) {
    o.eta = 0.0;  // residual vanishes identically
    return o;
  }
  std::vector<double> roots = real_cubic_roots(c);
  if (roots.empty()) throw NoRootFound("NS multiplier: cubic has no real root");
  std::sort(roots.begin(), roots.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  o.eta = roots.front();
  o.other_roots.assign(roots.begin() + 1, roots.end());
  o.residual = std::abs(k.residual(o.eta));
  if (o.residual > cfg.tol * std::max(1.0, k.scale())) {
    throw NoRootFound("NS multiplier: cubic root residual " + std::to_string(o.residual) +
                      " above tolerance");
  }
  return o;
}

}  // namespace gradflow
