#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "gradflow/config.hpp"
#include "gradflow/integrators.hpp"
#include "gradflow/io.hpp"
#include "gradflow/navier_stokes.hpp"
#include "gradflow/random.hpp"

namespace gradflow {

// ---------------------------------------------------------------------------
// Initial data

namespace harness_detail {

inline Field cos_product(const PeriodicGrid& g, double amplitude, int mode) {
  return Field::from_function(g, [&](auto x) {
    double v = amplitude;
    for (int d = 0; d < g.dims(); ++d) v *= std::cos(2.0 * std::numbers::pi * mode * x[d] / g.length(d));
    return v;
  });
}

inline Field tanh_bubble(const PeriodicGrid& g, double r, double xc, double yc, double eps) {
  return Field::from_function(g, [&](auto x) {
    const double dist = std::hypot(x[0] - xc, x[1] - yc);
    return 0.5 * (1.0 + std::tanh((r - dist) / eps));
  });
}

}  // namespace harness_detail

/// Initial fields of a run: one for single-field models, (φ1, φ2) for the
/// ternary model and (u, v) for Navier–Stokes.
inline std::vector<Field> initial_fields(const RunConfig& c, const PeriodicGrid& g) {
  using namespace harness_detail;
  const InitialBlock& ic = c.initial;
  const ProblemKind k = c.model.kind;
  const int nf = k == ProblemKind::Ternary || k == ProblemKind::NavierStokes ? 2 : 1;
  std::vector<Field> out;

  if (ic.type == "random") {
    for (int l = 0; l < nf; ++l) {
      const double off = l == 1 && k == ProblemKind::Ternary ? ic.offset2 : ic.offset;
      out.push_back(seeded_random_field(g, ic.seed, off, ic.amplitude, static_cast<std::uint64_t>(l)));
    }
    if (k == ProblemKind::NavierStokes) out = leray_project(out);
  } else if (ic.type == "constant") {
    for (int l = 0; l < nf; ++l) out.emplace_back(g, ic.value);
  } else if (ic.type == "cos_cos") {
    for (int l = 0; l < nf; ++l) out.push_back(cos_product(g, ic.amplitude, ic.mode));
  } else if (ic.type == "ternary_bubbles") {
    const double eps = c.model.spec.epsilon;
    out.push_back(tanh_bubble(g, ic.radius, ic.x1, ic.y, eps));
    out.push_back(tanh_bubble(g, ic.radius, ic.x2, ic.y, eps));
  } else if (ic.type == "ternary_layers") {
    // Independent noise per phase; identical noise would keep φ1 = φ2 forever
    // when Σ1 = Σ2.
    for (int l = 0; l < 2; ++l) {
      Field f = seeded_random_field(g, ic.seed, 0.0, ic.amplitude, static_cast<std::uint64_t>(l));
      for (std::size_t i = 0; i < f.size(); ++i) f[i] += 0.5 * (0.5 * g.point(i)[1] + 0.25);
      out.push_back(std::move(f));
    }
  } else if (ic.type == "taylor_green") {
    out = taylor_green(g, ic.amplitude);
  } else {
    throw ConfigError("unknown initial-condition preset '" + ic.type + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Uniform driver over the three steppers

class Simulation {
 public:
  virtual ~Simulation() = default;
  virtual StepDiagnostics step() = 0;
  virtual long step_index() const = 0;
  virtual double time() const = 0;
  virtual EnergyBreakdown energy() const = 0;
  virtual std::vector<Field> fields() const = 0;
  virtual std::vector<std::string> field_names() const = 0;
  virtual SolveCounters counters() const = 0;
  virtual std::vector<std::string> warnings() const { return {}; }

  virtual std::vector<std::string> extra_columns() const {
    return {"energy_before", "baseline_energy", "residual"};
  }
  virtual std::vector<double> extra(const StepDiagnostics& d) const {
    return {d.E_before, d.baseline_energy, d.residual};
  }
};

class SingleFieldSimulation final : public Simulation {
 public:
  SingleFieldSimulation(GradientFlowModel model, SchemeConfig cfg, Field phi0, Forcing f)
      : integ_(std::move(model), std::move(cfg), std::move(phi0), 0.0, std::move(f)) {}

  StepDiagnostics step() override { return integ_.step(); }
  long step_index() const override { return integ_.step_index(); }
  double time() const override { return integ_.time(); }
  EnergyBreakdown energy() const override { return integ_.energy_breakdown(); }
  std::vector<Field> fields() const override { return {integ_.current()}; }
  std::vector<std::string> field_names() const override { return {"phi"}; }
  SolveCounters counters() const override { return integ_.counters(); }

 private:
  GradientFlowIntegrator integ_;
};

class TernarySimulation final : public Simulation {
 public:
  TernarySimulation(TernaryModel model, SchemeConfig cfg, FieldPair phi0)
      : warnings_(model.warnings()), integ_(std::move(model), std::move(cfg), std::move(phi0)) {}

  StepDiagnostics step() override { return integ_.step(); }
  long step_index() const override { return integ_.step_index(); }
  double time() const override { return integ_.time(); }
  EnergyBreakdown energy() const override { return integ_.energy_breakdown(); }
  std::vector<Field> fields() const override { return {integ_.current()[0], integ_.current()[1]}; }
  std::vector<std::string> field_names() const override { return {"phi1", "phi2"}; }
  SolveCounters counters() const override { return integ_.counters(); }
  std::vector<std::string> warnings() const override { return warnings_; }

 private:
  std::vector<std::string> warnings_;
  TernaryIntegrator integ_;
};

class NavierStokesSimulation final : public Simulation {
 public:
  NavierStokesSimulation(VelocityField u0, double nu, double dt, double tol_E, ScalarSolveConfig scfg)
      : state_(NsState::make(std::move(u0), nu, dt)), tol_E_(tol_E), scfg_(scfg) {}

  StepDiagnostics step() override {
    NsStepDiagnostics d = step_ns_combined(state_, tol_E_, scfg_);
    counters_.steps += 1;
    counters_.linear_solves += d.linear_solves;
    counters_.scalar_solves += d.scalar_solves;
    counters_.scalar_iterations += d.iterations;
    if (d.branch == Branch::Solve) counters_.solve_branches += 1;
    divergence_ = d.divergence;
    return d;
  }
  long step_index() const override { return state_.step; }
  double time() const override { return state_.time; }
  EnergyBreakdown energy() const override { return {state_.E_prev, 0.0, state_.E_prev}; }
  std::vector<Field> fields() const override { return state_.u; }
  std::vector<std::string> field_names() const override { return {"u", "v"}; }
  SolveCounters counters() const override { return counters_; }

  std::vector<std::string> extra_columns() const override {
    return {"energy_before", "baseline_energy", "residual", "divergence"};
  }
  std::vector<double> extra(const StepDiagnostics& d) const override {
    return {d.E_before, d.baseline_energy, d.residual, divergence_};
  }

 private:
  NsState state_;
  double tol_E_;
  ScalarSolveConfig scfg_;
  SolveCounters counters_;
  double divergence_ = 0.0;
};

/// Builds the stepper for a validated config on `grid`.
inline std::unique_ptr<Simulation> make_simulation(const RunConfig& c, const PeriodicGrid& grid) {
  std::vector<Field> init = initial_fields(c, grid);
  const SchemeConfig& sc = c.scheme.cfg;
  switch (c.model.kind) {
    case ProblemKind::NavierStokes:
      return std::make_unique<NavierStokesSimulation>(std::move(init), c.model.nu, sc.dt, sc.tol_E, sc.solve);
    case ProblemKind::Ternary:
      return std::make_unique<TernarySimulation>(TernaryModel(c.model.spec, grid), sc,
                                                 FieldPair{std::move(init[0]), std::move(init[1])});
    default: break;
  }
  GradientFlowModel model(c.model.spec, grid);
  Forcing f;
  if (c.forcing == "manufactured") f = manufactured_forcing(model, init[0]);
  return std::make_unique<SingleFieldSimulation>(std::move(model), sc, std::move(init[0]), std::move(f));
}

/// Known exact state at time t, if the config has one.
inline std::optional<std::vector<Field>> exact_solution(const RunConfig& c, const PeriodicGrid& grid, double t) {
  if (c.forcing == "manufactured") {
    return std::vector<Field>{std::exp(-t) * initial_fields(c, grid)[0]};
  }
  if (c.model.kind == ProblemKind::NavierStokes && c.initial.type == "taylor_green") {
    return taylor_green(grid, c.initial.amplitude * std::exp(-2.0 * c.model.nu * t));
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Runs

struct AbortInfo {
  long step = 0;
  std::string branch;
  std::string reason;
  std::string message;
  std::vector<double> residual_history;
};

struct RunOptions {
  bool paper_scale = false;
  bool write_files = true;
  bool keep_series = true;       // keep the records in the returned summary
  std::ostream* log = nullptr;   // per-step diagnostics when set
};

struct RunSummary {
  std::string name;
  std::string scheme;
  std::string grid;
  bool completed = false;
  std::optional<AbortInfo> abort;
  long steps_requested = 0;
  long steps_done = 0;
  double time = 0.0;
  EnergyBreakdown initial_energy;
  EnergyBreakdown final_energy;
  SolveCounters counters;
  double wall_seconds = 0.0;
  long max_linear_per_zero_step = 0;
  long energy_increases = 0;         // accepted steps with E_after > E_before + 1e-9 (1 + |E_before|)
  int max_scalar_iterations = 0;
  double max_residual = 0.0;         // over solve-branch steps
  std::vector<std::string> warnings;
  std::vector<SeriesRecord> series;
  std::vector<StepDiagnostics> steps;
  std::vector<Field> final_fields;
  std::filesystem::path output_dir;
};

namespace harness_detail {

inline void ensure_directory(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec || !std::filesystem::is_directory(p)) {
    throw IoError("cannot create output directory " + p.string() + (ec ? ": " + ec.message() : ""));
  }
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw IoError("cannot open " + p.string());
  out << text;
  if (!out) throw IoError("writing " + p.string() + " failed");
}

inline std::string snapshot_name(const std::string& field, long step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%07ld.bin", field.c_str(), step);
  return buf;
}

inline double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

inline nlohmann::json energy_json(const EnergyBreakdown& e) {
  return {{"total", e.total}, {"quadratic", e.quadratic}, {"potential", e.potential}};
}

inline nlohmann::json counters_json(const SolveCounters& c) {
  return {{"steps", c.steps},
          {"linear_solves", c.linear_solves},
          {"scalar_solves", c.scalar_solves},
          {"scalar_iterations", c.scalar_iterations},
          {"solve_branches", c.solve_branches}};
}

inline void log_step(std::ostream& os, const StepDiagnostics& d) {
  os << "step " << d.step << " t=" << format_double(d.time) << " scheme=" << d.scheme
     << " branch=" << to_string(d.branch) << " eta=" << format_double(d.eta)
     << " E=" << format_double(d.E_after) << " E_bar=" << format_double(d.baseline_energy)
     << " iters=" << d.iterations << " residual=" << format_double(d.residual);
  if (d.constrained_minimum) os << " constrained_minimum";
  if (!d.other_roots.empty()) {
    os << " other_roots=";
    for (std::size_t i = 0; i < d.other_roots.size(); ++i) os << (i ? "," : "") << format_double(d.other_roots[i]);
  }
  os << '\n';
}

}  // namespace harness_detail

inline nlohmann::json to_json(const RunSummary& s) {
  using namespace harness_detail;
  nlohmann::json j{{"name", s.name},
                   {"scheme", s.scheme},
                   {"grid", s.grid},
                   {"status", s.completed ? "completed" : "aborted"},
                   {"steps_requested", s.steps_requested},
                   {"steps_done", s.steps_done},
                   {"time", s.time},
                   {"initial_energy", energy_json(s.initial_energy)},
                   {"final_energy", energy_json(s.final_energy)},
                   {"counters", counters_json(s.counters)},
                   {"wall_seconds", s.wall_seconds},
                   {"max_linear_solves_per_zero_step", s.max_linear_per_zero_step},
                   {"energy_increases", s.energy_increases},
                   {"max_scalar_iterations", s.max_scalar_iterations},
                   {"max_residual", s.max_residual},
                   {"warnings", s.warnings}};
  if (s.abort) {
    j["abort"] = {{"step", s.abort->step},
                  {"branch", s.abort->branch},
                  {"reason", s.abort->reason},
                  {"message", s.abort->message},
                  {"residual_history", s.abort->residual_history}};
  }
  return j;
}

/// Runs one configured simulation. Step aborts are reported in the summary
/// (completed = false); config and I/O errors propagate.
inline RunSummary run_simulation(const RunConfig& config, const RunOptions& opt = {}) {
  using namespace harness_detail;
  RunConfig c = config;
  // Verbose runs also report every bracketed root of the multiplier equation.
  if (opt.log) c.scheme.cfg.solve.collect_roots = true;
  const PeriodicGrid grid = c.grid.make(opt.paper_scale);
  auto sim = make_simulation(c, grid);

  RunSummary s;
  s.name = c.name;
  s.scheme = c.scheme.kind;
  s.grid = grid.describe();
  s.steps_requested = c.scheme.steps();
  s.initial_energy = sim->energy();
  s.final_energy = s.initial_energy;
  s.warnings = sim->warnings();

  const auto names = sim->field_names();
  std::optional<SeriesWriter> series;
  const std::filesystem::path dir = c.output.directory;
  const std::filesystem::path snaps = dir / "snapshots";
  const std::string model = std::string(to_string(c.model.kind));
  auto snapshot = [&](long step, double t) {
    const auto f = sim->fields();
    for (std::size_t i = 0; i < f.size(); ++i) {
      write_snapshot(snaps / snapshot_name(names[i], step), f[i], {model, names[i], step, t});
    }
  };
  if (opt.write_files) {
    ensure_directory(dir);
    ensure_directory(snaps);
    s.output_dir = dir;
    write_text(dir / "config.ini", to_ini(c));
    series.emplace(dir / "series.csv", names, sim->extra_columns());
    if (c.output.snapshot_stride > 0) snapshot(0, sim->time());
  }

  const double t0 = now_seconds();
  for (long n = 0; n < s.steps_requested; ++n) {
    StepDiagnostics d;
    try {
      d = sim->step();
    } catch (const StepAborted& e) {
      s.abort = AbortInfo{e.step(), e.branch(), e.reason(), e.what(), e.residual_history()};
      break;
    }
    if (opt.log) log_step(*opt.log, d);
    if (d.branch == Branch::Zero) s.max_linear_per_zero_step = std::max<long>(s.max_linear_per_zero_step, d.linear_solves);
    if (d.E_after > d.E_before + 1e-9 * (1.0 + std::abs(d.E_before))) ++s.energy_increases;
    s.max_scalar_iterations = std::max(s.max_scalar_iterations, d.iterations);
    if (d.branch == Branch::Solve) s.max_residual = std::max(s.max_residual, d.residual);

    const bool record = c.output.series_stride > 0 && d.step % c.output.series_stride == 0;
    if (record && (series || opt.keep_series)) {
      SeriesRecord r;
      r.step = d.step;
      r.time = d.time;
      r.energy_total = d.energy.total;
      r.energy_quadratic = d.energy.quadratic;
      r.energy_potential = d.energy.potential;
      r.eta = d.eta;
      r.branch = std::string(to_string(d.branch));
      r.solver_iters = d.iterations;
      for (const Field& f : sim->fields()) r.mass.push_back(f.mean());
      r.extra = sim->extra(d);
      if (series) series->write(r);
      if (opt.keep_series) s.series.push_back(std::move(r));
    }
    if (opt.write_files && c.output.snapshot_stride > 0 && d.step % c.output.snapshot_stride == 0) {
      snapshot(d.step, d.time);
    }
    if (opt.keep_series) s.steps.push_back(std::move(d));
  }
  s.wall_seconds = now_seconds() - t0;
  s.completed = !s.abort;
  s.steps_done = sim->step_index();
  s.time = sim->time();
  s.final_energy = sim->energy();
  s.counters = sim->counters();
  s.final_fields = sim->fields();

  if (opt.write_files) {
    series->flush();
    const bool strided = c.output.snapshot_stride > 0 && s.steps_done % c.output.snapshot_stride == 0;
    if (!strided) snapshot(s.steps_done, s.time);
    write_text(dir / "summary.json", to_json(s).dump(2) + "\n");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Convergence studies

/// Worker cap from GRADFLOW_THREADS, defaulting to the hardware concurrency.
inline unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GRADFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return hw;
}

struct ConvergenceRow {
  double dt = 0.0;
  long steps = 0;
  double error = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> order;  // against the previous row
  bool degenerate = false;      // same dt as the previous row
  bool aborted = false;
  std::string message;
  double wall_seconds = 0.0;
};

struct ConvergenceTable {
  std::string name;
  std::string scheme;
  std::string reference;
  double t_final = 0.0;
  std::optional<double> reference_dt;
  std::vector<ConvergenceRow> rows;

  bool any_aborted() const {
    return std::any_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.aborted; });
  }
};

namespace harness_detail {

struct FinalState {
  std::vector<Field> fields;
  bool aborted = false;
  std::string message;
  double wall_seconds = 0.0;
};

inline FinalState run_to_end(RunConfig c, double dt, bool paper_scale) {
  c.scheme.cfg.dt = dt;
  RunOptions opt;
  opt.paper_scale = paper_scale;
  opt.write_files = false;
  opt.keep_series = false;
  const RunSummary s = run_simulation(c, opt);
  FinalState f{s.final_fields, !s.completed, s.abort ? s.abort->message : "", s.wall_seconds};
  return f;
}

inline double max_field_difference(const std::vector<Field>& a, const std::vector<Field>& b) {
  double m = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    for (std::size_t i = 0; i < a[l].size(); ++i) m = std::max(m, std::abs(a[l][i] - b[l][i]));
  }
  return m;
}

/// Runs jobs[i]() on up to `threads` workers.
template <class Job>
void parallel_for(std::size_t n, unsigned threads, Job&& job) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(n, std::max(1u, threads)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) job(i);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

}  // namespace harness_detail

/// Max-norm errors at t_final for each dt and pairwise observed orders.
inline ConvergenceTable run_convergence(const RunConfig& c, std::vector<double> dt_list, bool paper_scale = false,
                                        unsigned threads = thread_cap()) {
  using namespace harness_detail;
  if (dt_list.empty()) dt_list = c.convergence.dt_list;
  if (dt_list.empty()) throw ConfigError("convergence needs a dt list");
  for (double dt : dt_list) {
    RunConfig probe = c;
    probe.scheme.cfg.dt = dt;
    validate(probe);
  }

  ConvergenceTable t;
  t.name = c.name;
  t.scheme = c.scheme.kind;
  t.reference = c.convergence.reference;
  t.t_final = c.scheme.t_final;
  const PeriodicGrid grid = c.grid.make(paper_scale);

  std::vector<double> jobs = dt_list;
  std::optional<std::vector<Field>> exact;
  if (t.reference == "exact") {
    exact = exact_solution(c, grid, c.scheme.t_final);
    if (!exact) throw ConfigError("convergence.reference = exact needs manufactured forcing or a Taylor-Green flow");
  } else {
    const double dt_ref = *std::min_element(dt_list.begin(), dt_list.end()) / c.convergence.reference_factor;
    t.reference_dt = dt_ref;
    jobs.push_back(dt_ref);
  }

  std::vector<FinalState> results(jobs.size());
  std::mutex err_mutex;
  std::exception_ptr error;
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    try {
      results[i] = run_to_end(c, jobs[i], paper_scale);
    } catch (...) {
      std::lock_guard lock(err_mutex);
      if (!error) error = std::current_exception();
    }
  });
  if (error) std::rethrow_exception(error);

  const std::vector<Field>* ref = exact ? &*exact : nullptr;
  bool ref_ok = true;
  if (!exact) {
    ref = &results.back().fields;
    ref_ok = !results.back().aborted;
  }
  for (std::size_t i = 0; i < dt_list.size(); ++i) {
    ConvergenceRow r;
    r.dt = dt_list[i];
    r.steps = std::lround(c.scheme.t_final / r.dt);
    r.aborted = results[i].aborted;
    r.message = results[i].message;
    r.wall_seconds = results[i].wall_seconds;
    if (!ref_ok) {
      r.message = "reference run aborted: " + results.back().message;
    } else if (!r.aborted) {
      r.error = max_field_difference(results[i].fields, *ref);
    }
    if (i > 0) {
      const ConvergenceRow& p = t.rows.back();
      if (p.dt == r.dt) {
        r.degenerate = true;
        r.order = 0.0;
      } else if (std::isfinite(p.error) && std::isfinite(r.error) && p.error > 0.0 && r.error > 0.0) {
        r.order = std::log(p.error / r.error) / std::log(p.dt / r.dt);
      }
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline nlohmann::json to_json(const ConvergenceTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json j{{"dt", r.dt}, {"steps", r.steps}, {"aborted", r.aborted}, {"degenerate", r.degenerate},
                     {"wall_seconds", r.wall_seconds}};
    j["error"] = std::isfinite(r.error) ? nlohmann::json(r.error) : nlohmann::json();
    j["order"] = r.order ? nlohmann::json(*r.order) : nlohmann::json();
    if (!r.message.empty()) j["message"] = r.message;
    rows.push_back(std::move(j));
  }
  nlohmann::json j{{"name", t.name}, {"scheme", t.scheme}, {"reference", t.reference},
                   {"t_final", t.t_final}, {"rows", rows}};
  if (t.reference_dt) j["reference_dt"] = *t.reference_dt;
  return j;
}

inline void write_convergence(const ConvergenceTable& t, const std::filesystem::path& dir) {
  using namespace harness_detail;
  ensure_directory(dir);
  std::ostringstream csv;
  csv << "dt,steps,error,order,degenerate,aborted\n";
  for (const auto& r : t.rows) {
    csv << format_double(r.dt) << ',' << r.steps << ',' << (std::isfinite(r.error) ? format_double(r.error) : "")
        << ',' << (r.order ? format_double(*r.order) : "") << ',' << (r.degenerate ? 1 : 0) << ','
        << (r.aborted ? 1 : 0) << '\n';
  }
  write_text(dir / "convergence.csv", csv.str());
  write_text(dir / "convergence.json", to_json(t).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Scheme comparison

struct CompareReport {
  std::vector<RunSummary> runs;
  std::optional<double> final_energy_rel_diff;  // between the first two completed runs
  std::optional<bool> identical_trajectories;   // bitwise equal energy series
  std::optional<bool> scalar_count_claim;       // combined scalar solves <= classic = steps
  std::optional<bool> linear_count_claim;       // combined: <= 1 linear solve per zero-branch step
};

/// Runs every scheme of the compare block on identical inputs.
inline CompareReport run_compare(const RunConfig& c, bool paper_scale = false) {
  CompareReport rep;
  if (c.model.kind == ProblemKind::NavierStokes || c.model.kind == ProblemKind::Ternary) {
    throw ConfigError("compare runs the single-field schemes; model " + std::string(to_string(c.model.kind)) +
                      " has one scheme");
  }
  if (c.compare.schemes.size() < 2) throw ConfigError("compare.schemes needs at least two schemes");
  for (const std::string& name : c.compare.schemes) {
    RunConfig rc = c;
    rc.scheme.kind = name;
    rc.scheme.cfg.kind = scheme_kind_from_string(name);
    validate(rc);
    RunOptions opt;
    opt.paper_scale = paper_scale;
    opt.write_files = false;
    rep.runs.push_back(run_simulation(rc, opt));
    rep.runs.back().series.clear();
  }

  const RunSummary* classic = nullptr;
  const RunSummary* combined = nullptr;
  for (const auto& r : rep.runs) {
    if (r.scheme == "classic_cn" && !classic) classic = &r;
    if (r.scheme == "combined_cn" && !combined) combined = &r;
  }
  const RunSummary& a = rep.runs[0];
  const RunSummary& b = rep.runs[1];
  if (a.completed && b.completed) {
    const double ea = a.final_energy.total;
    const double eb = b.final_energy.total;
    rep.final_energy_rel_diff = std::abs(ea - eb) / std::max({std::abs(ea), std::abs(eb), 1e-300});
    bool same = a.steps.size() == b.steps.size();
    for (std::size_t i = 0; same && i < a.steps.size(); ++i) same = a.steps[i].E_after == b.steps[i].E_after;
    rep.identical_trajectories = same;
  }
  if (classic && combined) {
    rep.scalar_count_claim = classic->counters.scalar_solves == classic->counters.steps &&
                             combined->counters.scalar_solves <= classic->counters.scalar_solves;
    rep.linear_count_claim = combined->max_linear_per_zero_step <= 1;
  }
  for (auto& r : rep.runs) r.steps.clear();
  return rep;
}

inline nlohmann::json to_json(const CompareReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& s : r.runs) runs.push_back(to_json(s));
  auto opt = [](const auto& o) { return o ? nlohmann::json(*o) : nlohmann::json(); };
  return {{"runs", runs},
          {"final_energy_rel_diff", opt(r.final_energy_rel_diff)},
          {"identical_trajectories", opt(r.identical_trajectories)},
          {"scalar_count_claim", opt(r.scalar_count_claim)},
          {"linear_count_claim", opt(r.linear_count_claim)}};
}

}  // namespace gradflow
