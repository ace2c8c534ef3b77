#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gradflow/config.hpp"
#include "gradflow/harness.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kAborted = 3, kIo = 4 };

struct CommonArgs {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string output;
  bool paper_scale = false;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "INI config file (overlays --preset when both are given)");
  cmd->add_option("--preset", a.preset, "built-in preset name, see `presets`");
  cmd->add_option("--seed", a.seed, "override initial.seed");
  cmd->add_option("--output", a.output, "override output.directory");
  cmd->add_flag("--paper-scale", a.paper_scale, "use the full-size grid of the preset");
  cmd->add_flag("--verbose-diagnostics", a.verbose, "print per-step diagnostics to stderr");
}

gradflow::RunConfig resolve(const CommonArgs& a) {
  using namespace gradflow;
  if (a.config.empty() && a.preset.empty()) throw ConfigError("give --config or --preset");
  boost::property_tree::ptree pt;
  if (!a.preset.empty()) pt = preset_tree(a.preset);
  if (!a.config.empty()) merge_tree(pt, read_ini_file(a.config));
  RunConfig c = config_from_tree(pt);
  if (a.seed) c.initial.seed = *a.seed;
  if (!a.output.empty()) c.output.directory = a.output;
  return c;
}

void report_error(const char* kind, const std::string& message, nlohmann::json extra = nlohmann::json::object()) {
  extra["error"] = kind;
  extra["message"] = message;
  std::cerr << extra.dump() << '\n';
}

int cmd_run(const CommonArgs& a) {
  using namespace gradflow;
  const RunConfig c = resolve(a);
  RunOptions opt;
  opt.paper_scale = a.paper_scale;
  opt.keep_series = false;
  if (a.verbose) opt.log = &std::cerr;
  const RunSummary s = run_simulation(c, opt);
  for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
  if (s.abort) {
    report_error("step_aborted", s.abort->message,
                 {{"step", s.abort->step}, {"branch", s.abort->branch}, {"reason", s.abort->reason},
                  {"output", s.output_dir.string()}});
    return kAborted;
  }
  std::cout << s.name << ": " << s.steps_done << " steps on " << s.grid << ", E " << format_double(s.initial_energy.total)
            << " -> " << format_double(s.final_energy.total) << ", " << s.counters.solve_branches
            << " solve branches, output in " << s.output_dir.string() << '\n';
  return kOk;
}

int cmd_convergence(const CommonArgs& a, const std::vector<double>& dts) {
  using namespace gradflow;
  const RunConfig c = resolve(a);
  const ConvergenceTable t = run_convergence(c, dts, a.paper_scale, thread_cap());
  write_convergence(t, c.output.directory);
  std::printf("%-14s %-8s %-24s %s\n", "dt", "steps", "max error", "order");
  for (const auto& r : t.rows) {
    std::string order = r.order ? format_double(*r.order) : "-";
    if (r.degenerate) order += " (repeated dt)";
    const std::string err = r.aborted ? "aborted" : std::isfinite(r.error) ? format_double(r.error) : "-";
    std::printf("%-14s %-8ld %-24s %s\n", format_double(r.dt).c_str(), r.steps, err.c_str(), order.c_str());
  }
  for (const auto& r : t.rows) {
    if (r.aborted) std::cerr << "dt " << format_double(r.dt) << ": " << r.message << '\n';
  }
  return t.any_aborted() ? kAborted : kOk;
}

int cmd_compare(const CommonArgs& a) {
  using namespace gradflow;
  const RunConfig c = resolve(a);
  const CompareReport r = run_compare(c, a.paper_scale);
  harness_detail::ensure_directory(c.output.directory);
  harness_detail::write_text(std::filesystem::path(c.output.directory) / "compare.json", to_json(r).dump(2) + "\n");
  std::printf("%-16s %-10s %-8s %-8s %-8s %-10s %-10s %s\n", "scheme", "status", "steps", "linear", "scalar",
              "scalar_it", "wall_s", "final energy");
  for (const auto& s : r.runs) {
    std::printf("%-16s %-10s %-8ld %-8ld %-8ld %-10ld %-10.3f %s\n", s.scheme.c_str(),
                s.completed ? "completed" : "aborted", s.counters.steps, s.counters.linear_solves,
                s.counters.scalar_solves, s.counters.scalar_iterations, s.wall_seconds,
                format_double(s.final_energy.total).c_str());
    if (s.abort) std::printf("  %s\n", s.abort->message.c_str());
  }
  if (r.final_energy_rel_diff) std::printf("final energy relative difference: %s\n", format_double(*r.final_energy_rel_diff).c_str());
  return kOk;
}

int cmd_presets() {
  for (const auto& p : gradflow::presets()) std::printf("%-20s %s\n", p.name.c_str(), p.description.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral gradient-flow solver with Lagrange multiplier time stepping"};
  app.require_subcommand(1);

  CommonArgs run_args, conv_args, cmp_args;
  std::vector<double> dts;
  auto* run = app.add_subcommand("run", "run one simulation");
  add_common(run, run_args);
  auto* conv = app.add_subcommand("convergence", "temporal convergence study");
  add_common(conv, conv_args);
  conv->add_option("--dt", dts, "time steps, overriding convergence.dt_list")->delimiter(',');
  auto* cmp = app.add_subcommand("compare", "compare schemes on identical inputs");
  add_common(cmp, cmp_args);
  auto* list = app.add_subcommand("presets", "list built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*conv) return cmd_convergence(conv_args, dts);
    if (*cmp) return cmd_compare(cmp_args);
    if (*list) return cmd_presets();
  } catch (const gradflow::ConfigError& e) {
    report_error("config", e.what());
    return kConfig;
  } catch (const gradflow::StepAborted& e) {
    report_error("step_aborted", e.what(), {{"step", e.step()}, {"branch", e.branch()}});
    return kAborted;
  } catch (const gradflow::IoError& e) {
    report_error("io", e.what());
    return kIo;
  } catch (const std::invalid_argument& e) {
    report_error("config", e.what());
    return kConfig;
  }
  return kOk;
}
