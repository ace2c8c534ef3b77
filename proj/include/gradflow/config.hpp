#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gradflow/errors.hpp"
#include "gradflow/integrators.hpp"
#include "gradflow/io.hpp"
#include "gradflow/models.hpp"

namespace gradflow {

// Config grammar: INI sections of `key = value` lines, comments start with
// ';' or '#'. Lists are comma separated. Lengths accept a trailing "pi"
// ("2pi", "0.5pi"). Every key outside the tables below is rejected.

enum class ProblemKind { AllenCahn, CahnHilliard, Mbe, Ternary, NavierStokes };

inline std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::AllenCahn: return "allen_cahn";
    case ProblemKind::CahnHilliard: return "cahn_hilliard";
    case ProblemKind::Mbe: return "mbe";
    case ProblemKind::Ternary: return "ternary_ch";
    case ProblemKind::NavierStokes: return "navier_stokes";
  }
  return "?";
}

struct ModelBlock {
  ProblemKind kind = ProblemKind::AllenCahn;
  ModelSpec spec;
  double nu = 0.1;  // navier_stokes only
};

struct GridBlock {
  std::vector<int> n{64, 64};
  std::vector<double> length{2.0 * std::numbers::pi, 2.0 * std::numbers::pi};
  std::vector<int> paper_n;  // resolution used with --paper-scale; empty keeps n

  int dims() const noexcept { return static_cast<int>(n.size()); }
  PeriodicGrid make(bool paper_scale = false) const {
    return PeriodicGrid(paper_scale && !paper_n.empty() ? paper_n : n, length);
  }
};

struct SchemeBlock {
  std::string kind = "combined_cn";  // also "ns_combined" for navier_stokes
  SchemeConfig cfg;
  double t_final = 1.0;

  long steps() const { return std::lround(t_final / cfg.dt); }
};

struct InitialBlock {
  std::string type = "random";
  std::uint64_t seed = 42;
  double offset = 0.0;
  double offset2 = 0.0;  // second field of ternary random data
  double amplitude = 1.0;
  double value = 0.0;
  int mode = 1;
  double radius = 0.35;
  double x1 = 1.37;
  double x2 = 0.63;
  double y = 1.0;
};

struct OutputBlock {
  std::string directory = "out";
  long series_stride = 1;
  long snapshot_stride = 0;  // 0: final state only
};

struct ConvergenceBlock {
  std::vector<double> dt_list;
  std::string reference = "exact";  // or "self"
  int reference_factor = 16;
};

struct CompareBlock {
  std::vector<std::string> schemes{"classic_cn", "combined_cn"};
};

struct RunConfig {
  std::string name = "custom";
  ModelBlock model;
  GridBlock grid;
  SchemeBlock scheme;
  InitialBlock initial;
  std::string forcing = "none";  // or "manufactured"
  OutputBlock output;
  ConvergenceBlock convergence;
  CompareBlock compare;
};

namespace config_detail {

using boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"name"}},
      {"model", {"kind", "mobility", "epsilon", "epsilon_squared", "lambda", "sigma", "nu"}},
      {"grid", {"dims", "n", "length", "paper_n"}},
      {"scheme",
       {"kind", "k", "dt", "t_final", "steps", "tol_energy", "solve_tol", "max_iter",
        "bracket_halfwidth", "dealias", "verify"}},
      {"initial",
       {"type", "seed", "offset", "offset2", "amplitude", "value", "mode", "radius", "x1", "x2", "y"}},
      {"forcing", {"type"}},
      {"output", {"directory", "series_stride", "snapshot_stride"}},
      {"convergence", {"dt_list", "reference", "reference_factor"}},
      {"compare", {"schemes"}},
  };
  return keys;
}

/// Keys that make sense for each initial-condition type besides `type`.
inline const std::map<std::string, std::set<std::string>>& initial_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"random", {"seed", "offset", "offset2", "amplitude"}},
      {"constant", {"value"}},
      {"cos_cos", {"amplitude", "mode"}},
      {"ternary_bubbles", {"radius", "x1", "x2", "y"}},
      {"ternary_layers", {"seed", "amplitude"}},
      {"taylor_green", {"amplitude"}},
  };
  return keys;
}

inline std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

[[noreturn]] inline void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw ConfigError("invalid value '" + value + "' for " + key + " (expected " + want + ")");
}

inline double parse_double(const std::string& key, const std::string& raw, bool allow_pi = false) {
  std::string s = trim(raw);
  double scale = 1.0;
  if (allow_pi && s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    s = trim(s.substr(0, s.size() - 2));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    scale = std::numbers::pi;
    if (s.empty()) return scale;
  }
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) bad_value(key, raw, "a finite number");
  return v * scale;
}

inline long parse_long(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno) bad_value(key, raw, "an integer");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad_value(key, raw, "true or false");
}

/// Typed access to the keys of one section.
class Section {
 public:
  Section(std::string name, const ptree* tree) : name_(std::move(name)), tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) const {
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(ptree::path_type(key, '\0'));
    return v ? std::optional<std::string>(trim(*v)) : std::nullopt;
  }
  bool has(const std::string& key) const { return raw(key).has_value(); }
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  void read(const std::string& key, double& out, bool allow_pi = false) const {
    if (auto v = raw(key)) out = parse_double(qualified(key), *v, allow_pi);
  }
  void read(const std::string& key, long& out) const {
    if (auto v = raw(key)) out = parse_long(qualified(key), *v);
  }
  void read(const std::string& key, int& out) const {
    if (auto v = raw(key)) out = static_cast<int>(parse_long(qualified(key), *v));
  }
  void read(const std::string& key, bool& out) const {
    if (auto v = raw(key)) out = parse_bool(qualified(key), *v);
  }
  void read(const std::string& key, std::string& out) const {
    if (auto v = raw(key)) out = *v;
  }
  void read(const std::string& key, std::uint64_t& out) const {
    if (auto v = raw(key)) {
      const long s = parse_long(qualified(key), *v);
      if (s < 0) bad_value(qualified(key), *v, "a non-negative integer");
      out = static_cast<std::uint64_t>(s);
    }
  }

 private:
  std::string name_;
  const ptree* tree_;
};

inline void check_keys(const ptree& pt) {
  const auto& allowed = allowed_keys();
  for (const auto& [section, body] : pt) {
    // An empty section and a top-level key look alike; only the value differs.
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' outside of any section");
    }
    const auto it = allowed.find(section);
    if (it == allowed.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, _] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
  }
}

inline Section section(const ptree& pt, const std::string& name) {
  const auto c = pt.get_child_optional(name);
  return Section(name, c ? &*c : nullptr);
}

inline ProblemKind parse_model_kind(const std::string& s) {
  if (s == "allen_cahn") return ProblemKind::AllenCahn;
  if (s == "cahn_hilliard") return ProblemKind::CahnHilliard;
  if (s == "mbe") return ProblemKind::Mbe;
  if (s == "ternary_ch") return ProblemKind::Ternary;
  if (s == "navier_stokes") return ProblemKind::NavierStokes;
  bad_value("model.kind", s, "allen_cahn, cahn_hilliard, mbe, ternary_ch or navier_stokes");
}

inline SchemeKind parse_scheme_kind(const std::string& s) {
  if (s == "classic_cn") return SchemeKind::ClassicCn;
  if (s == "combined_cn") return SchemeKind::CombinedCn;
  if (s == "combined_bdf2") return SchemeKind::CombinedBdf2;
  if (s == "combined_bdfk") return SchemeKind::CombinedBdfk;
  if (s == "ternary_cn") return SchemeKind::TernaryCn;
  bad_value("scheme.kind", s,
            "classic_cn, combined_cn, combined_bdf2, combined_bdfk, ternary_cn or ns_combined");
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& raw, Parse parse) {
  std::vector<T> out;
  for (const auto& item : split_list(raw)) out.push_back(parse(key, item));
  if (out.empty()) bad_value(key, raw, "a non-empty list");
  return out;
}

}  // namespace config_detail

/// Scheme name to kind; "ns_combined" is handled by the caller.
inline SchemeKind scheme_kind_from_string(const std::string& s) { return config_detail::parse_scheme_kind(s); }

/// Cross-block consistency checks; throws ConfigError.
inline void validate(const RunConfig& c) {
  const auto fail = [](const std::string& m) { throw ConfigError(m); };
  const ProblemKind k = c.model.kind;
  const ModelSpec& s = c.model.spec;

  if (!(c.scheme.cfg.dt > 0.0)) fail("scheme.dt must be positive");
  if (!(c.scheme.t_final >= c.scheme.cfg.dt)) fail("scheme.t_final must be at least scheme.dt");
  const double n_exact = c.scheme.t_final / c.scheme.cfg.dt;
  if (std::abs(n_exact - std::round(n_exact)) > 1e-8 * n_exact) {
    fail("scheme.t_final is not an integer multiple of scheme.dt");
  }
  if (c.scheme.cfg.tol_E < 0.0) fail("scheme.tol_energy must be non-negative");

  const int dims = c.grid.dims();
  if (dims < 1 || dims > 3) fail("grid.dims must be 1, 2 or 3");
  if (c.grid.length.size() != c.grid.n.size()) fail("grid.length needs one value per dimension");
  for (int v : c.grid.n) {
    if (v < 2) fail("grid.n entries must be at least 2");
  }
  if (!c.grid.paper_n.empty() && c.grid.paper_n.size() != c.grid.n.size()) {
    fail("grid.paper_n needs one value per dimension");
  }
  for (double l : c.grid.length) {
    if (!(l > 0.0)) fail("grid.length entries must be positive");
  }
  if (dims == 3 && k != ProblemKind::Mbe) fail("3D grids are supported for the mbe model only");
  if (k == ProblemKind::NavierStokes && dims != 2) fail("navier_stokes requires a 2D grid");

  if (k == ProblemKind::NavierStokes) {
    if (!(c.model.nu > 0.0)) fail("model.nu must be positive");
    if (c.scheme.kind != "ns_combined") fail("navier_stokes requires scheme.kind = ns_combined");
  } else {
    if (!(s.mobility > 0.0)) fail("model.mobility must be positive");
    if (!(s.epsilon > 0.0)) fail("model.epsilon must be positive");
    if (c.scheme.kind == "ns_combined") fail("ns_combined requires model.kind = navier_stokes");
    const bool ternary_scheme = c.scheme.cfg.kind == SchemeKind::TernaryCn;
    if ((k == ProblemKind::Ternary) != ternary_scheme) {
      fail("ternary_ch and scheme ternary_cn go together");
    }
    if (k == ProblemKind::Ternary && s.lambda < 0.0) fail("model.lambda must be non-negative");
  }
  try {
    c.scheme.cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }

  const std::string& t = c.initial.type;
  const bool ternary_ic = t == "ternary_bubbles" || t == "ternary_layers";
  if (ternary_ic && k != ProblemKind::Ternary) fail("initial." + t + " requires ternary_ch");
  if (t == "taylor_green" && k != ProblemKind::NavierStokes) fail("initial.taylor_green requires navier_stokes");
  if (k == ProblemKind::NavierStokes && t != "taylor_green" && t != "random" && t != "constant") {
    fail("navier_stokes supports initial types taylor_green, random and constant");
  }
  if (t == "ternary_layers" && dims != 2) fail("initial.ternary_layers requires a 2D grid");
  if (t == "ternary_bubbles" && dims != 2) fail("initial.ternary_bubbles requires a 2D grid");

  if (c.forcing != "none" && c.forcing != "manufactured") fail("forcing.type must be none or manufactured");
  if (c.forcing == "manufactured") {
    if (k == ProblemKind::Ternary || k == ProblemKind::NavierStokes) {
      fail("manufactured forcing is available for single-field models only");
    }
    if (t != "cos_cos") fail("manufactured forcing requires initial.type = cos_cos");
  }

  if (c.output.series_stride < 0 || c.output.snapshot_stride < 0) fail("output strides must be non-negative");
  if (c.output.directory.empty()) fail("output.directory must not be empty");

  for (double dt : c.convergence.dt_list) {
    if (!(dt > 0.0)) fail("convergence.dt_list entries must be positive");
  }
  if (c.convergence.reference != "exact" && c.convergence.reference != "self") {
    fail("convergence.reference must be exact or self");
  }
  if (c.convergence.reference_factor < 1) fail("convergence.reference_factor must be at least 1");

  for (const auto& name : c.compare.schemes) {
    if (name == "ns_combined") fail("compare.schemes lists single-field schemes only");
    config_detail::parse_scheme_kind(name);
  }
}

/// Builds a RunConfig from a parsed tree. Defaults for t_final and epsilon
/// follow the model if not given.
inline RunConfig config_from_tree(const boost::property_tree::ptree& pt) {
  using namespace config_detail;
  check_keys(pt);
  RunConfig c;

  section(pt, "run").read("name", c.name);

  const Section m = section(pt, "model");
  std::string kind = "allen_cahn";
  m.read("kind", kind);
  c.model.kind = parse_model_kind(kind);
  ModelSpec& spec = c.model.spec;
  switch (c.model.kind) {
    case ProblemKind::AllenCahn: spec.kind = ModelKind::AllenCahn; break;
    case ProblemKind::CahnHilliard: spec.kind = ModelKind::CahnHilliard; break;
    case ProblemKind::Mbe: spec.kind = ModelKind::MbeNoSlope; break;
    case ProblemKind::Ternary: spec.kind = ModelKind::TernaryCH; break;
    case ProblemKind::NavierStokes: spec.kind = ModelKind::AllenCahn; break;
  }
  m.read("mobility", spec.mobility);
  if (m.has("epsilon") && m.has("epsilon_squared")) {
    throw ConfigError("give model.epsilon or model.epsilon_squared, not both");
  }
  m.read("epsilon", spec.epsilon);
  if (auto e2 = m.raw("epsilon_squared")) {
    const double v = parse_double("model.epsilon_squared", *e2);
    if (!(v > 0.0)) bad_value("model.epsilon_squared", *e2, "a positive number");
    spec.epsilon = std::sqrt(v);
  }
  m.read("lambda", spec.lambda);
  if (auto s = m.raw("sigma")) {
    const auto v = parse_list<double>("model.sigma", *s, [](auto& k, auto& x) { return parse_double(k, x); });
    if (v.size() != 3) bad_value("model.sigma", *s, "three values s12, s13, s23");
    spec.sigma = {v[0], v[1], v[2]};
  }
  m.read("nu", c.model.nu);

  const Section g = section(pt, "grid");
  int dims = 2;
  g.read("dims", dims);
  if (dims < 1 || dims > 3) throw ConfigError("grid.dims must be 1, 2 or 3");
  auto expand_int = [&](const std::string& key, std::vector<int>& out, int dflt) {
    std::vector<int> v(static_cast<std::size_t>(dims), dflt);
    if (auto raw = g.raw(key)) {
      v = parse_list<int>("grid." + key, *raw,
                          [](auto& k, auto& x) { return static_cast<int>(parse_long(k, x)); });
      if (v.size() == 1) v.assign(static_cast<std::size_t>(dims), v[0]);
    } else if (dflt == 0) {
      return;
    }
    out = v;
  };
  expand_int("n", c.grid.n, 64);
  expand_int("paper_n", c.grid.paper_n, 0);
  c.grid.length.assign(static_cast<std::size_t>(dims), 2.0 * std::numbers::pi);
  if (auto raw = g.raw("length")) {
    c.grid.length = parse_list<double>("grid.length", *raw,
                                       [](auto& k, auto& x) { return parse_double(k, x, true); });
    if (c.grid.length.size() == 1) c.grid.length.assign(static_cast<std::size_t>(dims), c.grid.length[0]);
  }

  const Section s = section(pt, "scheme");
  s.read("kind", c.scheme.kind);
  if (c.scheme.kind != "ns_combined") c.scheme.cfg.kind = parse_scheme_kind(c.scheme.kind);
  s.read("k", c.scheme.cfg.k);
  s.read("dt", c.scheme.cfg.dt);
  if (s.has("t_final") && s.has("steps")) throw ConfigError("give scheme.t_final or scheme.steps, not both");
  s.read("t_final", c.scheme.t_final);
  if (s.has("steps")) {
    long n = 0;
    s.read("steps", n);
    if (n < 1) throw ConfigError("scheme.steps must be at least 1");
    c.scheme.t_final = static_cast<double>(n) * c.scheme.cfg.dt;
  }
  s.read("tol_energy", c.scheme.cfg.tol_E);
  s.read("solve_tol", c.scheme.cfg.solve.tol);
  s.read("max_iter", c.scheme.cfg.solve.max_iter);
  s.read("bracket_halfwidth", c.scheme.cfg.solve.bracket_halfwidth);
  s.read("dealias", spec.dealias);
  s.read("verify", c.scheme.cfg.verify);

  const Section ic = section(pt, "initial");
  ic.read("type", c.initial.type);
  const auto& ik = initial_keys();
  const auto it = ik.find(c.initial.type);
  if (it == ik.end()) throw ConfigError("unknown initial-condition preset '" + c.initial.type + "'");
  if (const auto body = pt.get_child_optional("initial")) {
    for (const auto& [key, _] : *body) {
      if (key != "type" && !it->second.count(key)) {
        throw ConfigError("initial." + key + " does not apply to initial.type = " + c.initial.type);
      }
    }
  }
  if (c.initial.type == "ternary_layers") c.initial.amplitude = 0.001;
  ic.read("seed", c.initial.seed);
  ic.read("offset", c.initial.offset);
  ic.read("offset2", c.initial.offset2);
  ic.read("amplitude", c.initial.amplitude);
  ic.read("value", c.initial.value);
  ic.read("mode", c.initial.mode);
  ic.read("radius", c.initial.radius);
  ic.read("x1", c.initial.x1);
  ic.read("x2", c.initial.x2);
  ic.read("y", c.initial.y);

  section(pt, "forcing").read("type", c.forcing);

  const Section o = section(pt, "output");
  o.read("directory", c.output.directory);
  o.read("series_stride", c.output.series_stride);
  o.read("snapshot_stride", c.output.snapshot_stride);

  const Section cv = section(pt, "convergence");
  if (auto raw = cv.raw("dt_list")) {
    c.convergence.dt_list =
        parse_list<double>("convergence.dt_list", *raw, [](auto& k, auto& x) { return parse_double(k, x); });
  }
  cv.read("reference", c.convergence.reference);
  cv.read("reference_factor", c.convergence.reference_factor);

  if (auto raw = section(pt, "compare").raw("schemes")) c.compare.schemes = split_list(*raw);

  validate(c);
  return c;
}

inline boost::property_tree::ptree parse_ini_text(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  return pt;
}

inline boost::property_tree::ptree read_ini_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ini_text(ss.str(), path.string());
}

/// Copies every key of `overlay` onto `base`. A key replaces its
/// alternative spelling (t_final/steps, epsilon/epsilon_squared), and a new
/// initial.type drops the old type's parameters.
inline void merge_tree(boost::property_tree::ptree& base, const boost::property_tree::ptree& overlay) {
  using boost::property_tree::ptree;
  static const std::map<std::string, std::string> alternative{
      {"t_final", "steps"}, {"steps", "t_final"}, {"epsilon", "epsilon_squared"}, {"epsilon_squared", "epsilon"}};
  for (const auto& [section, body] : overlay) {
    const ptree::path_type key(section, '\0');
    auto existing = base.get_child_optional(key);
    ptree& target = existing ? *existing : base.add_child(key, ptree());
    if (body.empty()) target.data() = body.data();
    if (section == "initial" && body.get_child_optional("type")) target.clear();
    for (const auto& [k, value] : body) {
      if (const auto alt = alternative.find(k); alt != alternative.end()) target.erase(alt->second);
      target.put(ptree::path_type(k, '\0'), value.data());
    }
  }
}

// ---------------------------------------------------------------------------
// Presets

struct Preset {
  std::string name;
  std::string description;
  std::string ini;
};

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> list{
      {"random-spinodal",
       "Allen-Cahn, M = 1, eps^2 = 0.005, phi0 = 0.03 + 0.001 rand, combined CN",
       R"([run]
name = random-spinodal
[model]
kind = allen_cahn
mobility = 1
epsilon_squared = 0.005
[grid]
dims = 2
n = 64
paper_n = 256
length = 2pi
[scheme]
kind = combined_cn
dt = 0.01
steps = 200
[initial]
type = random
seed = 42
offset = 0.03
amplitude = 0.001
)"},
      {"ch-random-spinodal",
       "Cahn-Hilliard, M = 0.01, eps^2 = 0.005, phi0 = 0.03 + 0.001 rand, combined CN at dt = 1e-4",
       R"([run]
name = ch-random-spinodal
[model]
kind = cahn_hilliard
mobility = 0.01
epsilon_squared = 0.005
[grid]
dims = 2
n = 64
paper_n = 256
length = 2pi
[scheme]
kind = combined_cn
dt = 1e-4
steps = 2000
[initial]
type = random
seed = 42
offset = 0.03
amplitude = 0.001
)"},
      {"mbe-coarsening",
       "MBE without slope selection, M = 0.1, eps = 0.03, dt = 5.2e-3, phi0 = 0.01 rand",
       R"([run]
name = mbe-coarsening
[model]
kind = mbe
mobility = 0.1
epsilon = 0.03
[grid]
dims = 2
n = 64
paper_n = 256
length = 2pi
[scheme]
kind = combined_cn
dt = 5.2e-3
steps = 1000
[initial]
type = random
seed = 42
offset = 0
amplitude = 0.01
)"},
      {"mbe-coarsening-3d",
       "MBE in 3D on [0, pi]^3, dt = 4.3e-3, phi0 = 0.001 rand; M and eps reuse the 2D values",
       R"([run]
name = mbe-coarsening-3d
[model]
kind = mbe
mobility = 0.1
epsilon = 0.03
[grid]
dims = 3
n = 32
paper_n = 128
length = pi
[scheme]
kind = combined_cn
dt = 4.3e-3
steps = 100
[initial]
type = random
seed = 42
offset = 0
amplitude = 0.001
[output]
snapshot_stride = 0
)"},
      {"ternary-bubbles",
       "Ternary CH accuracy test: two tanh bubbles, M = 1e-5, eps = 0.02, Lambda = 7",
       R"([run]
name = ternary-bubbles
[model]
kind = ternary_ch
mobility = 1e-5
epsilon = 0.02
lambda = 7
sigma = 1, 1, 1
[grid]
dims = 2
n = 64
paper_n = 256
length = 2, 2
[scheme]
kind = ternary_cn
dt = 1e-3
t_final = 0.2
[initial]
type = ternary_bubbles
radius = 0.35
x1 = 1.37
x2 = 0.63
y = 1.0
[convergence]
dt_list = 0.02, 0.01, 0.005, 0.0025
reference = self
)"},
      {"ternary-spinodal",
       "Ternary CH spinodal decomposition on [0,2]x[0,1], M = 1e-3, eps = 0.025, dt = 1e-4 (Lambda = 7 assumed)",
       R"([run]
name = ternary-spinodal
[model]
kind = ternary_ch
mobility = 1e-3
epsilon = 0.025
lambda = 7
sigma = 1, 1, 1
[grid]
dims = 2
n = 64, 32
paper_n = 256, 128
length = 2, 1
[scheme]
kind = ternary_cn
dt = 1e-4
steps = 100
[initial]
type = ternary_layers
seed = 42
amplitude = 0.001
)"},
      {"ac-manufactured",
       "Allen-Cahn with forcing for the exact solution exp(-t) cos x cos y, M = 1, eps = 1",
       R"([run]
name = ac-manufactured
[model]
kind = allen_cahn
mobility = 1
epsilon = 1
[grid]
dims = 2
n = 64
length = 2pi
[scheme]
kind = combined_cn
dt = 0.1
t_final = 1
[initial]
type = cos_cos
amplitude = 1
mode = 1
[forcing]
type = manufactured
[convergence]
dt_list = 0.1, 0.05, 0.025, 0.0125, 0.00625
reference = exact
)"},
      {"ch-manufactured",
       "Cahn-Hilliard with forcing for the exact solution exp(-t) cos x cos y, M = 1, eps = 1",
       R"([run]
name = ch-manufactured
[model]
kind = cahn_hilliard
mobility = 1
epsilon = 1
[grid]
dims = 2
n = 64
length = 2pi
[scheme]
kind = combined_cn
dt = 0.1
t_final = 1
[initial]
type = cos_cos
amplitude = 1
mode = 1
[forcing]
type = manufactured
[convergence]
dt_list = 0.1, 0.05, 0.025, 0.0125, 0.00625
reference = exact
)"},
      {"taylor-green",
       "Navier-Stokes Taylor-Green vortex, nu = 0.1, dt = 0.1, 100 steps",
       R"([run]
name = taylor-green
[model]
kind = navier_stokes
nu = 0.1
[grid]
dims = 2
n = 32
length = 2pi
[scheme]
kind = ns_combined
dt = 0.1
steps = 100
[initial]
type = taylor_green
amplitude = 1
[convergence]
dt_list = 0.1, 0.05, 0.025
reference = exact
)"},
  };
  return list;
}

inline const Preset& find_preset(const std::string& name) {
  for (const Preset& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

inline boost::property_tree::ptree preset_tree(const std::string& name) {
  return parse_ini_text(find_preset(name).ini, "preset " + name);
}

inline RunConfig load_preset(const std::string& name) { return config_from_tree(preset_tree(name)); }

inline RunConfig load_config_file(const std::filesystem::path& path) {
  return config_from_tree(read_ini_file(path));
}

inline RunConfig parse_config_text(const std::string& text) {
  return config_from_tree(parse_ini_text(text, "config"));
}

/// Resolved configuration written next to the outputs.
inline std::string to_ini(const RunConfig& c) {
  std::ostringstream o;
  auto list = [](const auto& v, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
  };
  auto d = [](double x) { return format_double(x); };
  auto i = [](long x) { return std::to_string(x); };
  const ModelSpec& s = c.model.spec;
  o << "[run]\nname = " << c.name << "\n[model]\nkind = " << to_string(c.model.kind) << '\n';
  if (c.model.kind == ProblemKind::NavierStokes) {
    o << "nu = " << d(c.model.nu) << '\n';
  } else {
    o << "mobility = " << d(s.mobility) << "\nepsilon = " << d(s.epsilon) << '\n';
    if (c.model.kind == ProblemKind::Ternary) {
      o << "lambda = " << d(s.lambda) << "\nsigma = " << list(s.sigma, d) << '\n';
    }
  }
  o << "[grid]\ndims = " << c.grid.dims() << "\nn = " << list(c.grid.n, i)
    << "\nlength = " << list(c.grid.length, d) << '\n';
  if (!c.grid.paper_n.empty()) o << "paper_n = " << list(c.grid.paper_n, i) << '\n';
  const SchemeConfig& sc = c.scheme.cfg;
  o << "[scheme]\nkind = " << c.scheme.kind << '\n';
  if (sc.kind == SchemeKind::CombinedBdfk) o << "k = " << sc.k << '\n';
  o << "dt = " << d(sc.dt) << "\nt_final = " << d(c.scheme.t_final) << "\ntol_energy = " << d(sc.tol_E)
    << "\nsolve_tol = " << d(sc.solve.tol) << "\nmax_iter = " << sc.solve.max_iter
    << "\nbracket_halfwidth = " << d(sc.solve.bracket_halfwidth)
    << "\ndealias = " << (s.dealias ? "true" : "false") << "\nverify = " << (sc.verify ? "true" : "false")
    << '\n';
  const InitialBlock& ic = c.initial;
  o << "[initial]\ntype = " << ic.type << '\n';
  for (const auto& key : config_detail::initial_keys().at(ic.type)) {
    o << key << " = ";
    if (key == "seed") o << ic.seed;
    else if (key == "mode") o << ic.mode;
    else if (key == "offset") o << d(ic.offset);
    else if (key == "offset2") o << d(ic.offset2);
    else if (key == "amplitude") o << d(ic.amplitude);
    else if (key == "value") o << d(ic.value);
    else if (key == "radius") o << d(ic.radius);
    else if (key == "x1") o << d(ic.x1);
    else if (key == "x2") o << d(ic.x2);
    else if (key == "y") o << d(ic.y);
    o << '\n';
  }
  o << "[forcing]\ntype = " << c.forcing << "\n[output]\ndirectory = " << c.output.directory
    << "\nseries_stride = " << c.output.series_stride << "\nsnapshot_stride = " << c.output.snapshot_stride
    << '\n';
  if (!c.convergence.dt_list.empty()) {
    o << "[convergence]\ndt_list = " << list(c.convergence.dt_list, d) << "\nreference = "
      << c.convergence.reference << "\nreference_factor = " << c.convergence.reference_factor << '\n';
  }
  o << "[compare]\nschemes = " << list(c.compare.schemes, [](const std::string& x) { return x; }) << '\n';
  return o.str();
}

}  // namespace gradflow
