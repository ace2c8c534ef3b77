#pragma once

#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gradflow/errors.hpp"
#include "gradflow/grid.hpp"

namespace gradflow {

/// Decimal form with 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Time series

struct SeriesRecord {
  long step = 0;
  double time = 0.0;
  double energy_total = 0.0;
  double energy_quadratic = 0.0;
  double energy_potential = 0.0;
  double eta = 0.0;
  std::string branch;
  int solver_iters = 0;
  std::vector<double> mass;   // mean of each field
  std::vector<double> extra;  // values of SeriesWriter::extra_columns
};

/// CSV writer; the header is written on construction so an empty run still
/// produces a valid file.
class SeriesWriter {
 public:
  SeriesWriter(const std::filesystem::path& path, std::vector<std::string> field_names,
               std::vector<std::string> extra_columns)
      : path_(path), n_mass_(field_names.size()), n_extra_(extra_columns.size()) {
    out_.open(path, std::ios::out | std::ios::trunc);
    if (!out_) throw IoError("cannot open series file " + path.string() + ": " + std::strerror(errno));
    out_ << "step,time,energy_total,energy_quadratic,energy_potential,eta,branch,solver_iters";
    for (const auto& f : field_names) out_ << ",mass_" << f;
    for (const auto& c : extra_columns) out_ << ',' << c;
    out_ << '\n';
    check("header");
  }

  void write(const SeriesRecord& r) {
    if (r.mass.size() != n_mass_ || r.extra.size() != n_extra_) {
      throw std::invalid_argument("SeriesWriter: record has the wrong number of columns");
    }
    out_ << r.step << ',' << format_double(r.time) << ',' << format_double(r.energy_total) << ','
         << format_double(r.energy_quadratic) << ',' << format_double(r.energy_potential) << ','
         << format_double(r.eta) << ',' << r.branch << ',' << r.solver_iters;
    for (double m : r.mass) out_ << ',' << format_double(m);
    for (double e : r.extra) out_ << ',' << format_double(e);
    out_ << '\n';
    check("record");
  }

  void flush() {
    out_.flush();
    check("flush");
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void check(const char* what) {
    if (!out_) throw IoError("writing " + std::string(what) + " to " + path_.string() + " failed");
  }

  std::filesystem::path path_;
  std::size_t n_mass_;
  std::size_t n_extra_;
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Snapshots: raw little-endian float64 in row-major order (last index
// fastest), plus a `key = value` sidecar with the same stem and suffix .meta.

inline constexpr int kSnapshotSchemaVersion = 1;

struct SnapshotMeta {
  std::string model;
  std::string field;
  long step = 0;
  double time = 0.0;
};

inline std::filesystem::path snapshot_sidecar(const std::filesystem::path& bin) {
  std::filesystem::path p = bin;
  p.replace_extension(".meta");
  return p;
}

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

inline std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace detail

inline void write_snapshot(const std::filesystem::path& bin, const Field& f, const SnapshotMeta& meta) {
  {
    std::ofstream out(bin, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open snapshot " + bin.string() + ": " + std::strerror(errno));
    std::vector<std::uint64_t> words(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      words[i] = detail::to_little_endian(std::bit_cast<std::uint64_t>(f[i]));
    }
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)));
    if (!out) throw IoError("writing snapshot " + bin.string() + " failed");
  }
  const auto side = snapshot_sidecar(bin);
  std::ofstream m(side, std::ios::trunc);
  if (!m) throw IoError("cannot open sidecar " + side.string());
  const PeriodicGrid& g = f.grid();
  m << "schema_version = " << kSnapshotSchemaVersion << '\n'
    << "model = " << meta.model << '\n'
    << "field = " << meta.field << '\n'
    << "step = " << meta.step << '\n'
    << "time = " << format_double(meta.time) << '\n'
    << "dims = " << g.dims() << '\n'
    << "n =";
  for (int d = 0; d < g.dims(); ++d) m << ' ' << g.n(d);
  m << "\nlength =";
  for (int d = 0; d < g.dims(); ++d) m << ' ' << format_double(g.length(d));
  m << "\ndtype = float64_le\norder = row_major\n";
  if (!m) throw IoError("writing sidecar " + side.string() + " failed");
}

struct Snapshot {
  Field field;
  SnapshotMeta meta;
};

namespace detail {

inline Snapshot read_snapshot_unchecked(const std::filesystem::path& bin) {
  const auto kv = detail::read_key_values(snapshot_sidecar(bin));
  auto get = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw IoError("sidecar of " + bin.string() + " lacks '" + key + "'");
    return it->second;
  };
  if (std::stoi(get("schema_version")) != kSnapshotSchemaVersion) {
    throw IoError("unsupported snapshot schema in " + bin.string());
  }
  const int dims = std::stoi(get("dims"));
  if (dims < 1 || dims > PeriodicGrid::kMaxDims) throw IoError("bad dims in sidecar of " + bin.string());
  std::vector<int> n(static_cast<std::size_t>(dims));
  std::vector<double> len(static_cast<std::size_t>(dims));
  std::istringstream ns(get("n")), ls(get("length"));
  for (int d = 0; d < dims; ++d) {
    if (!(ns >> n[d]) || !(ls >> len[d])) throw IoError("malformed grid in sidecar of " + bin.string());
  }
  Snapshot s{Field(PeriodicGrid(n, len)), {}};
  s.meta.model = get("model");
  s.meta.field = get("field");
  s.meta.step = std::stol(get("step"));
  s.meta.time = std::stod(get("time"));

  std::ifstream in(bin, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot " + bin.string());
  std::vector<std::uint64_t> words(s.field.size());
  in.read(reinterpret_cast<char*>(words.data()),
          static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)));
  if (in.gcount() != static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)) ||
      in.peek() != std::char_traits<char>::eof()) {
    throw IoError("snapshot " + bin.string() + " does not match its grid");
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    s.field[i] = std::bit_cast<double>(detail::to_little_endian(words[i]));
  }
  return s;
}

}  // namespace detail

/// Reads a snapshot and its sidecar; malformed metadata is an IoError.
inline Snapshot read_snapshot(const std::filesystem::path& bin) {
  try {
    return detail::read_snapshot_unchecked(bin);
  } catch (const std::logic_error& e) {
    throw IoError("malformed sidecar of " + bin.string() + ": " + e.what());
  }
}

}  // namespace gradflow
