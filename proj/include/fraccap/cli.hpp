#ifndef FRACCAP_CLI_HPP
#define FRACCAP_CLI_HPP

// Batch runner behind the fraccap executable. Each subcommand has a schema of
// typed keys with defaults; values come from the defaults, then an optional
// `key = value` file, then command-line flags.

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fraccap/capacity.hpp"
#include "fraccap/errors.hpp"
#include "fraccap/experiments.hpp"

namespace fraccap::cli {

using Json = nlohmann::ordered_json;

/// Raised for anything the user can fix: bad keys, bad values, bad files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ValueType { real, integer, text, integer_list };

struct ParamSpec {
  std::string key;
  ValueType type;
  std::string fallback;
  std::string help;
};

struct Schema {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;

  const ParamSpec* find(const std::string& key) const {
    for (const auto& p : params)
      if (p.key == key) return &p;
    return nullptr;
  }
};

inline const std::vector<Schema>& schemas() {
  using V = ValueType;
  static const std::vector<Schema> all = {
      {"kernel-table",
       "build the profile of P_s and report its bound ratios",
       {{"s", V::real, "0.5", "order s in (0, 1]"},
        {"N", V::integer, "1", "spatial dimension"},
        {"u_max", V::real, "1000", "end of the tabulated range (s < 1)"},
        {"abs_tol", V::real, "1e-10", "absolute quadrature tolerance"},
        {"decay_points", V::integer, "10", "log-grid points per axis for the decay ratios"}}},
      {"segment",
       "potential and capacity of a horizontal or vertical segment",
       {{"orientation", V::text, "horizontal", "horizontal or vertical"},
        {"L", V::real, "1", "segment length"},
        {"atoms", V::integer, "400", "LP atoms on the segment"},
        {"mode", V::text, "half", "half or tilde"},
        {"x0", V::real, "auto", "constraint grid lower x"},
        {"x1", V::real, "auto", "constraint grid upper x"},
        {"t0", V::real, "auto", "constraint grid lower t"},
        {"t1", V::real, "auto", "constraint grid upper t"},
        {"nx", V::integer, "auto", "constraint grid nodes along x"},
        {"nt", V::integer, "auto", "constraint grid nodes along t"},
        {"rho", V::real, "auto", "constraint exclusion radius"},
        {"verify_nx", V::integer, "auto", "verification grid nodes along x (default 2 nx)"},
        {"verify_nt", V::integer, "auto", "verification grid nodes along t (default 2 nt)"},
        {"verify_rho", V::real, "auto", "verification exclusion radius (default rho / 2)"},
        {"potential_atoms", V::integer, "2000", "atoms for the closed-form potential check (horizontal)"},
        {"level_first", V::integer, "2", "first level of the vertical density sequence"},
        {"level_last", V::integer, "6", "last level of the vertical density sequence"}}},
      {"cantor",
       "corner Cantor set: generation data, growth, capacity decay, corner sums",
       {{"N", V::integer, "1", "spatial dimension"},
        {"data_k_max", V::integer, "6", "largest generation for the data and growth checks"},
        {"decay_k_max", V::integer, "4", "largest generation of the capacity LP sequence (0 skips, N = 1 only)"},
        {"corner_k", V::integer, "0", "generation of the corner cube"},
        {"corner_m", V::integer_list, "2,4,8", "local depths for the corner sums"}}},
      {"capacity",
       "capacity lower bound of a set read from a descriptor file",
       {{"set", V::text, "", "descriptor file (segment / cube / point lines)"},
        {"mode", V::text, "half", "half, tilde or growth_s"},
        {"s", V::real, "0.5", "order s"},
        {"N", V::integer, "1", "spatial dimension"},
        {"atoms", V::integer, "400", "atoms on a segment (ignored for cubes and points)"},
        {"grid_res", V::integer, "101", "constraint nodes per axis (half / tilde)"},
        {"grid_margin", V::real, "0.5", "grid margin around the bounding box, relative to its largest extent"},
        {"rho", V::real, "auto", "constraint exclusion radius"},
        {"verify_res", V::integer, "auto", "verification nodes per axis (default 2 grid_res)"},
        {"verify_rho", V::real, "auto", "verification exclusion radius (default rho / 2)"},
        {"max_rows", V::integer, "5000", "active-row cap of the constraint generation"},
        {"content_depth", V::integer, "10", "lattice generations for the content bound"},
        {"content_metric", V::text, "parabolic", "parabolic or euclidean"}}},
      {"growth",
       "growth constant of a measure file or a Cantor generation",
       {{"measure", V::text, "", "measure file; empty uses the Cantor generation"},
        {"cantor_k", V::integer, "3", "Cantor generation when no file is given"},
        {"s", V::real, "0.5", "order s"},
        {"N", V::integer, "1", "spatial dimension"},
        {"d", V::real, "auto", "growth degree; auto is N + 2s - 1"},
        {"radius_samples", V::integer, "0", "radius quantiles per center; 0 checks every distance"}}},
      {"localize",
       "sup norm of the potential after multiplying by a bump",
       {{"trials", V::integer, "20", "random signed measures"},
        {"per_axis", V::integer, "24", "lattice atoms per axis"},
        {"resolutions", V::integer_list, "41,81,161", "grid nodes per axis for each refinement"}}},
      {"bmo-check",
       "Lip and parabolic BMO estimators for a growth measure, plus the F_s tail",
       {{"s", V::real, "0.75", "order s in (1/2, 1)"},
        {"generation", V::integer, "3", "Cantor generation"},
        {"pairs", V::integer, "300", "time pairs for the Lip estimator"},
        {"cubes", V::integer, "50", "random parabolic cubes"},
        {"nodes_per_cube", V::integer, "64", "sampling nodes per cube"},
        {"window", V::real, "20", "truncation window of the fractional derivative"},
        {"mesh", V::real, "0.001", "inner cutoff of the fractional derivative"},
        {"tail_samples", V::integer, "30", "sample points of the F_s tail check"}}},
  };
  return all;
}

inline const Schema& schema_for(const std::string& name) {
  for (const auto& s : schemas())
    if (s.name == name) return s;
  throw ConfigError("unknown subcommand: " + name);
}

// Keys every subcommand accepts.
inline const std::vector<ParamSpec>& common_params() {
  static const std::vector<ParamSpec> c = {{"seed", ValueType::integer, "7", "seed of every random draw"}};
  return c;
}

inline const ParamSpec* find_param(const Schema& s, const std::string& key) {
  if (const auto* p = s.find(key)) return p;
  for (const auto& p : common_params())
    if (p.key == key) return &p;
  return nullptr;
}

namespace detail {

inline std::string trim(const std::string& v) {
  const auto a = v.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = v.find_last_not_of(" \t\r");
  return v.substr(a, b - a + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) throw ConfigError(key + ": not a finite number: '" + v + "'");
  return out;
}

inline long long parse_integer(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return out;
}

inline std::vector<long long> parse_list(const std::string& key, const std::string& v) {
  std::vector<long long> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_integer(key, trim(tok)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

inline void check_value(const ParamSpec& p, const std::string& v) {
  if (v == "auto" && p.fallback == "auto") return;
  switch (p.type) {
    case ValueType::real: parse_real(p.key, v); break;
    case ValueType::integer: parse_integer(p.key, v); break;
    case ValueType::integer_list: parse_list(p.key, v); break;
    case ValueType::text: break;
  }
}

}  // namespace detail

struct RunConfig {
  std::string subcommand;
  /// Every schema key, resolved to its final string value.
  std::map<std::string, std::string> values;
  std::filesystem::path out_dir = "fraccap-out";
  std::string config_file;
  /// Settings the run used that are not keys (fixed by the experiment).
  Json fixed = Json::object();

  const std::string& raw(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("missing key: " + key);
    return it->second;
  }
  double real(const std::string& key) const { return detail::parse_real(key, raw(key)); }
  long long integer(const std::string& key) const { return detail::parse_integer(key, raw(key)); }
  std::vector<long long> list(const std::string& key) const { return detail::parse_list(key, raw(key)); }
  bool is_auto(const std::string& key) const { return raw(key) == "auto"; }
};

/// `key = value` lines; blank lines and lines starting with '#' are skipped.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Defaults, then the config file, then flags. Unknown keys are rejected.
inline RunConfig resolve(const std::string& subcommand, const std::string& config_file,
                         const std::map<std::string, std::string>& flags, const std::filesystem::path& out_dir) {
  const Schema& schema = schema_for(subcommand);
  RunConfig cfg;
  cfg.subcommand = subcommand;
  cfg.out_dir = out_dir;
  cfg.config_file = config_file;
  for (const auto& p : common_params()) cfg.values[p.key] = p.fallback;
  for (const auto& p : schema.params) cfg.values[p.key] = p.fallback;
  auto apply = [&](const std::map<std::string, std::string>& src, const char* origin) {
    for (const auto& [k, v] : src) {
      const ParamSpec* p = find_param(schema, k);
      if (!p) throw ConfigError(std::string("unknown key in ") + origin + ": " + k);
      detail::check_value(*p, v);
      cfg.values[k] = v;
    }
  };
  if (!config_file.empty()) apply(parse_config_text(read_file(config_file)), "config file");
  apply(flags, "flags");
  return cfg;
}

// ---------------------------------------------------------------------------
// Artifacts

/// Lock file plus the list of files written so far; on failure everything is
/// removed, including the output directory if this run created it.
class ArtifactSession {
 public:
  explicit ArtifactSession(std::filesystem::path dir) : dir_(std::move(dir)) {
    namespace fs = std::filesystem;
    if (fs::exists(dir_) && !fs::is_directory(dir_)) throw ConfigError("output path is not a directory: " + dir_.string());
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    }
    lock_ = dir_ / ".fraccap.lock";
    const int fd = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      if (created_dir_) fs::remove(dir_);
      throw ConfigError("output directory is locked by another run: " + dir_.string());
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }

  ArtifactSession(const ArtifactSession&) = delete;
  ArtifactSession& operator=(const ArtifactSession&) = delete;

  ~ArtifactSession() {
    std::error_code ec;
    if (!committed_) {
      for (const auto& f : written_) std::filesystem::remove(f, ec);
    }
    std::filesystem::remove(lock_, ec);
    if (!committed_ && created_dir_) std::filesystem::remove(dir_, ec);
  }

  /// Opens dir/name for writing and records it for cleanup.
  std::ofstream open(const std::string& name) {
    const auto path = dir_ / name;
    written_.push_back(path);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
  }

  void write_json(const std::string& name, const Json& j) {
    auto os = open(name);
    os << j.dump(2) << "\n";
  }

  void commit() { committed_ = true; }
  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::filesystem::path lock_;
  std::vector<std::filesystem::path> written_;
  bool created_dir_ = false;
  bool committed_ = false;
};

inline Json manifest_json(const RunConfig& cfg) {
  Json j;
  j["subcommand"] = cfg.subcommand;
  j["config_file"] = cfg.config_file;
  j["out_dir"] = cfg.out_dir.string();
  // Values typed by their schema entry; "auto" never survives resolution.
  const Schema& schema = schema_for(cfg.subcommand);
  Json params = Json::object();
  for (const auto& [k, v] : cfg.values) {
    const ParamSpec* spec = find_param(schema, k);
    if (!spec || spec->type == ValueType::text || v == "auto") {
      params[k] = v;
      continue;
    }
    switch (spec->type) {
      case ValueType::real: params[k] = detail::parse_real(k, v); break;
      case ValueType::integer: params[k] = detail::parse_integer(k, v); break;
      default: params[k] = detail::parse_list(k, v); break;
    }
  }
  j["parameters"] = std::move(params);
  j["fixed"] = cfg.fixed;
  return j;
}

// ---------------------------------------------------------------------------
// Subcommands. Each resolves "auto" values into cfg (so the manifest shows
// what was used), then fills the report.

namespace detail {

inline std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline int checked_int(const RunConfig& cfg, const std::string& key, long long lo, long long hi) {
  const long long v = cfg.integer(key);
  if (v < lo || v > hi)
    throw ConfigError(key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

inline FracParams checked_params(const RunConfig& cfg) {
  const double s = cfg.real("s");
  const int N = checked_int(cfg, "N", 1, 8);
  if (!(s > 0.0 && s <= 1.0)) throw ConfigError("s must lie in (0, 1]");
  return FracParams(s, N);
}

inline void run_kernel_table(RunConfig& cfg, ArtifactSession& out, Json& report) {
  const FracParams params = checked_params(cfg);
  QuadratureSettings q;
  q.u_max = cfg.real("u_max");
  q.abs_tol = cfg.real("abs_tol");
  if (!(q.u_max > 2.0)) throw ConfigError("u_max must exceed 2");
  if (!(q.abs_tol > 0.0)) throw ConfigError("abs_tol must be positive");
  if (params.s == 1.0) q.u_max = 8.0;
  cfg.fixed["panel_budget"] = q.panel_budget;
  cfg.fixed["envelope_cutoff"] = q.envelope_cutoff;
  cfg.fixed["direct_limit"] = q.direct_limit;
  cfg.fixed["extrapolation_limit"] = q.extrapolation_limit;
  cfg.fixed["effective_u_max"] = q.u_max;
  cfg.fixed["ratio_grid"] = "40 log-spaced |x| at t = 1";
  cfg.fixed["decay_grid"] = "log-spaced |x|, t in [1e-2, 1e2]";
  cfg.fixed["decay_alphas"] = {0.25, 0.5, 0.75};
  const auto table = experiments::kernel_table(params, q, checked_int(cfg, "decay_points", 2, 200));
  auto os = out.open("profile.txt");
  save_profile(os, table.profile);
  report["results"] = table.json;
  report["artifacts"] = {"profile.txt"};
}

inline void run_segment(RunConfig& cfg, ArtifactSession& out, Json& report) {
  const std::string orientation = cfg.raw("orientation");
  if (orientation != "horizontal" && orientation != "vertical")
    throw ConfigError("orientation must be horizontal or vertical");
  const double L = cfg.real("L");
  if (!(L > 0.0)) throw ConfigError("L must be positive");
  const int atoms = checked_int(cfg, "atoms", 1, 2000);
  const CapacityMode mode = parse_capacity_mode(cfg.raw("mode"));
  if (mode == CapacityMode::growth_s) throw ConfigError("segment: mode must be half or tilde");
  const bool horizontal = orientation == "horizontal";
  CapacityOptions opt = horizontal ? experiments::horizontal_segment_options(atoms, L)
                                   : experiments::vertical_segment_options(atoms, L);
  // Explicit values replace the defaults; auto ones are written back so the
  // manifest shows them.
  GridSpec& g = *opt.grid;
  auto real_or = [&](const char* key, double& slot) {
    if (!cfg.is_auto(key)) slot = cfg.real(key);
    cfg.values[key] = fmt_real(slot);
  };
  auto int_or = [&](const char* key, int& slot) {
    if (!cfg.is_auto(key)) slot = checked_int(cfg, key, 2, 100000);
    cfg.values[key] = std::to_string(slot);
  };
  real_or("x0", g.lo[0]);
  real_or("x1", g.hi[0]);
  real_or("t0", g.lo[1]);
  real_or("t1", g.hi[1]);
  int_or("nx", g.resolution[0]);
  int_or("nt", g.resolution[1]);
  real_or("rho", g.exclusion);
  if (g.exclusion < 0.0) throw ConfigError("rho must be nonnegative");
  GridSpec v = g;
  v.resolution = {2 * g.resolution[0], 2 * g.resolution[1]};
  v.exclusion = 0.5 * g.exclusion;
  int_or("verify_nx", v.resolution[0]);
  int_or("verify_nt", v.resolution[1]);
  real_or("verify_rho", v.exclusion);
  opt.verify_grid = v;

  Segment seg;
  seg.orientation = horizontal ? Orientation::horizontal : Orientation::vertical;
  seg.length = L;
  const auto est = capacity_lower(seg, mode, FracParams(0.5, 1), atoms, opt);
  Json res;
  res["orientation"] = orientation;
  res["capacity"] = to_json(est);
  res["reference_lower"] = horizontal ? Json(L / std::numbers::pi) : Json(nullptr);
  Json artifacts = Json::array();
  if (horizontal) {
    experiments::SegmentPotentialConfig pc;
    pc.length = L;
    pc.atoms = checked_int(cfg, "potential_atoms", 1, 1000000);
    pc.sup_grid = GridSpec::box2(-L, 2.0 * L, 0.01 * L, 2.0 * L, 301, 200, 0.0);
    cfg.fixed["potential_sup_grid"] = grid_json(pc.sup_grid);
    cfg.fixed["potential_probe_points"] = "x = L (0.05 + 0.1 i), i < 10; t in {0.05, 0.1, 0.2, 0.5, 1}";
    cfg.fixed["convergence_atoms"] = pc.convergence_atoms;
    const auto pot = experiments::segment_potential(pc);
    res["potential"] = pot.json;
    auto os = out.open("potential_grid.csv");
    write_grid_csv(os, pc.sup_grid, pot.grid_values.values);
    artifacts.push_back("potential_grid.csv");
  } else {
    const int first = checked_int(cfg, "level_first", 0, 8);
    const int last = checked_int(cfg, "level_last", first, 8);
    cfg.fixed["sequence_rule"] = "level m: 2^(m+2) atoms, grid [-L, L] x [-L/2, 3L/2] with atoms + 1 nodes per axis, rho = 2L / atoms";
    const auto levels = experiments::vertical_segment_sequence(first, last, L);
    Json seq = Json::array();
    auto os = out.open("vertical_sequence.csv");
    os << "level,atoms,lower,upper\n";
    for (const auto& lv : levels) {
      Json e;
      e["level"] = lv.level;
      e["atoms"] = lv.atoms;
      e["lower"] = lv.estimate.lower;
      e["upper"] = lv.estimate.upper;
      seq.push_back(std::move(e));
      os << lv.level << ',' << lv.atoms << ',' << fmt_real(lv.estimate.lower) << ',' << fmt_real(lv.estimate.upper)
         << '\n';
    }
    res["sequence"] = std::move(seq);
    artifacts.push_back("vertical_sequence.csv");
  }
  report["results"] = std::move(res);
  report["artifacts"] = std::move(artifacts);
}

inline void run_cantor(RunConfig& cfg, ArtifactSession& out, Json& report) {
  const int N = checked_int(cfg, "N", 1, 8);
  const int data_k = checked_int(cfg, "data_k_max", 0, 20);
  const int decay_k = checked_int(cfg, "decay_k_max", 0, 5);
  const int corner_k = checked_int(cfg, "corner_k", 0, 20);
  const auto corner_m = cfg.list("corner_m");
  CantorSpec probe;
  probe.N = N;
  probe.generation = data_k;
  if (probe.cube_count() > probe.cap) throw ConfigError("data_k_max exceeds the cube cap");
  if (decay_k > 0 && N != 1) throw ConfigError("the capacity decay sequence needs N = 1");
  for (long long m : corner_m)
    if (m < 1 || m > 20) throw ConfigError("corner_m entries must lie in [1, 20]");

  cfg.fixed["decay_grid_rule"] = "[-1/4, 5/4]^2 with 3 4^k + 1 nodes per axis, rho = side / 2, one atom per cube center";
  Json res;
  Json data = Json::array();
  for (const auto& c : experiments::cantor_data_checks(data_k, N)) {
    Json e;
    e["k"] = c.k;
    e["exact"] = c.exact;
    e["growth_constant"] = c.growth;
    data.push_back(std::move(e));
  }
  res["generations"] = std::move(data);
  Json decay = Json::array();
  for (const auto& lv : experiments::cantor_decay(decay_k)) {
    Json e;
    e["k"] = lv.k;
    e["capacity"] = to_json(lv.estimate);
    decay.push_back(std::move(e));
  }
  res["capacity_decay"] = std::move(decay);
  Json corners = Json::array();
  CantorSpec spec;
  spec.N = N;
  for (long long m : corner_m) {
    Json e;
    e["k"] = corner_k;
    e["m"] = m;
    e["value"] = cantor_corner_sum(spec, corner_k, static_cast<int>(m));
    corners.push_back(std::move(e));
  }
  res["corner_sums"] = std::move(corners);
  auto os = out.open("generations.csv");
  os << "k,cubes,side,weight,growth_constant\n";
  for (const auto& e : res["generations"]) {
    CantorSpec sp;
    sp.N = N;
    sp.generation = e["k"].get<int>();
    os << sp.generation << ',' << sp.cube_count() << ',' << fmt_real(sp.side()) << ',' << fmt_real(sp.cube_mass())
       << ',' << fmt_real(e["growth_constant"].get<double>()) << '\n';
  }
  report["results"] = std::move(res);
  report["artifacts"] = {"generations.csv"};
}

inline SetDescriptor load_descriptor(const std::string& path, const FracParams& params) {
  std::istringstream is(read_file(path));
  std::string line;
  std::vector<Segment> segs;
  std::vector<ParabolicCube> cubes;
  std::vector<SpacetimePoint> points;
  std::size_t lineno = 0;
  const int N = params.N;
  auto numbers = [&](std::istringstream& ls, std::size_t count) {
    std::vector<double> v;
    std::string tok;
    while (ls >> tok) v.push_back(parse_real("set line " + std::to_string(lineno), tok));
    if (v.size() != count)
      throw ConfigError("set line " + std::to_string(lineno) + ": expected " + std::to_string(count) + " numbers");
    return v;
  };
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ls(t);
    std::string kind;
    ls >> kind;
    if (kind == "segment") {
      std::string o;
      ls >> o;
      if (o != "horizontal" && o != "vertical") throw ConfigError("set: segment orientation must be horizontal or vertical");
      const auto v = numbers(ls, N + 2);
      Segment s;
      s.orientation = o == "horizontal" ? Orientation::horizontal : Orientation::vertical;
      s.length = v[0];
      s.anchor = SpacetimePoint(std::vector<double>(v.begin() + 1, v.begin() + 1 + N), v[N + 1]);
      segs.push_back(s);
    } else if (kind == "cube") {
      const auto v = numbers(ls, N + 2);
      cubes.push_back(ParabolicCube::make(std::vector<double>(v.begin(), v.begin() + N), v[N], v[N + 1], params));
    } else if (kind == "point") {
      const auto v = numbers(ls, N + 1);
      points.emplace_back(std::vector<double>(v.begin(), v.begin() + N), v[N]);
    } else {
      throw ConfigError("set line " + std::to_string(lineno) + ": unknown element '" + kind + "'");
    }
  }
  const int kinds = !segs.empty() + !cubes.empty() + !points.empty();
  if (kinds != 1) throw ConfigError("set: the file must hold elements of exactly one kind");
  if (segs.size() > 1) throw ConfigError("set: at most one segment");
  SetDescriptor out;
  if (!segs.empty())
    out = segs.front();
  else if (!cubes.empty())
    out = UnionOfCubes{cubes};
  else
    out = PointSet{points};
  validate(out);
  return out;
}

inline void run_capacity(RunConfig& cfg, ArtifactSession&, Json& report) {
  const FracParams params = checked_params(cfg);
  const CapacityMode mode = parse_capacity_mode(cfg.raw("mode"));
  if (cfg.raw("set").empty()) throw ConfigError("capacity: the set key is required");
  const SetDescriptor set = load_descriptor(cfg.raw("set"), params);
  const int atoms = checked_int(cfg, "atoms", 1, 2000);
  CapacityOptions opt;
  opt.max_rows = static_cast<std::size_t>(checked_int(cfg, "max_rows", 1, 1000000));
  opt.content_depth = checked_int(cfg, "content_depth", 0, 30);
  const std::string metric = cfg.raw("content_metric");
  if (metric != "parabolic" && metric != "euclidean") throw ConfigError("content_metric must be parabolic or euclidean");
  opt.content_metric = metric == "parabolic" ? ContentMetric::parabolic : ContentMetric::euclidean;
  if (mode != CapacityMode::growth_s) {
    const Box bb = bounding_box(set, params.N);
    double extent = 0.0;
    for (std::size_t k = 0; k < bb.lo.size(); ++k) extent = std::max(extent, bb.hi[k] - bb.lo[k]);
    if (extent == 0.0) extent = 1.0;
    const double margin = cfg.real("grid_margin") * extent;
    if (!(margin > 0.0)) throw ConfigError("grid_margin must be positive");
    const int res = checked_int(cfg, "grid_res", 2, 100000);
    GridSpec g;
    for (std::size_t k = 0; k < bb.lo.size(); ++k) {
      g.lo.push_back(bb.lo[k] - margin);
      g.hi.push_back(bb.hi[k] + margin);
      g.resolution.push_back(res);
    }
    if (cfg.is_auto("rho")) {
      // Twice the atom spacing for a segment, half the smallest cube, half
      // the closest pair of points.
      double rho = 0.0;
      if (const auto* seg = std::get_if<Segment>(&set)) {
        rho = 2.0 * seg->length / atoms;
      } else if (const auto* u = std::get_if<UnionOfCubes>(&set)) {
        rho = std::numeric_limits<double>::infinity();
        for (const auto& q : u->cubes) rho = std::min(rho, 0.5 * q.spatial_side);
      } else {
        const auto& pts = std::get<PointSet>(set).points;
        DiscreteMeasure mu(params.N, pts, std::vector<double>(pts.size(), 1.0));
        const auto d = fraccap::detail::pairwise_distances(mu, params);
        rho = d.empty() ? 0.5 * extent : 0.5 * *std::min_element(d.begin(), d.end());
      }
      cfg.values["rho"] = fmt_real(rho);
    }
    g.exclusion = cfg.real("rho");
    if (g.exclusion < 0.0) throw ConfigError("rho must be nonnegative");
    GridSpec v = default_verify_grid(g);
    if (!cfg.is_auto("verify_res")) v.resolution.assign(v.resolution.size(), checked_int(cfg, "verify_res", 2, 100000));
    if (!cfg.is_auto("verify_rho")) v.exclusion = cfg.real("verify_rho");
    cfg.values["verify_res"] = std::to_string(v.resolution[0]);
    cfg.values["verify_rho"] = fmt_real(v.exclusion);
    opt.grid = g;
    opt.verify_grid = v;
  } else {
    // Grid keys do not apply to growth_s.
    for (const char* k : {"rho", "verify_res", "verify_rho"})
      if (cfg.is_auto(k)) cfg.values[k] = "unused";
  }
  const auto est = capacity_lower(set, mode, params, atoms, opt);
  Json res;
  res["capacity"] = to_json(est);
  Json diag;
  diag["verified_max"] = est.verified_max;
  diag["lp_value"] = est.lp_value;
  diag["active_constraints"] = est.active_constraints;
  diag["rounds"] = est.rounds;
  diag["row_cap_hit"] = est.row_cap_hit;
  diag["content_metric"] = to_string(est.content.metric);
  diag["content_generation"] = est.content.best_generation;
  res["diagnostics"] = std::move(diag);
  report["results"] = std::move(res);
  report["artifacts"] = Json::array();
}

inline void run_growth(RunConfig& cfg, ArtifactSession&, Json& report) {
  const FracParams params = checked_params(cfg);
  DiscreteMeasure mu;
  std::string source;
  if (!cfg.raw("measure").empty()) {
    std::istringstream is(read_file(cfg.raw("measure")));
    mu = load_measure(is, params.N);
    source = "file";
  } else {
    CantorSpec spec;
    spec.N = params.N;
    spec.generation = checked_int(cfg, "cantor_k", 0, 20);
    if (spec.cube_count() > spec.cap) throw ConfigError("cantor_k exceeds the cube cap");
    mu = cantor_generation(spec).measure;
    source = "cantor";
  }
  if (mu.empty()) throw ConfigError("growth: empty measure");
  if (cfg.is_auto("d")) cfg.values["d"] = fmt_real(params.critical_dimension());
  const double d = cfg.real("d");
  if (!(d > 0.0)) throw ConfigError("d must be positive");
  const auto rep = growth_report(mu, d, params, static_cast<std::size_t>(checked_int(cfg, "radius_samples", 0, 1000000)));
  Json res;
  res["source"] = source;
  res["atoms"] = mu.size();
  res["total_mass"] = mu.total_mass();
  res["d"] = d;
  res["growth_constant"] = rep.constant;
  res["radius_floor"] = rep.radius_floor;
  res["floor_by_convention"] = rep.floor_by_convention;
  res["radii_checked"] = rep.radii_checked;
  res["argmax_atom"] = rep.argmax_atom;
  res["argmax_radius"] = rep.argmax_radius;
  report["results"] = std::move(res);
  report["artifacts"] = Json::array();
}

inline void run_localize(RunConfig& cfg, ArtifactSession& out, Json& report) {
  const int trials = checked_int(cfg, "trials", 1, 10000);
  const int per_axis = checked_int(cfg, "per_axis", 2, 1000);
  std::vector<int> res;
  for (long long r : cfg.list("resolutions")) {
    if (r < 2 || r > 100000) throw ConfigError("resolutions entries must lie in [2, 100000]");
    res.push_back(static_cast<int>(r));
  }
  const auto seed = static_cast<unsigned>(cfg.integer("seed"));
  cfg.fixed["grid_box"] = "[-0.5, 1.5]^2";
  cfg.fixed["exclusion"] = 0.25 / per_axis;
  cfg.fixed["bump_cube"] = "[0, 1]^2";
  cfg.fixed["density_modes"] = 4;
  const auto r = experiments::localization(trials, seed, per_axis, res);
  auto os = out.open("localization.csv");
  os << "trial,resolution,constant\n";
  for (std::size_t i = 0; i < r.constants.size(); ++i)
    os << i / res.size() << ',' << res[i % res.size()] << ',' << fmt_real(r.constants[i]) << '\n';
  report["results"] = r.json;
  report["artifacts"] = {"localization.csv"};
}

inline void run_bmo_check(RunConfig& cfg, ArtifactSession&, Json& report) {
  experiments::RegularityConfig rc;
  rc.s = cfg.real("s");
  if (!(rc.s > 0.5 && rc.s < 1.0)) throw ConfigError("bmo-check: s must lie in (1/2, 1)");
  rc.generation = checked_int(cfg, "generation", 0, 6);
  rc.pairs = static_cast<std::size_t>(checked_int(cfg, "pairs", 1, 1000000));
  rc.cubes = static_cast<std::size_t>(checked_int(cfg, "cubes", 1, 100000));
  rc.nodes_per_cube = checked_int(cfg, "nodes_per_cube", 1, 100000);
  rc.window = cfg.real("window");
  rc.mesh = cfg.real("mesh");
  if (!(rc.mesh > 0.0 && rc.window > rc.mesh)) throw ConfigError("need 0 < mesh < window");
  rc.seed = static_cast<unsigned>(cfg.integer("seed"));
  const int samples = checked_int(cfg, "tail_samples", 1, 100000);
  cfg.fixed["lip_pairs_box"] = "x in [-1/4, 5/4] at least side/2 from every atom x; t in [-1/2, 3/2]; gaps log-uniform in [1e-3, 1]";
  cfg.fixed["cube_box"] = "[0, 1]^2, sides log-uniform in [1e-2, 1]";
  cfg.fixed["decay"] = 1.0 / (2.0 * rc.s);
  cfg.fixed["tail_window"] = 50.0;
  cfg.fixed["tail_range"] = "t in [-10, 10], cell centers";
  Json res;
  res["regularity"] = experiments::growth_regularity(rc).json;
  res["tail"] = experiments::fs_tail_bound(rc.s, samples).json;
  report["results"] = std::move(res);
  report["artifacts"] = Json::array();
}

}  // namespace detail

/// Runs a resolved configuration. Returns 0 on success, 1 on a validation
/// failure, 2 on a numerical failure; on failure the run leaves no files.
inline int run(RunConfig cfg, std::ostream& err) {
  try {
    ArtifactSession out(cfg.out_dir);
    const auto start = std::chrono::steady_clock::now();
    Json report;
    report["subcommand"] = cfg.subcommand;
    if (cfg.subcommand == "kernel-table")
      detail::run_kernel_table(cfg, out, report);
    else if (cfg.subcommand == "segment")
      detail::run_segment(cfg, out, report);
    else if (cfg.subcommand == "cantor")
      detail::run_cantor(cfg, out, report);
    else if (cfg.subcommand == "capacity")
      detail::run_capacity(cfg, out, report);
    else if (cfg.subcommand == "growth")
      detail::run_growth(cfg, out, report);
    else if (cfg.subcommand == "localize")
      detail::run_localize(cfg, out, report);
    else if (cfg.subcommand == "bmo-check")
      detail::run_bmo_check(cfg, out, report);
    else
      throw ConfigError("unknown subcommand: " + cfg.subcommand);
    report["runtime_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out.write_json("manifest.json", manifest_json(cfg));
    out.write_json("report.json", report);
    out.commit();
    return 0;
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace fraccap::cli

#endif
