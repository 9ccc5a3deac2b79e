#include "randquad/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "randquad/error.hpp"

namespace randquad::harness {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view field, std::string_view text, std::string_view expected) {
  throw Error(ErrorCode::ConfigError,
              "field '" + std::string(field) + "': '" + std::string(text) + "' is not " + std::string(expected));
}

const std::map<std::string, std::map<std::string, std::string>>& command_defaults() {
  static const std::map<std::string, std::map<std::string, std::string>> table = {
      {"green-point", {{"law", "point(0,0)"}, {"z", "2,0"}}},
      {"global-green", {{"n", "100000"}}},
      {"dimension", {{"n", "100000"}}},
      {"sweep-r", {{"n", "20000"}}},
      {"asymptotics", {{"n", "10000"}}},
      {"fast-escape", {{"law", "uniform(0,0,1)"}, {"n", "100000"}}},
      {"perturb", {{"n", "100000"}}},
      {"harmonicity", {{"n", "20000"}}},
      {"stability", {{"deltas", "0.05,0.02,0.01"}, {"tree_cap", "18"}}},
      {"julia-render", {{"law", "point(-1,0)"}, {"points", "200000"}, {"depth", "30"}}},
      {"local-dim", {{"law", "point(4,0)"}, {"omegas", "1"}, {"depth", "40"}, {"n", "20000"}}},
      {"verify-all", {}},
  };
  return table;
}

const std::map<std::string, std::string>& command_descriptions() {
  static const std::map<std::string, std::string> table = {
      {"green-point", "certified g_omega(z) for one parameter sequence of the law"},
      {"global-green", "Monte-Carlo mean of g_omega(0) over the law"},
      {"dimension", "Lyapunov exponent ln2 + g(0) and harmonic-measure dimension"},
      {"sweep-r", "coupled continuity scan of R -> g_R(0) for uniform(0,0,R)"},
      {"asymptotics", "g_R(0) / ln R against its analytic sandwich"},
      {"fast-escape", "P(g_omega(0) < 2^-k) and its exponential decay rate"},
      {"perturb", "constancy of g(0) under c0 + delta * (unit disc)"},
      {"harmonicity", "mean-value residual of lambda -> g_lambda(0) on a circle"},
      {"stability", "distance of perturbed Julia samples from J(z^2 + c0)"},
      {"julia-render", "backward samples of J_omega, raster and point cloud"},
      {"local-dim", "local dimension of the harmonic measure against ln2 / (ln2 + g(0))"},
      {"verify-all", "every acceptance criterion at the chosen budget"},
  };
  return table;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"law", ValueType::String, "uniform(0,0,4)", "",
       "parameter law: uniform(cx,cy,r) | perturb(c0x,c0y,lx,ly) | point(cx,cy) | list(file.csv)"},
      {"seed", ValueType::Integer, "1", "", "master seed (64-bit unsigned)"},
      {"n", ValueType::Integer, "10000", "samples", "Monte-Carlo sample count N"},
      {"tol", ValueType::Real, "1e-9", "nats", "certified tolerance of each Green evaluation"},
      {"depth_cap", ValueType::Integer, "1000", "iterations", "iterations inside D(0,R0) before reporting no escape"},
      {"tree_cap", ValueType::Integer, "22", "levels", "depth of exact preimage trees (stability reference cloud)"},
      {"depth", ValueType::Integer, "40", "levels", "preimage depth of backward samples"},
      {"z", ValueType::Complex, "0,0", "", "evaluation point re,im"},
      {"r_grid", ValueType::RealList, "0.5,2,8", "", "radii R of the continuity scan"},
      {"h_list", ValueType::RealList, "0.1,0.05,0.025", "", "steps h of the continuity scan, decreasing"},
      {"r_list", ValueType::RealList, "100,10000,1000000", "", "radii R of the asymptotic check"},
      {"delta", ValueType::Real, "0.1", "", "delta of the lower bound (1-delta^2) ln(delta R) / 2"},
      {"deltas", ValueType::RealList, "0.01,0.03,0.05", "", "perturbation sizes |lambda|"},
      {"c0", ValueType::Complex, "1,0", "", "centre of the perturbed family, outside the Mandelbrot set"},
      {"radius", ValueType::Real, "0.03", "", "circle radius r of the harmonicity check"},
      {"rotations", ValueType::Integer, "16", "", "roots of unity m on the harmonicity circle"},
      {"omegas", ValueType::Integer, "100", "sequences", "fixed parameter sequences (harmonicity, local-dim)"},
      {"k_min", ValueType::Integer, "1", "", "smallest k of the fast-escape fit"},
      {"k_max", ValueType::Integer, "8", "", "largest k of the fast-escape fit"},
      {"points", ValueType::Integer, "20000", "points", "sample points (stability, julia-render)"},
      {"epsilon", ValueType::Real, "0.1", "", "allowed distance from J(z^2 + c0) in the stability check"},
      {"eta", ValueType::Real, "0.2", "", "required minimum modulus in the stability check"},
      {"mass", ValueType::Integer, "100000", "samples", "mass samples of the local-dimension fit"},
      {"targets", ValueType::Integer, "400", "samples", "target points of the local-dimension fit"},
      {"j_min", ValueType::Integer, "3", "", "largest radius 2^-j_min * diameter"},
      {"j_max", ValueType::Integer, "12", "", "smallest radius 2^-j_max * diameter"},
      {"min_count", ValueType::Integer, "50", "hits", "minimum hits for a radius to enter the fit"},
      {"rel_tol", ValueType::Real, "0.1", "", "relative tolerance of the local-dimension claim"},
      {"width", ValueType::Integer, "512", "pixels", "raster width"},
      {"height", ValueType::Integer, "512", "pixels", "raster height"},
      {"budget", ValueType::String, "small", "", "verify-all budget: small | full"},
      {"threads", ValueType::Integer, "0", "threads", "worker threads (0: RANDQUAD_THREADS or hardware)", true},
      {"out", ValueType::String, "runs/<command>", "", "output directory of the run", true},
  };
  return schema;
}

const ConfigKey* find_key(std::string_view name) {
  for (const ConfigKey& k : config_schema()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"green-point", "global-green", "dimension",    "sweep-r",
                                                 "asymptotics", "fast-escape",  "perturb",      "harmonicity",
                                                 "stability",   "julia-render", "local-dim",    "verify-all"};
  return names;
}

std::string command_help(std::string_view command) {
  const auto it = command_descriptions().find(std::string(command));
  return it == command_descriptions().end() ? std::string() : it->second;
}

std::vector<std::string> command_keys(std::string_view command) {
  static const std::map<std::string, std::set<std::string>, std::less<>> used = {
      {"green-point", {"law", "z", "tol", "depth_cap"}},
      {"global-green", {"law", "n", "tol", "depth_cap"}},
      {"dimension", {"law", "n", "tol", "depth_cap"}},
      {"sweep-r", {"r_grid", "h_list", "n", "tol", "depth_cap"}},
      {"asymptotics", {"r_list", "delta", "n", "tol", "depth_cap"}},
      {"fast-escape", {"law", "k_min", "k_max", "n", "tol", "depth_cap"}},
      {"perturb", {"c0", "deltas", "n", "tol", "depth_cap"}},
      {"harmonicity", {"c0", "radius", "rotations", "n", "omegas", "tol", "depth_cap"}},
      {"stability", {"c0", "deltas", "points", "depth", "tree_cap", "epsilon", "eta"}},
      {"julia-render", {"law", "depth", "points", "width", "height"}},
      {"local-dim", {"law", "omegas", "mass", "targets", "depth", "n", "j_min", "j_max", "min_count", "rel_tol",
                     "tol", "depth_cap"}},
      {"verify-all", {"budget"}},
  };
  const auto it = used.find(command);
  std::vector<std::string> out;
  if (it == used.end()) return out;
  for (const ConfigKey& k : config_schema()) {
    if (it->second.contains(k.name) || k.name == "seed" || k.execution_only) out.push_back(k.name);
  }
  return out;
}

std::int64_t parse_integer(std::string_view text, std::string_view field) {
  const std::string_view t = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec == std::errc() && ptr == t.data() + t.size() && !t.empty()) return v;
  // Accept integral scientific notation such as 1e5.
  double d = 0.0;
  const auto [p2, e2] = std::from_chars(t.data(), t.data() + t.size(), d);
  if (e2 == std::errc() && p2 == t.data() + t.size() && !t.empty() && std::isfinite(d) && d == std::floor(d) &&
      std::abs(d) < 9e15) {
    return static_cast<std::int64_t>(d);
  }
  bad_value(field, text, "an integer");
}

double parse_real(std::string_view text, std::string_view field) {
  std::string_view t = trim(text);
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
    bad_value(field, text, "a finite real number");
  }
  return v;
}

ComplexPoint parse_complex(std::string_view text, std::string_view field) {
  const std::vector<double> v = parse_real_list(text, field);
  if (v.size() == 1) return {v[0], 0.0};
  if (v.size() != 2) bad_value(field, text, "a complex number re,im");
  return {v[0], v[1]};
}

std::vector<double> parse_real_list(std::string_view text, std::string_view field) {
  std::vector<double> out;
  std::size_t start = 0;
  const std::string_view t = trim(text);
  if (t.empty()) bad_value(field, text, "a comma-separated list of reals");
  while (true) {
    const std::size_t comma = t.find(',', start);
    out.push_back(parse_real(t.substr(start, comma == std::string_view::npos ? t.npos : comma - start), field));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

ExperimentConfig::ExperimentConfig(std::string command) { set_command(std::move(command)); }

void ExperimentConfig::set_command(std::string command) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    throw Error(ErrorCode::ConfigError, "field 'command': unknown command '" + command + "'");
  }
  command_ = std::move(command);
}

void ExperimentConfig::set(std::string_view key, std::string value) {
  if (key == "command") {
    set_command(std::string(trim(value)));
    return;
  }
  const ConfigKey* k = find_key(key);
  if (!k) throw Error(ErrorCode::ConfigError, "field '" + std::string(key) + "': unknown key");
  const std::string v(trim(value));
  switch (k->type) {
    case ValueType::Integer: {
      std::uint64_t u = 0;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), u);
      if (ec == std::errc() && ptr == v.data() + v.size()) break;  // full 64-bit range
      if (parse_integer(v, key) < 0) bad_value(key, v, "a non-negative integer");
      break;
    }
    case ValueType::Real: parse_real(v, key); break;
    case ValueType::Complex: parse_complex(v, key); break;
    case ValueType::RealList: parse_real_list(v, key); break;
    case ValueType::String:
      if (v.empty()) bad_value(key, v, "a non-empty string");
      if (key == "budget" && v != "small" && v != "full") bad_value(key, v, "'small' or 'full'");
      break;
  }
  explicit_[std::string(key)] = v;
}

std::string ExperimentConfig::raw(std::string_view key) const {
  const std::string name(key);
  if (const auto it = explicit_.find(name); it != explicit_.end()) return it->second;
  if (name == "out") return "runs/" + command_;
  const auto& defaults = command_defaults().at(command_);
  if (const auto it = defaults.find(name); it != defaults.end()) return it->second;
  const ConfigKey* k = find_key(key);
  if (!k) throw Error(ErrorCode::ConfigError, "field '" + name + "': unknown key");
  return k->default_value;
}

std::int64_t ExperimentConfig::integer(std::string_view key) const { return parse_integer(raw(key), key); }

std::uint64_t ExperimentConfig::unsigned_integer(std::string_view key) const {
  const std::string v = raw(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc() && ptr == v.data() + v.size()) return out;
  const std::int64_t i = parse_integer(v, key);
  if (i < 0) bad_value(key, v, "a non-negative integer");
  return static_cast<std::uint64_t>(i);
}

std::size_t ExperimentConfig::count(std::string_view key) const {
  const std::int64_t v = integer(key);
  if (v < 0) bad_value(key, raw(key), "a non-negative integer");
  return static_cast<std::size_t>(v);
}

double ExperimentConfig::real(std::string_view key) const { return parse_real(raw(key), key); }
ComplexPoint ExperimentConfig::complex(std::string_view key) const { return parse_complex(raw(key), key); }
std::vector<double> ExperimentConfig::real_list(std::string_view key) const {
  return parse_real_list(raw(key), key);
}

std::map<std::string, std::string> ExperimentConfig::resolved(bool include_execution) const {
  std::map<std::string, std::string> out;
  out["command"] = command_;
  for (const ConfigKey& k : config_schema()) {
    if (!include_execution && k.execution_only) continue;
    out[k.name] = raw(k.name);
  }
  return out;
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  os << "command = " << command_ << "\n";
  for (const ConfigKey& k : config_schema()) {
    os << "# " << k.help;
    if (!k.unit.empty()) os << " [" << k.unit << "]";
    os << "\n" << k.name << " = " << raw(k.name) << "\n";
  }
  return os.str();
}

ExperimentConfig ExperimentConfig::parse(std::string_view text, std::string_view source) {
  ExperimentConfig config;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const std::size_t eq = line.find('=');
      const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::ConfigError, where + "expected 'key = value', got '" + std::string(line) + "'");
      }
      const std::string_view key = trim(line.substr(0, eq));
      try {
        config.set(key, std::string(trim(line.substr(eq + 1))));
      } catch (const Error& e) {
        // Re-raise with the location in front of the field message.
        std::string msg = e.what();
        const std::string prefix = std::string(to_string(ErrorCode::ConfigError)) + ": ";
        if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
        throw Error(ErrorCode::ConfigError, where + msg);
      }
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

}  // namespace randquad::harness
