#include "reifsolve/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "reifsolve/io.hpp"

namespace reif {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"kernel",
       {"family", "n", "s", "lambda", "Lambda", "angular_offset", "angular_amplitude",
        "angular_frequency", "modulation_inner", "modulation_outer", "modulation_radius"}},
      {"domain",
       {"kind", "n", "radius", "slope", "period", "depth", "angle", "base_halfwidth", "eta",
        "shrink", "amplitude", "frequency"}},
      {"grid", {"box_halfwidth", "h", "region_radius"}},
      {"quadrature",
       {"inner_factor", "growth", "points_per_shell", "max_points_per_shell", "far_cutoff",
        "radial_subdivisions", "tail_rule"}},
      {"experiment",
       {"name",        "seed",          "f_const",   "tol",           "max_iter",
        "r0",          "n_points",      "n_scales",  "samples_per_ball", "R",
        "kappa",       "n_boundary",    "rho",       "r_values",      "n_samples",
        "eps",         "levels",        "target_eta", "f_auto",       "r_max",
        "n_radii",     "etas",          "sigma_offset", "sigma",      "k_max",
        "dump_operator"}},
  };
  return s;
}

const std::set<std::string>& experiment_names() {
  static const std::set<std::string> names = {
      "solve",          "verify-indicator", "verify-delta-eps", "verify-comparison",
      "measure-exponent", "reifenberg",     "corkscrew",        "gmt",
      "eta-sweep"};
  return names;
}

// keys each experiment accepts in [experiment] beyond name/seed
const std::map<std::string, std::set<std::string>>& experiment_schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"solve", {"f_const", "tol", "max_iter", "dump_operator"}},
      {"verify-indicator", {"R", "kappa", "n_points"}},
      {"verify-delta-eps", {"R", "kappa", "n_points", "eps"}},
      {"verify-comparison",
       {"levels", "target_eta", "n_points", "f_auto", "f_const", "tol", "max_iter", "rho", "sigma",
        "eps", "R"}},
      {"measure-exponent", {"f_const", "tol", "max_iter", "r_max", "n_radii"}},
      {"reifenberg", {"r0", "n_points", "n_scales", "samples_per_ball"}},
      {"corkscrew", {"R", "kappa", "n_boundary", "n_scales"}},
      {"gmt", {"rho", "r_values", "n_samples"}},
      {"eta-sweep", {"etas", "f_const", "tol", "max_iter", "r_max", "n_radii", "sigma_offset"}},
  };
  return s;
}

}  // namespace

Config Config::parse_file(const std::string& path) { return parse_text(read_file(path)); }

Config Config::parse_text(const std::string& text) {
  Config cfg;
  cfg.raw_ = text;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.sections_[section].count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return fallback;
  auto jt = it->second.find(key);
  return jt == it->second.end() ? fallback : jt->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  const std::string v = get(section, key, "");
  if (v.empty()) return fallback;
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: [" + section + "] " + key + " = '" + v + "' is not a number");
  }
}

long Config::get_long(const std::string& section, const std::string& key, long fallback) const {
  const std::string v = get(section, key, "");
  if (v.empty()) return fallback;
  try {
    size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: [" + section + "] " + key + " = '" + v + "' is not an integer");
  }
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
  const std::string v = get(section, key, "");
  if (v.empty()) return fallback;
  std::vector<double> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("config: [" + section + "] " + key + ": bad list entry '" + item + "'");
    }
  }
  if (out.empty())
    throw ConfigError("config: [" + section + "] " + key + ": empty list");
  return out;
}

std::string Config::experiment() const { return get("experiment", "name", ""); }

void Config::validate() const {
  const auto& known = schema();
  for (const auto& [section, keys] : sections_) {
    auto it = known.find(section);
    if (it == known.end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      (void)value;
      if (!it->second.count(key))
        throw ConfigError("config: unknown key '" + key + "' in section [" + section + "]");
    }
  }
  const std::string name = experiment();
  if (name.empty()) throw ConfigError("config: missing [experiment] name");
  if (!experiment_names().count(name))
    throw ConfigError("config: unknown experiment '" + name + "'");
  // per-experiment closed key set
  const auto& allowed = experiment_schema().at(name);
  auto it = sections_.find("experiment");
  if (it != sections_.end()) {
    for (const auto& [key, value] : it->second) {
      (void)value;
      if (key == "name" || key == "seed") continue;
      if (!allowed.count(key))
        throw ConfigError("config: key '" + key + "' not valid for experiment '" + name + "'");
    }
  }
  // eagerly build the typed pieces so config errors surface as exit 2
  build_kernel(*this);
  build_domain(*this);
  build_quadrature(*this);
  build_grid_spec(*this);
}

KernelSpec build_kernel(const Config& cfg) {
  const std::string family = cfg.get("kernel", "family", "isotropic");
  const int n = static_cast<int>(cfg.get_long("kernel", "n", 2));
  const double s = cfg.get_double("kernel", "s", 0.5);
  const double lambda = cfg.get_double("kernel", "lambda", 1.0);
  const double Lambda = cfg.get_double("kernel", "Lambda", 1.0);
  try {
    if (family == "isotropic") {
      if (cfg.has("kernel", "lambda") || cfg.has("kernel", "Lambda"))
        if (lambda != 1.0 || Lambda != 1.0)
          throw ConfigError("config: the isotropic kernel is unnormalized (lambda = Lambda = 1)");
      return KernelSpec::isotropic(n, s);
    }
    if (family == "anisotropic") {
      const double off = cfg.get_double("kernel", "angular_offset", 0.5 * (lambda + Lambda));
      const double amp = cfg.get_double("kernel", "angular_amplitude", 0.0);
      const long freq = cfg.get_long("kernel", "angular_frequency", 2);
      if (freq % 2 != 0)
        throw ConfigError("config: angular_frequency must be even (kernel symmetry)");
      if (n != 2) throw ConfigError("config: anisotropic kernels are configured for n = 2");
      return KernelSpec::anisotropic(n, s, lambda, Lambda, [off, amp, freq](const Vec& u) {
        return off + amp * std::cos(static_cast<double>(freq) * std::atan2(u[1], u[0]));
      });
    }
    if (family == "modulated") {
      const double inner = cfg.get_double("kernel", "modulation_inner", lambda);
      const double outer = cfg.get_double("kernel", "modulation_outer", Lambda);
      const double radius = cfg.get_double("kernel", "modulation_radius", 1.0);
      return KernelSpec::modulated(n, s, lambda, Lambda, [inner, outer, radius](const Vec& y) {
        return y.norm() < radius ? inner : outer;
      });
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: bad kernel: ") + e.what());
  }
  throw ConfigError("config: unknown kernel family '" + family + "'");
}

DomainOracle build_domain(const Config& cfg) {
  DomainParams p;
  p.n = static_cast<int>(cfg.get_long("domain", "n", cfg.get_long("kernel", "n", 2)));
  p.radius = cfg.get_double("domain", "radius", 1.0);
  p.slope = cfg.get_double("domain", "slope", 0.1);
  p.period = cfg.get_double("domain", "period", 1.0);
  p.depth = static_cast<int>(cfg.get_long("domain", "depth", 3));
  p.angle = cfg.get_double("domain", "angle", 0.05);
  p.base_halfwidth = cfg.get_double("domain", "base_halfwidth", 1.0);
  p.eta = cfg.get_double("domain", "eta", 0.05);
  p.shrink = cfg.get_double("domain", "shrink", 0.0);
  p.amplitude = cfg.get_double("domain", "amplitude", 0.05);
  p.frequency = cfg.get_double("domain", "frequency", 6.0);
  try {
    return make_domain(cfg.get("domain", "kind", "half_space"), p);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: bad domain: ") + e.what());
  }
}

PVQuadrature build_quadrature(const Config& cfg) {
  PVQuadrature q;
  q.inner_radius_factor = cfg.get_double("quadrature", "inner_factor", 1.0);
  q.shell_growth = cfg.get_double("quadrature", "growth", 1.5);
  q.points_per_shell = static_cast<int>(cfg.get_long("quadrature", "points_per_shell", 0));
  q.max_points_per_shell = static_cast<int>(cfg.get_long("quadrature", "max_points_per_shell", 512));
  q.far_cutoff = cfg.get_double("quadrature", "far_cutoff", 1e3);
  q.radial_subdivisions = static_cast<int>(cfg.get_long("quadrature", "radial_subdivisions", 2));
  const std::string tail = cfg.get("quadrature", "tail_rule", "analytic-isotropic");
  if (tail == "analytic-isotropic") q.tail_rule = PVQuadrature::TailRule::AnalyticIsotropic;
  else if (tail == "bound-bracket") q.tail_rule = PVQuadrature::TailRule::BoundBracket;
  else throw ConfigError("config: unknown tail_rule '" + tail + "'");
  if (!(q.shell_growth > 1.0)) throw ConfigError("config: quadrature growth must exceed 1");
  if (!(q.inner_radius_factor > 0.0)) throw ConfigError("config: inner_factor must be positive");
  return q;
}

GridSpec build_grid_spec(const Config& cfg) {
  GridSpec g;
  g.box_halfwidth = cfg.get_double("grid", "box_halfwidth", 1.0);
  g.h = cfg.get_double("grid", "h", 1.0 / 32.0);
  g.region_radius = cfg.get_double("grid", "region_radius",
                                   std::numeric_limits<double>::infinity());
  if (!(g.h > 0.0) || !(g.box_halfwidth > 0.0))
    throw ConfigError("config: grid h and box_halfwidth must be positive");
  return g;
}

}  // namespace reif
