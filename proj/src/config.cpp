#include "vortexshape/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace vortexshape {

namespace {

struct RawEntry {
  std::string value;
  int line;
  bool used = false;
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

class RawConfig {
 public:
  RawConfig(std::istream& is, std::string source) : source_(std::move(source)) {
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(lineno, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      std::size_t eq = line.find('=');
      if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(lineno, "empty key");
      std::string full = section.empty() ? key : section + "." + key;
      if (entries_.count(full)) fail(lineno, "duplicate key '" + full + "'");
      entries_[full] = {value, lineno, false};
    }
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<std::string> get_string(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    it->second.used = true;
    return it->second.value;
  }

  std::optional<double> get_double(const std::string& key) {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    try {
      std::size_t pos = 0;
      double v = std::stod(*s, &pos);
      if (pos != s->size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      fail(entries_.at(key).line, "field '" + key + "': expected a number, got '" + *s + "'");
    }
  }

  std::optional<long> get_int(const std::string& key) {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    try {
      std::size_t pos = 0;
      long v = std::stol(*s, &pos);
      if (pos != s->size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      fail(entries_.at(key).line, "field '" + key + "': expected an integer, got '" + *s + "'");
    }
  }

  std::optional<bool> get_bool(const std::string& key) {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "1" || *s == "yes") return true;
    if (*s == "false" || *s == "0" || *s == "no") return false;
    fail(entries_.at(key).line, "field '" + key + "': expected true/false");
  }

  std::optional<std::vector<double>> get_doubles(const std::string& key, std::size_t count) {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    std::istringstream ss(*s);
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    if (vals.size() != count)
      fail(entries_.at(key).line,
           "field '" + key + "': expected " + std::to_string(count) + " numbers");
    return vals;
  }

  std::optional<std::vector<long>> get_ints(const std::string& key) {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    std::istringstream ss(*s);
    std::vector<long> vals;
    long v;
    while (ss >> v) vals.push_back(v);
    if (vals.empty()) fail(entries_.at(key).line, "field '" + key + "': expected integers");
    return vals;
  }

  void check_all_used() const {
    for (const auto& [key, entry] : entries_)
      if (!entry.used) fail(entry.line, "unknown field '" + key + "'");
  }

 private:
  std::string source_;
  std::map<std::string, RawEntry> entries_;
};

}  // namespace

ExperimentSpec parse_config(std::istream& is, const std::string& source_name) {
  RawConfig raw(is, source_name);
  ExperimentSpec spec;
  RunConfig& c = spec.config;

  if (auto v = raw.get_string("name")) spec.name = *v;
  if (auto v = raw.get_string("algorithm")) {
    if (*v == "aL")
      c.algorithm = Algorithm::aL;
    else if (*v == "dF")
      c.algorithm = Algorithm::dF;
    else
      throw ConfigError(source_name + ": algorithm must be 'aL' or 'dF', got '" + *v + "'");
  }
  if (auto v = raw.get_double("gamma1")) c.gamma1 = *v;
  if (auto v = raw.get_double("gamma2")) c.gamma2 = *v;
  if (auto v = raw.get_double("alpha")) c.alpha = *v;
  if (auto v = raw.get_double("nu")) c.nu = *v;
  if (auto v = raw.get_double("beta")) c.beta = *v;
  if (auto v = raw.get_double("gamma_smooth")) c.gamma_smooth = *v;
  if (auto v = raw.get_double("epsilon")) c.epsilon = *v;
  if (auto v = raw.get_double("tol")) c.tol = *v;
  if (auto v = raw.get_int("max_iter")) c.max_iter = static_cast<int>(*v);
  if (auto v = raw.get_int("max_halvings")) c.max_halvings = static_cast<int>(*v);
  if (auto v = raw.get_double("target_volume")) c.target_volume = *v;

  if (auto v = raw.get_doubles("geometry.rect", 4)) {
    double x0 = (*v)[0], y0 = (*v)[1], x1 = (*v)[2], y1 = (*v)[3];
    c.geometry.corners = {Vec2{x0, y0}, Vec2{x0, y1}, Vec2{x1, y1}, Vec2{x1, y0}};
  }
  if (auto v = raw.get_doubles("geometry.obstacle_center", 2))
    c.geometry.obstacle_center = {(*v)[0], (*v)[1]};
  if (auto v = raw.get_double("geometry.obstacle_radius")) c.geometry.obstacle_radius = *v;
  if (auto v = raw.get_int("geometry.obstacle_segments"))
    c.geometry.obstacle_segments = static_cast<int>(*v);

  if (auto v = raw.get_double("mesh.h_min")) c.h_min = *v;
  if (auto v = raw.get_double("mesh.h_max")) c.h_max = *v;
  if (auto v = raw.get_bool("mesh.adapt_initial")) c.adapt_initial = *v;
  if (auto v = raw.get_bool("mesh.adapt_every")) c.adapt_every = *v;
  if (auto v = raw.get_int("mesh.seed")) c.seed = static_cast<std::uint64_t>(*v);

  if (auto v = raw.get_double("multipliers.ell0")) c.ell0 = *v;
  if (auto v = raw.get_double("multipliers.b0")) c.b0 = *v;
  if (auto v = raw.get_double("multipliers.tau")) c.tau_mult = *v;
  if (auto v = raw.get_double("multipliers.b_bar")) c.b_bar = *v;

  if (auto v = raw.get_bool("output.vtk")) spec.output.vtk = *v;
  if (auto v = raw.get_bool("output.boundary_every_iteration"))
    spec.output.boundary_every_iteration = *v;

  if (raw.has("sweep.configurations")) {
    SweepSpec sweep;
    auto ks = raw.get_ints("sweep.configurations");
    for (long k : *ks) sweep.configurations.push_back(static_cast<int>(k));
    if (auto v = raw.get_string("sweep.compare_curl")) sweep.compare_curl = *v;
    if (auto v = raw.get_string("sweep.compare_detgrad")) sweep.compare_detgrad = *v;
    spec.sweep = std::move(sweep);
  }

  raw.check_all_used();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  return parse_config(is, path);
}

}  // namespace vortexshape
