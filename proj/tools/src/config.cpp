#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "eqloop/errors.hpp"

namespace eqloop::tools {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

const std::vector<std::string>& study_kinds() {
  static const std::vector<std::string> k{"sample",   "dh",       "chen", "chainmap",   "cartan",
                                          "partition", "homotopy", "cech", "convergence"};
  return k;
}

const std::vector<std::string>& common_keys() {
  static const std::vector<std::string> k{"kind", "manifold", "n", "seed", "out", "threads"};
  return k;
}

const std::vector<std::string>& kind_keys(const std::string& kind) {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"sample", {"replicas", "duration"}},
      {"dh", {"mu0", "mu2", "lambdas", "expected", "tolerance", "check"}},
      {"chen", {"word", "fields", "u", "dirs", "loop", "replicas", "knots"}},
      {"chainmap", {"word", "fields", "u", "loop", "grids", "tolerance"}},
      {"cartan", {"word", "fields", "u", "loop", "nodes", "tolerance"}},
      {"partition", {"loops", "eps", "n_max", "regularize", "duration", "tolerance"}},
      {"homotopy", {"word", "fields", "u", "loop", "n1", "tolerance"}},
      {"cech", {"loops", "eps", "n_max", "regularize", "duration", "tolerance"}},
      {"convergence", {"ns", "replicas", "poly_reference", "conv_reference", "kernel_k", "function", "form1",
                       "form2", "fields", "u", "fd_step"}},
  };
  static const std::vector<std::string> none;
  auto it = keys.find(kind);
  return it == keys.end() ? none : it->second;
}

StudyConfig StudyConfig::parse(const std::string& text, const std::string& origin) {
  StudyConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (c.values_.count(key)) throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    c.values_[key] = value;
  }
  return c;
}

StudyConfig StudyConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

void StudyConfig::apply_environment(char** envp) {
  if (!envp) return;
  std::vector<std::string> allowed = common_keys();
  for (const auto& k : kind_keys(kind())) allowed.push_back(k);
  for (char** e = envp; *e; ++e) {
    const std::string entry(*e);
    if (entry.rfind("EQLOOP_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string key = entry.substr(7, eq - 7);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (!contains(allowed, key)) throw ConfigError("environment override EQLOOP_" + entry.substr(7, eq - 7) + " is not a valid key");
    values_[key] = entry.substr(eq + 1);
  }
}

void StudyConfig::validate() const {
  if (!has("kind")) throw ConfigError("config: missing 'kind'");
  if (!contains(study_kinds(), kind())) throw ConfigError("config: unknown study kind '" + kind() + "'");
  const auto& extra = kind_keys(kind());
  for (const auto& [k, v] : values_)
    if (!contains(common_keys(), k) && !contains(extra, k))
      throw ConfigError("config: unknown key '" + k + "' for kind " + kind());
  const std::string m = str("manifold", "t2");
  if (m != "t2" && m != "s2") throw ConfigError("config: manifold must be t2 or s2");
  const int n = integer("n", 256);
  if (n < 8 || (n & (n - 1)) != 0) throw ConfigError("config: n must be a power of two >= 8");
  if (integer("threads", 1) < 1) throw ConfigError("config: threads must be >= 1");
  u64("seed", 0);
}

std::string StudyConfig::str(const std::string& key, const std::string& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

int StudyConfig::integer(const std::string& key, int def) const {
  if (!has(key)) return def;
  const std::string& v = values_.at(key);
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  }
}

double StudyConfig::real(const std::string& key, double def) const {
  if (!has(key)) return def;
  const std::string& v = values_.at(key);
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t StudyConfig::u64(const std::string& key, std::uint64_t def) const {
  if (!has(key)) return def;
  const std::string& v = values_.at(key);
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const std::uint64_t x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" + v + "'");
  }
}

std::vector<std::string> StudyConfig::strings(const std::string& key, const std::vector<std::string>& def,
                                              char sep) const {
  if (!has(key)) return def;
  std::vector<std::string> out;
  std::stringstream ss(values_.at(key));
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> StudyConfig::reals(const std::string& key, const std::vector<double>& def) const {
  if (!has(key)) return def;
  std::vector<double> out;
  for (const auto& s : strings(key, {})) {
    StudyConfig tmp;
    tmp.set(key, s);
    out.push_back(tmp.real(key, 0.0));
  }
  return out;
}

std::vector<int> StudyConfig::integers(const std::string& key, const std::vector<int>& def) const {
  if (!has(key)) return def;
  std::vector<int> out;
  for (const auto& s : strings(key, {})) {
    StudyConfig tmp;
    tmp.set(key, s);
    out.push_back(tmp.integer(key, 0));
  }
  return out;
}

}  // namespace eqloop::tools
