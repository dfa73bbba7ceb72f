#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace eqloop::tools {

/// Flat key = value configuration. Lines starting with '#' are comments.
class StudyConfig {
 public:
  static StudyConfig parse(const std::string& text, const std::string& origin = "<config>");
  static StudyConfig load(const std::string& path);

  /// Environment overrides: EQLOOP_<KEY> (upper case) replaces `key` when
  /// the key is valid for the configured kind.
  void apply_environment(char** envp);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  /// Throws ConfigError on unknown keys (for the configured kind), missing
  /// kind or unparsable values of the common keys.
  void validate() const;

  std::string kind() const { return str("kind", ""); }
  std::string str(const std::string& key, const std::string& def) const;
  int integer(const std::string& key, int def) const;
  double real(const std::string& key, double def) const;
  std::uint64_t u64(const std::string& key, std::uint64_t def) const;
  std::vector<double> reals(const std::string& key, const std::vector<double>& def) const;
  std::vector<int> integers(const std::string& key, const std::vector<int>& def) const;
  std::vector<std::string> strings(const std::string& key, const std::vector<std::string>& def, char sep = ',') const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Study kinds and their accepted keys (besides the common ones).
const std::vector<std::string>& study_kinds();
const std::vector<std::string>& common_keys();
const std::vector<std::string>& kind_keys(const std::string& kind);

}  // namespace eqloop::tools
