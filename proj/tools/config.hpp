#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace coulomb::tools {

struct KeySpec {
  std::string name;  // file key; the flag is --name with '_' replaced by '-'
  std::string fallback;
  std::string help;
};

const std::vector<KeySpec>& config_keys();
std::string flag_name(const std::string& key);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Effective configuration: built-in defaults, then a key=value file, then flags.
class ExperimentConfig {
 public:
  ExperimentConfig();

  // Lines "key = value"; '#' starts a comment. Unknown keys are rejected with
  // the list of valid keys.
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string str(const std::string& key) const;
  int integer(const std::string& key) const;
  double real(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;

  // Throws naming the first missing flag.
  void require(const std::vector<std::string>& keys) const;

  // Config echo, versions and seed.
  void write_manifest(std::ostream& os, const std::string& command) const;

 private:
  static std::string normalize(std::string key);
  std::map<std::string, std::string> values_;
};

}  // namespace coulomb::tools
