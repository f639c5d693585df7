#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnng::cli {

enum class ValueType { Int, Real, Bool, String, Path, List, PathList, IntList, IntOrAuto };

struct KeySpec {
  std::string name;
  ValueType type = ValueType::String;
  std::string default_value;
  std::string help;
};

using Schema = std::vector<KeySpec>;

/// Keys accepted by run configuration files and subcommand flags.
const Schema& run_schema();
/// Keys of a synthetic-epoch effect specification.
const Schema& synth_schema();

/// Every problem found while reading or validating a configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Flat `key = value` settings over a fixed schema. Files may pull in others
/// with `include <path>`; later assignments win. Relative paths in a file are
/// taken relative to that file.
class Config {
 public:
  explicit Config(const Schema& schema);

  /// Reads a file, recording problems instead of throwing.
  void load_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value, const std::string& origin = "flag");

  /// Throws ConfigError listing unknown keys, malformed lines and type errors together.
  void check() const;

  bool has(const std::string& key) const;
  bool explicitly_set(const std::string& key) const { return values_.count(key) > 0; }
  std::string raw(const std::string& key) const;

  std::int64_t get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::filesystem::path get_path(const std::string& key) const;
  std::vector<std::filesystem::path> get_paths(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<std::size_t> get_int_list(const std::string& key) const;
  /// Empty for "auto".
  std::optional<std::size_t> get_auto(const std::string& key) const;

  /// Every key with its effective value, preceded by the version line.
  std::string resolved_text(const std::string& command) const;
  void write_resolved(const std::filesystem::path& dir, const std::string& command) const;

 private:
  const KeySpec* find(const std::string& key) const;
  void load_file(const std::filesystem::path& path, std::vector<std::filesystem::path>& chain);

  const Schema* schema_;
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> origins_;
  std::vector<std::string> problems_;
};

std::string version_string();

}  // namespace rnng::cli
