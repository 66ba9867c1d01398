#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smallball/models.hpp"
#include "smallball/norms.hpp"
#include "smallball/sim.hpp"

namespace smallball {

/// Validation failure tied to one configuration key.
struct ConfigError : std::invalid_argument {
  ConfigError(std::string key_, const std::string& what)
      : std::invalid_argument(key_ + ": " + what), key(std::move(key_)) {}
  std::string key;
};

enum class ValueType { String, Choice, Double, OptionalDouble, Int, IntList, DoubleList, Seed };

struct KeySpec {
  std::string name;
  ValueType type;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;  // Choice only
};

const std::vector<std::string>& subcommands();

/// Resolved configuration of one run. Every known key is present; values are
/// kept as validated text so that emit/parse round-trips exactly.
class RunConfig {
 public:
  static const std::vector<KeySpec>& keys();
  static const KeySpec& key(const std::string& name);

  /// All keys at their defaults; `seed` falls back to $SMALLBALL_SEED.
  static RunConfig defaults(const std::string& command);

  /// Validates and stores; throws ConfigError naming the key.
  void set(const std::string& name, const std::string& value);

  /// Applies a `key = value` file (blank lines and '#' comments allowed).
  void apply_file_text(const std::string& text);
  void apply_file(const std::string& path);

  const std::string& command() const { return command_; }
  const std::string& raw(const std::string& name) const;
  std::string get_string(const std::string& name) const { return raw(name); }
  double get_double(const std::string& name) const;
  std::optional<double> get_optional(const std::string& name) const;
  long long get_int(const std::string& name) const;
  std::vector<long long> get_int_list(const std::string& name) const;
  std::vector<double> get_double_list(const std::string& name) const;
  std::uint64_t get_seed() const;

  /// `command = ...` followed by every key in registry order.
  std::string emit() const;
  static RunConfig parse(const std::string& text);
  /// FNV-1a of emit(), as 16 hex digits.
  std::string digest() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

// Builders from a validated configuration; each throws ConfigError on
// inconsistent combinations.
RegNorm config_norm(const RunConfig& cfg, Index rows, Index cols);
DesignModel config_design(const RunConfig& cfg, Index rows, Index cols);
NoiseModel config_noise(const RunConfig& cfg);
PipelineConfig config_pipeline(const RunConfig& cfg);
ExperimentSpec config_experiment(const RunConfig& cfg);
/// (rows, cols) of the first grid point.
Shape config_shape(const RunConfig& cfg);

}  // namespace smallball
