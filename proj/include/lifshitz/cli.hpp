#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "lifshitz/error.hpp"

namespace lifshitz::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalFailure = 3 };

struct ConfigError : Error {
  using Error::Error;
};

enum class ValueKind { Real, Integer, Flag, Text, RealList, IntList };

struct KeySpec {
  std::string name;
  ValueKind kind = ValueKind::Real;
  std::string fallback;  // default, as text
  std::string help;
};

struct CommandSchema {
  std::string name;
  std::string summary;
  std::vector<KeySpec> keys;  // includes the common keys seed, threads
  const KeySpec* find(const std::string& key) const;
};

const std::vector<CommandSchema>& command_schemas();
const CommandSchema& schema_for(const std::string& command);

// Resolved key/value configuration for one command; every schema key is present.
class Config {
 public:
  Config() = default;
  Config(std::string command, std::map<std::string, std::string> values)
      : command_(std::move(command)), values_(std::move(values)) {}

  const std::string& command() const { return command_; }
  const std::map<std::string, std::string>& values() const { return values_; }

  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<int> integers(const std::string& key) const;

  nlohmann::json to_json() const;
  // fnv1a64 of the canonical JSON dump, as 16 hex digits
  std::string hash() const;

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

// `key = value` lines; '#' starts a comment. Duplicate keys are errors.
std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& origin);

// Defaults, then file values, then overrides (flags win). Unknown keys and malformed
// values raise ConfigError.
Config resolve_config(const std::string& command, const std::map<std::string, std::string>& file_values,
                      const std::map<std::string, std::string>& overrides);

// Output directory: explicit value, else $LIFSHITZ_OUTPUT_DIR, else ./lifshitz_out.
std::filesystem::path output_directory(const std::string& explicit_dir);

struct RunResult {
  int exit_code = kOk;
  std::vector<std::string> outputs;  // file names relative to the output directory
  nlohmann::json summary;
  std::string error;
};

// Runs one command, writes its outputs plus manifest.json, never throws for
// configuration or numerical failures.
RunResult run(const Config& config, const std::filesystem::path& out_dir, std::ostream& log);

// Re-runs the command recorded in a manifest.
RunResult replay(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                 std::ostream& log);

}  // namespace lifshitz::cli
