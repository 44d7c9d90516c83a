#include <cstdlib>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "lifshitz/cli.hpp"
#include "lifshitz/rng.hpp"

namespace lifshitz::cli {

namespace {

using K = ValueKind;

std::vector<KeySpec> with_common(std::vector<KeySpec> keys) {
  keys.push_back({"seed", K::Integer, "1", "root seed for all random substreams"});
  keys.push_back({"threads", K::Integer, "1", "worker threads; 1 is bit-reproducible"});
  return keys;
}

std::vector<CommandSchema> build_schemas() {
  return {
      {"selfenergy",
       "sigma(E) over the admissible window",
       with_common({{"lambda", K::Real, "0.1", "disorder strength"},
                    {"epsilon", K::Real, "1", "window exponent"},
                    {"points", K::Integer, "20", "energies in the window"}})},
      {"green",
       "free lattice Green function table and asymptotics",
       with_common({{"estar", K::Real, "0.05", "renormalized energy E*"},
                    {"radius", K::Integer, "20", "table radius"},
                    {"method", K::Text, "bessel", "bessel or fft"},
                    {"grid", K::Integer, "256", "FFT grid points per axis"},
                    {"rel_tol", K::Real, "1e-10", "Bessel integral tolerance"},
                    {"asymptotics", K::Flag, "false", "fit the axis decay"},
                    {"r_min", K::Integer, "20", "asymptotics fit range start"},
                    {"r_max", K::Integer, "60", "asymptotics fit range end"},
                    {"lambda", K::Real, "0", "if > 0, check lambda^2 G(0) = sigma"}})},
      {"diagrams",
       "partition census with power counting",
       with_common({{"n", K::Integer, "3", "order: indices {1..n, n+2..2n+1}"},
                    {"gate_free", K::Flag, "false", "drop partitions with gates"},
                    {"pairings_only", K::Flag, "true", "only blocks of size 2"},
                    {"eps", K::Real, "0.1", "convergence margin"}})},
      {"diagram-value",
       "Monte Carlo values of pairing integrals",
       with_common({{"n", K::Integer, "2", "order"},
                    {"estar", K::Real, "0.1", "renormalized energy E*"},
                    {"samples", K::Integer, "20000", "samples per integral"},
                    {"kind", K::Text, "torus", "torus or continuum"},
                    {"cutoff", K::Real, "0", "continuum momentum cutoff in units of sqrt(E*)"},
                    {"partition", K::Text, "", "single partition; empty means all gate-free pairings"},
                    {"scaling", K::Flag, "false", "also evaluate at 2 E*"},
                    {"lambda", K::Real, "0.01", "disorder strength for the bound assembly"}})},
      {"expand-verify",
       "resolvent expansion identity and tadpole cancellation",
       with_common({{"N", K::Integer, "2", "expansion order"},
                    {"box", K::Integer, "8", "box side"},
                    {"lambda", K::Real, "0.5", "disorder strength"},
                    {"estar", K::Real, "0.5", "renormalized energy E*"},
                    {"seeds", K::Integer, "10", "disorder samples"},
                    {"eta", K::Real, "0", "imaginary shift"},
                    {"moment_l", K::Integer, "0", "if 1 or 2, compare E[A_l^2] with the diagram sum"},
                    {"moment_samples", K::Integer, "10000", "Monte Carlo samples for E[A_l^2]"},
                    {"region_radius", K::Real, "4", "truncated region radius"}})},
      {"fracmom",
       "fractional moments and correlation length",
       with_common({{"box", K::Integer, "12", "box side"},
                    {"lambda", K::Real, "0.5", "disorder strength"},
                    {"estar", K::Real, "0.3", "renormalized energy E*"},
                    {"s", K::Real, "0.3", "moment exponent"},
                    {"samples", K::Integer, "1000", "disorder samples"},
                    {"etas", K::RealList, "1e-2,1e-3,1e-4", "eta schedule"},
                    {"distances", K::IntList, "1,2,3,4,5,6", "axis distances from the anchor site"},
                    {"mode", K::Text, "moment", "moment or difference"},
                    {"density", K::Text, "uniform", "uniform or triangular"}})},
      {"criterion",
       "finite-volume localization criterion",
       with_common({{"L", K::IntList, "4,6,8", "box half-widths"},
                    {"lambda", K::Real, "0.5", "disorder strength"},
                    {"estar", K::Real, "50", "renormalized energy E*"},
                    {"s", K::Real, "0.24", "moment exponent"},
                    {"b", K::Real, "0.5", "criterion threshold"},
                    {"Bs", K::Real, "1", "criterion constant"},
                    {"samples", K::Integer, "50", "disorder samples"},
                    {"eta", K::Real, "0", "imaginary shift; 0 falls back to 1e-4 if singular"},
                    {"density", K::Text, "uniform", "uniform or triangular"}})},
  };
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(v.substr(pos)) != "")
    throw ConfigError(fmt::format("key '{}': '{}' is not a number", key, v));
  return x;
}

long long parse_integer(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(v.substr(pos)) != "")
    throw ConfigError(fmt::format("key '{}': '{}' is not an integer", key, v));
  return x;
}

bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("key '{}': '{}' is not a boolean", key, v));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

void validate_value(const KeySpec& k, const std::string& v) {
  switch (k.kind) {
    case K::Real: parse_real(k.name, v); break;
    case K::Integer: parse_integer(k.name, v); break;
    case K::Flag: parse_flag(k.name, v); break;
    case K::Text: break;
    case K::RealList:
      for (auto& x : split_list(v)) parse_real(k.name, x);
      break;
    case K::IntList:
      for (auto& x : split_list(v)) parse_integer(k.name, x);
      break;
  }
}

}  // namespace

const KeySpec* CommandSchema::find(const std::string& key) const {
  for (const auto& k : keys)
    if (k.name == key) return &k;
  return nullptr;
}

const std::vector<CommandSchema>& command_schemas() {
  static const std::vector<CommandSchema> schemas = build_schemas();
  return schemas;
}

const CommandSchema& schema_for(const std::string& command) {
  for (const auto& s : command_schemas())
    if (s.name == command) return s;
  throw ConfigError(fmt::format("unknown command '{}'", command));
}

double Config::real(const std::string& key) const { return parse_real(key, text(key)); }
long long Config::integer(const std::string& key) const { return parse_integer(key, text(key)); }
bool Config::flag(const std::string& key) const { return parse_flag(key, text(key)); }

const std::string& Config::text(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(fmt::format("missing key '{}'", key));
  return it->second;
}

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (auto& x : split_list(text(key))) out.push_back(parse_real(key, x));
  return out;
}

std::vector<int> Config::integers(const std::string& key) const {
  std::vector<int> out;
  for (auto& x : split_list(text(key))) out.push_back(int(parse_integer(key, x)));
  return out;
}

nlohmann::json Config::to_json() const {
  nlohmann::json j;
  j["command"] = command_;
  j["values"] = values_;
  return j;
}

std::string Config::hash() const { return fmt::format("{:016x}", fnv1a64(to_json().dump())); }

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, lineno));
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", origin, lineno));
    if (!out.emplace(key, value).second)
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", origin, lineno, key));
  }
  return out;
}

Config resolve_config(const std::string& command, const std::map<std::string, std::string>& file_values,
                      const std::map<std::string, std::string>& overrides) {
  const CommandSchema& schema = schema_for(command);
  std::map<std::string, std::string> values;
  for (const auto& k : schema.keys) values[k.name] = k.fallback;
  std::vector<std::string> unknown;
  for (const auto* layer : {&file_values, &overrides})
    for (const auto& [key, value] : *layer) {
      if (!schema.find(key)) {
        unknown.push_back(key);
        continue;
      }
      values[key] = value;
    }
  if (!unknown.empty()) {
    std::string allowed;
    for (const auto& k : schema.keys) allowed += (allowed.empty() ? "" : ", ") + k.name;
    std::string bad;
    for (const auto& u : unknown) bad += (bad.empty() ? "" : ", ") + u;
    throw ConfigError(fmt::format("{}: unknown key(s) {}; allowed: {}", command, bad, allowed));
  }
  for (const auto& k : schema.keys) validate_value(k, values[k.name]);
  return Config(command, std::move(values));
}

std::filesystem::path output_directory(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("LIFSHITZ_OUTPUT_DIR"); env && *env) return env;
  return "lifshitz_out";
}

}  // namespace lifshitz::cli
