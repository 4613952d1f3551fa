// Scenario configuration files.
//
// A small TOML-like format: `[table]` headers, `[[segment]]` array-of-table
// entries, `key = value` lines and `#` comments. Values are numbers,
// booleans, double-quoted strings, or single-line arrays of numbers/strings.
// The full key schema is in docs/config.md.
#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dvlnav/sim.hpp"

namespace dvlnav {

/// Parse or validation failure. field() is a dotted path such as
/// "dvl.rate_hz" or "segment[2].duration_s"; line() is 0 when not tied to
/// a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, std::size_t line = 0);
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

struct ConfigValue {
  using Array = std::vector<std::variant<double, std::string>>;
  std::variant<double, bool, std::string, Array> data;
  std::size_t line = 0;
};

struct ConfigTable {
  std::map<std::string, ConfigValue> values;
  std::size_t line = 0;
};

struct ConfigDocument {
  std::map<std::string, ConfigTable> tables;      // "" holds top-level keys
  std::map<std::string, std::vector<ConfigTable>> arrays;  // [[name]] entries
};

ConfigDocument parse_config_text(const std::string& text);
ConfigDocument parse_config_file(const std::filesystem::path& path);

/// Builds and validates a scenario. Keys absent from the document take the
/// values of ScenarioConfig::paper_default(); unknown tables or keys are
/// errors. Without [[segment]] entries the default profile is used.
ScenarioConfig scenario_from_document(const ConfigDocument& doc);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Checks every declared invariant; throws ConfigError on the first violation.
void validate_scenario(const ScenarioConfig& cfg);

}  // namespace dvlnav
