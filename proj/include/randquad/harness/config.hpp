#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "randquad/core_dynamics.hpp"

// Plain-text experiment configuration: one `key = value` per line, `#`
// starts a comment. Every key is declared in the schema below with its type,
// unit and default; commands may override defaults for keys the user did not
// set.

namespace randquad::harness {

enum class ValueType { String, Integer, Real, Complex, RealList };

struct ConfigKey {
  std::string name;
  ValueType type;
  std::string default_value;
  std::string unit;
  std::string help;
  bool execution_only = false;  // affects how, not what, is computed
};

const std::vector<ConfigKey>& config_schema();
const ConfigKey* find_key(std::string_view name);

const std::vector<std::string>& command_names();
std::string command_help(std::string_view command);
// Keys that `command` reads, in schema order; always includes seed, threads, out.
std::vector<std::string> command_keys(std::string_view command);

class ExperimentConfig {
 public:
  ExperimentConfig() = default;
  explicit ExperimentConfig(std::string command);

  // ConfigError with line number and field on malformed text.
  static ExperimentConfig parse(std::string_view text, std::string_view source = "config");
  static ExperimentConfig load(const std::string& path);

  // Resolved form: every schema key, defaults filled, schema order.
  std::string serialize() const;

  const std::string& command() const noexcept { return command_; }
  void set_command(std::string command);

  // ConfigError naming the field if the key is unknown or the value does not
  // parse as the declared type.
  void set(std::string_view key, std::string value);
  bool is_set(std::string_view key) const { return explicit_.contains(std::string(key)); }

  // Value after defaults (command default first, then schema default).
  std::string raw(std::string_view key) const;
  std::int64_t integer(std::string_view key) const;
  std::uint64_t unsigned_integer(std::string_view key) const;
  std::size_t count(std::string_view key) const;  // integer >= 0
  double real(std::string_view key) const;
  ComplexPoint complex(std::string_view key) const;
  std::vector<double> real_list(std::string_view key) const;

  // Resolved key/value pairs, optionally without execution-only keys.
  std::map<std::string, std::string> resolved(bool include_execution = true) const;

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.resolved() == b.resolved();
  }

 private:
  std::string command_ = "verify-all";
  std::map<std::string, std::string> explicit_;
};

// Parsers shared with the CLI layer; ConfigError mentions `field`.
std::int64_t parse_integer(std::string_view text, std::string_view field);
double parse_real(std::string_view text, std::string_view field);
ComplexPoint parse_complex(std::string_view text, std::string_view field);
std::vector<double> parse_real_list(std::string_view text, std::string_view field);

}  // namespace randquad::harness
