#pragma once

// Run configuration: INI-style sections of key = value pairs. Values are kept
// as the literal strings written so that provenance echoes them unchanged.

#include "tcanard/hunt.hpp"
#include "tcanard/models.hpp"
#include "tcanard/singular.hpp"

#include <boost/property_tree/ptree.hpp>

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcanard {

enum class Command { Simulate, Sweep, Hunt, Singular, Fastbif };
std::string_view to_string(Command c);
Command parse_command(std::string_view s);

/// Validation failure tied to a config key ("section.key") or run stage.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  Command command = Command::Simulate;
  ModelName model = ModelName::Leidenator;
  ParamSet params;
  std::string output;  // file stem; the command name when empty
  HuntConfig classify;
  int workers = 1;

  double sample_every = 1.0;  // simulate: fast-time spacing of written samples

  std::vector<double> k_grid;  // sweep

  double k_lo = 0.0, k_hi = 0.0;  // hunt
  TransitionPredicate predicate;
  double tol_k = 1e-9;

  std::optional<OrbitClass> family;  // singular: all available families when unset
  FamilyParams family_params;
  int per_family = 5;

  double mu_lo = 0.0, mu_hi = 0.0;  // fastbif

  boost::property_tree::ptree raw;  // sections and literal values as read

  ModelSpec spec() const { return {model, params}; }
  std::string stem() const { return output.empty() ? std::string(to_string(command)) : output; }
};

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

/// Re-reads the literal values (after `set_raw` overrides).
RunConfig reparse(const RunConfig& c);

/// Overrides one literal value, e.g. set_raw(c, "hunt.tol_k", "1e-10").
void set_raw(RunConfig& c, const std::string& key, const std::string& value);

/// The configuration as INI text; parsing it yields the same run.
std::string echo(const RunConfig& c);

/// "key = value" lines of every literal, in file order.
std::vector<std::string> provenance_lines(const RunConfig& c);

}  // namespace tcanard
