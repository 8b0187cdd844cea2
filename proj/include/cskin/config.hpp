#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cskin/integrate.hpp"
#include "cskin/model.hpp"
#include "cskin/regime.hpp"
#include "cskin/sampler.hpp"
#include "cskin/transport.hpp"

namespace cskin {

/// Invalid or inconsistent configuration. key() names the offending entry.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

/// Unreadable input or unwritable output.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Ordered `key = value` entries; later entries override earlier ones.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses a flat config: one `dotted.key = value` per line, `#` starts a
/// comment, blank lines are ignored.
KeyValues parse_key_values(std::istream& in, const std::string& source = "<config>");

/// Appends `key=value` overrides.
void apply_overrides(KeyValues& kv, const std::vector<std::string>& sets);

struct RunConfig {
  ModelParams model;
  InitSpec init;
  TimeGrid grid;
  std::optional<RegimeSpec> regime;
  std::size_t n_particles = 256;
  std::uint64_t seed = 1;
  std::filesystem::path outputs = "out";
  bool emit_plots = false;
  KernelMode kernel = KernelMode::Parallel;

  double perturbation = 1e-3;
  double stability_p = 2.0;
  Phase stability_phase = Phase::Full;
  bool stability_sliced = false;
  std::size_t refine = 2;

  /// The resolved entries, echoed into reports.
  KeyValues echo;
};

/// Every key accepted by build_config.
const std::vector<std::string>& known_config_keys();

/// Builds and validates a RunConfig. Regime fields that are absent are
/// inherited from the model and init sections; conflicting values raise
/// ConfigError naming the regime key.
RunConfig build_config(const KeyValues& kv);

/// Reads `path` (IoError when unreadable), applies overrides, builds.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace cskin
