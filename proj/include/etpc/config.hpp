#pragma once

#include "etpc/harness.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace etpc {

/// Sectioned `key = value` text with `#` comments. Every entry remembers its
/// line so that errors point at the source.
class IniDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static IniDocument parse(const std::string& text);

  /// `section.key=value`; creates the section if needed.
  void set(const std::string& dotted_key, const std::string& value);

  std::optional<Entry> get(const std::string& section, const std::string& key) const;
  const std::map<std::string, std::map<std::string, Entry>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

struct PlantSettings {
  std::string preset = "lorenz";  // lorenz | vanderpol | polynomial
  bool disturbance = true;
  // polynomial plants
  int n = 0, m = 0, q = 0;
  std::vector<std::string> dynamics;
  std::vector<std::string> feedback;
  Mat lyapunov_matrix;
  // overrides; unset keeps the preset value
  std::optional<PowerLaw> alpha1, alpha2, alpha3, rho1, rho2;
  std::optional<double> disturbance_bound;
  std::optional<SinusoidalDisturbance> disturbance_signal;
};

struct BasisSettings {
  std::string kind = "monomial";  // monomial | tabulated
  int degree = 3;
  double horizon = 0.1;
  std::string file;
};

struct TriggerSettings {
  double sigma = 0.4;
  double r = 0.25;
  DynamicEtrConfig dynamic;
};

struct ExperimentSettings {
  std::vector<ControllerMode> modes{ControllerMode::kEtpcStatic};
  std::vector<double> horizons{0.4, 0.6, 0.8};
  std::vector<int> degrees{3, 4, 5};
  int initial_conditions = 100;
  double radius = 1.0;
  std::size_t events_cap = 100;
  std::uint64_t seed = 1;
  double t_max = 30.0;
};

/// A fully resolved configuration: every value defaulted, overridden and
/// checked.
struct RunConfig {
  PlantSettings plant;
  BasisSettings basis;
  TriggerSettings trigger;
  SimConfig sim;
  Vec x0;
  /// Extra modes for `simulate` (from a comma list in sim.mode).
  std::vector<ControllerMode> sim_modes{ControllerMode::kEtpcStatic};
  ExperimentSettings experiment;

  PlantModel build_plant() const;
  BasisSet build_basis() const;
  StaticEtrConfig build_trigger(const PlantModel& plant) const;
  ExperimentSpec build_experiment(const PlantModel& plant) const;

  /// The resolved configuration as INI text. Parsing it back yields the same
  /// RunConfig.
  std::string manifest() const;
};

/// Resolves `text` (may be empty) with `overrides` of the form
/// `section.key=value` applied on top. Unknown sections or keys, malformed
/// values and out-of-range parameters raise ConfigError.
RunConfig load_config(const std::string& text, const std::vector<std::string>& overrides = {});

RunConfig load_config_file(const std::string& path,
                           const std::vector<std::string>& overrides = {});

}  // namespace etpc
