#pragma once

// Aggregate of every module's configuration plus a flat `section.key=value`
// view of it, used for command-line overrides and provenance dumps.

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ortus/connectome.hpp"
#include "ortus/dsl.hpp"
#include "ortus/error.hpp"
#include "ortus/format.hpp"
#include "ortus/kernel.hpp"
#include "ortus/physiology.hpp"
#include "ortus/plasticity.hpp"

namespace ortus {

struct HarnessConfig {
  bool plasticity = true;
  // Keep learning while no protocol event is active (e.g. the rest period).
  bool plasticity_when_idle = true;
  bool physiology = true;
  // Weight snapshot cadence in steps; 0 disables snapshots.
  std::size_t snapshot_every = 10;
};

struct Config {
  RelationshipDefaults relationship;
  BuildConfig build;
  SimConfig sim;
  PlasticityConfig plasticity;
  PhysioConfig physio;
  HarnessConfig harness;

  void validate() const {
    sim.validate();
    plasticity.validate();
    physio.validate();
  }
};

namespace detail {

struct Setting {
  std::string key;
  std::function<std::string()> get;
  std::function<void(std::string_view)> set;
};

inline double to_double(std::string_view key, std::string_view v) {
  if (auto d = parse_double(v)) return *d;
  throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
}

inline bool to_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError("'" + std::string(key) + "' expects true/false, got '" + std::string(v) + "'");
}

template <typename T>
std::size_t to_count(std::string_view key, std::string_view v) {
  auto n = parse_int(v);
  if (!n || *n < 0)
    throw ConfigError("'" + std::string(key) + "' expects a non-negative integer");
  return static_cast<T>(*n);
}

inline std::vector<Setting> settings(Config& c) {
  std::vector<Setting> out;
  auto num = [&](std::string key, double& field) {
    out.push_back({key, [&field] { return format_double(field); },
                   [&field, key](std::string_view v) { field = to_double(key, v); }});
  };
  auto flag = [&](std::string key, bool& field) {
    out.push_back({key, [&field] { return std::string(field ? "true" : "false"); },
                   [&field, key](std::string_view v) { field = to_bool(key, v); }});
  };
  auto count = [&](std::string key, auto& field) {
    using T = std::remove_reference_t<decltype(field)>;
    out.push_back({key, [&field] { return std::to_string(field); },
                   [&field, key](std::string_view v) {
                     field = static_cast<T>(to_count<T>(key, v));
                   }});
  };

  num("relationship.causes_weight", c.relationship.causes_weight);
  num("relationship.causes_mutability", c.relationship.causes_mutability);
  num("relationship.correlated_weight", c.relationship.correlated_weight);
  num("relationship.inhibitory_weight", c.relationship.inhibitory_weight);

  count("build.sci_cap", c.build.sci_cap);
  num("build.default_threshold", c.build.default_threshold);
  num("build.sei_weight", c.build.sei_weight);
  num("build.sci_mutability", c.build.sci_mutability);
  num("build.eei_initial_weight", c.build.eei_initial_weight);
  num("build.eei_mutability", c.build.eei_mutability);
  num("build.eei_gj_weight", c.build.eei_gj_weight);
  num("build.eei_feedback_weight", c.build.eei_feedback_weight);
  num("build.eei_feedback_mutability", c.build.eei_feedback_mutability);
  num("build.dominance_weight", c.build.dominance_weight);

  num("sim.decay_fraction", c.sim.decay_fraction);
  out.push_back({"sim.gj_mode", [&c] { return std::string(to_string(c.sim.gj_mode)); },
                 [&c](std::string_view v) {
                   if (v == "symmetric") c.sim.gj_mode = GjMode::Symmetric;
                   else if (v == "paper-literal") c.sim.gj_mode = GjMode::PaperLiteral;
                   else throw ConfigError("sim.gj_mode expects symmetric or paper-literal");
                 }});
  flag("sim.activation_clamp", c.sim.activation_clamp);
  num("sim.clamp_min", c.sim.clamp_min);
  num("sim.clamp_max", c.sim.clamp_max);
  flag("sim.check_conservation", c.sim.check_conservation);
  count("sim.threads", c.sim.threads);

  count("plasticity.xcorr_window", c.plasticity.xcorr_window);
  count("plasticity.max_lag", c.plasticity.max_lag);
  count("plasticity.slope_window", c.plasticity.slope_window);
  num("plasticity.rapid_xcorr_min", c.plasticity.rapid_xcorr_min);
  num("plasticity.rapid_slope_max", c.plasticity.rapid_slope_max);
  num("plasticity.weaken_xcorr_max", c.plasticity.weaken_xcorr_max);
  num("plasticity.strengthen_xcorr_min", c.plasticity.strengthen_xcorr_min);
  num("plasticity.rapid_rate", c.plasticity.rapid_rate);
  num("plasticity.slow_rate", c.plasticity.slow_rate);
  num("plasticity.activity_threshold", c.plasticity.activity_threshold);

  num("physio.co2_production", c.physio.co2_production);
  num("physio.o2_consumption", c.physio.o2_consumption);
  num("physio.lung_threshold", c.physio.lung_threshold);
  num("physio.exchange_gain", c.physio.exchange_gain);
  num("physio.initial_co2", c.physio.initial_co2);
  num("physio.initial_o2", c.physio.initial_o2);

  flag("harness.plasticity", c.harness.plasticity);
  flag("harness.plasticity_when_idle", c.harness.plasticity_when_idle);
  flag("harness.physiology", c.harness.physiology);
  count("harness.snapshot_every", c.harness.snapshot_every);
  return out;
}

}  // namespace detail

// Applies one `key=value` override; throws ConfigError for unknown keys or
// malformed values.
inline void apply_setting(Config& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  const auto key = assignment.substr(0, eq);
  const auto value = assignment.substr(eq + 1);
  for (auto& s : detail::settings(cfg)) {
    if (s.key == key) {
      s.set(value);
      return;
    }
  }
  throw ConfigError("unknown setting '" + std::string(key) + "'");
}

// Every setting, one `key=value` per line, in a fixed order.
inline std::string resolved_config(const Config& cfg) {
  Config copy = cfg;
  std::string out;
  for (const auto& s : detail::settings(copy)) out += s.key + "=" + s.get() + "\n";
  return out;
}

}  // namespace ortus
