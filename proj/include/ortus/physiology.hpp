#pragma once

// Body loop of the respiratory circuit. Gas levels are the sensor activations
// themselves: metabolism pushes CO2 up and O2 down every step, and the lung,
// while active above its threshold, pulls them back in proportion to its
// activation.

#include <string>

#include "ortus/connectome.hpp"
#include "ortus/error.hpp"
#include "ortus/kernel.hpp"

namespace ortus {

struct PhysioConfig {
  double co2_production = 0.01;
  double o2_consumption = 0.01;
  double lung_threshold = 0.5;
  double exchange_gain = 0.12;
  double initial_co2 = 0.0;
  double initial_o2 = 0.0;

  void validate() const {
    if (!(co2_production >= 0.0 && o2_consumption >= 0.0 && exchange_gain > 0.0))
      throw ConfigError("physiology rates must be non-negative and exchange_gain positive");
    if (!(exchange_gain > co2_production))
      throw ConfigError("physio.exchange_gain must exceed physio.co2_production");
  }
};

struct RespirationClamp {
  bool block_exhale = false;
  bool block_inhale = false;
};

struct PhysioNames {
  std::string co2 = "sCO2";
  std::string o2 = "sO2";
  std::string lung = "LUNG";
};

struct PhysioBindings {
  NeuronId co2 = 0;
  NeuronId o2 = 0;
  NeuronId lung = 0;
};

inline PhysioBindings bind_physiology(const Connectome& net, const PhysioNames& names = {}) {
  auto need = [&](const std::string& name, const char* role) {
    if (auto id = net.find(name)) return *id;
    throw ConfigError(std::string("physiology needs a ") + role + " element named '" + name + "'");
  };
  return {need(names.co2, "CO2 sensor"), need(names.o2, "O2 sensor"), need(names.lung, "lung")};
}

// Change in the gas sensors for one step.
struct GasDeltas {
  double co2 = 0.0;
  double o2 = 0.0;

  GasDeltas& operator+=(const GasDeltas& o) {
    co2 += o.co2;
    o2 += o.o2;
    return *this;
  }
};

inline GasDeltas metabolic_step(const PhysioConfig& cfg) {
  return {cfg.co2_production, -cfg.o2_consumption};
}

inline GasDeltas lung_exchange(double lung_activation, const PhysioConfig& cfg,
                               const RespirationClamp& clamp = {}) {
  if (!(lung_activation > cfg.lung_threshold)) return {};
  const double flow = cfg.exchange_gain * lung_activation;
  return {clamp.block_exhale ? 0.0 : -flow, clamp.block_inhale ? 0.0 : flow};
}

// Adds this step's metabolic and lung terms into `ext`.
inline GasDeltas physiology_inputs(const SimState& state, const PhysioBindings& ids,
                                   const PhysioConfig& cfg, const RespirationClamp& clamp,
                                   ExternalInputs& ext) {
  GasDeltas d = metabolic_step(cfg);
  d += lung_exchange(state.activation[ids.lung], cfg, clamp);
  ext.injected[ids.co2] += d.co2;
  ext.injected[ids.o2] += d.o2;
  return d;
}

}  // namespace ortus
