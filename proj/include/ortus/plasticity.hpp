#pragma once

// Correlation-driven Hebbian / Stentian weight updates.
//
// For a synapse pre -> post, the post neuron compares its last four
// activations against the presynaptic history at lags 1..4 (cosine
// cross-correlation) and looks at the presynaptic slope over the same lags:
//
//   sum XCorr >= 3.92 and sum |Slope| <= 0.02   rapid strengthening
//   sum XCorr <  0.05                           slow weakening
//   sum XCorr >  3.5                            slow strengthening
//
// Both endpoints must be above the activity threshold for any change.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ortus/connectome.hpp"
#include "ortus/error.hpp"
#include "ortus/kernel.hpp"

namespace ortus {

struct PlasticityConfig {
  std::size_t xcorr_window = 4;
  std::size_t max_lag = 4;
  std::size_t slope_window = 2;
  double rapid_xcorr_min = 3.92;
  double rapid_slope_max = 0.02;
  double weaken_xcorr_max = 0.05;
  double strengthen_xcorr_min = 3.5;
  double rapid_rate = 0.01;
  double slow_rate = 0.001;
  double activity_threshold = 0.05;

  void validate() const {
    if (xcorr_window == 0 || max_lag == 0 || slope_window == 0)
      throw ConfigError("plasticity windows must be positive");
    if (max_lag + xcorr_window > kHistoryLength || max_lag + slope_window + 1 > kHistoryLength)
      throw ConfigError("plasticity windows exceed the activation history length");
    if (!(weaken_xcorr_max < strengthen_xcorr_min && strengthen_xcorr_min < rapid_xcorr_min &&
          rapid_xcorr_min <= static_cast<double>(max_lag)))
      throw ConfigError(
          "plasticity thresholds must satisfy weaken < strengthen < rapid <= max_lag");
    if (rapid_rate < 0.0 || slow_rate < 0.0) throw ConfigError("plasticity rates must be >= 0");
  }
};

// Cosine similarity between h_post[0..window) and h_j[lag..lag+window).
// Zero when either vector has (near) zero norm.
inline double lagged_xcorr(std::span<const double> h_post, std::span<const double> h_j,
                           std::size_t lag, std::size_t window = 4) {
  if (h_post.size() < window || h_j.size() < lag + window)
    throw InsufficientHistory("cross-correlation needs " + std::to_string(lag + window) +
                              " samples");
  double dot = 0.0, nn_post = 0.0, nn_j = 0.0;
  for (std::size_t k = 0; k < window; ++k) {
    const double x = h_post[k], y = h_j[lag + k];
    dot += x * y;
    nn_post += x * x;
    nn_j += y * y;
  }
  const double norm = std::sqrt(nn_post) * std::sqrt(nn_j);
  if (std::sqrt(nn_post) < 1e-12 || std::sqrt(nn_j) < 1e-12) return 0.0;
  return std::clamp(dot / norm, -1.0, 1.0);
}

// Least-squares slope of h[t..t+u] in activation per step. History index 0
// is the present, so a positive result means rising toward the present.
inline double slope(std::span<const double> h, std::size_t t, std::size_t u = 2) {
  if (u == 0 || h.size() < t + u + 1)
    throw InsufficientHistory("slope needs " + std::to_string(t + u + 1) + " samples");
  const double n = static_cast<double>(u + 1);
  const double mean_k = static_cast<double>(u) / 2.0;
  double mean_h = 0.0;
  for (std::size_t k = 0; k <= u; ++k) mean_h += h[t + k];
  mean_h /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k <= u; ++k) {
    const double dk = static_cast<double>(k) - mean_k;
    sxy += dk * (h[t + k] - mean_h);
    sxx += dk * dk;
  }
  return -sxy / sxx;
}

struct SynapseSignals {
  std::array<double, kHistoryLength> xcorr{};  // lags 1..max_lag at [0..max_lag)
  double xcorr_sum = 0.0;
  double slope_abs_sum = 0.0;
};

inline SynapseSignals synapse_signals(const History& post, const History& pre,
                                      const PlasticityConfig& cfg) {
  SynapseSignals s;
  for (std::size_t lag = 1; lag <= cfg.max_lag; ++lag) {
    s.xcorr[lag - 1] = lagged_xcorr(post.samples(), pre.samples(), lag, cfg.xcorr_window);
    s.xcorr_sum += s.xcorr[lag - 1];
    s.slope_abs_sum += std::abs(slope(pre.samples(), lag, cfg.slope_window));
  }
  return s;
}

enum class Classification { None, RapidStrengthen, SlowStrengthen, SlowWeaken };

inline std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::None: return "none";
    case Classification::RapidStrengthen: return "rapid_strengthen";
    case Classification::SlowStrengthen: return "slow_strengthen";
    case Classification::SlowWeaken: return "slow_weaken";
  }
  return "?";
}

inline Classification classify(const SynapseSignals& sig, double a_pre, double a_post,
                               const PlasticityConfig& cfg) {
  if (!(a_pre > cfg.activity_threshold && a_post > cfg.activity_threshold))
    return Classification::None;
  if (sig.xcorr_sum >= cfg.rapid_xcorr_min && sig.slope_abs_sum <= cfg.rapid_slope_max)
    return Classification::RapidStrengthen;
  if (sig.xcorr_sum < cfg.weaken_xcorr_max) return Classification::SlowWeaken;
  if (sig.xcorr_sum > cfg.strengthen_xcorr_min) return Classification::SlowStrengthen;
  return Classification::None;
}

// New weight after one update: w +/- rate * MI, clamped to [0, 1].
inline double updated_weight(double weight, double mutability, Classification c,
                             const PlasticityConfig& cfg) {
  double delta = 0.0;
  switch (c) {
    case Classification::RapidStrengthen: delta = cfg.rapid_rate; break;
    case Classification::SlowStrengthen: delta = cfg.slow_rate; break;
    case Classification::SlowWeaken: delta = -cfg.slow_rate; break;
    case Classification::None: return weight;
  }
  if (mutability == 0.0) return weight;
  return std::clamp(weight + delta * mutability, 0.0, 1.0);
}

struct UpdateCounts {
  std::size_t rapid = 0;
  std::size_t slow_strengthen = 0;
  std::size_t slow_weaken = 0;
};

// Classifies every mutable chemical synapse against the committed history and
// applies the resulting weight changes. No-op until the history is full.
inline UpdateCounts apply_updates(SimState& state, const Connectome& net,
                                  const PlasticityConfig& cfg,
                                  std::vector<Classification>* out = nullptr) {
  UpdateCounts counts;
  const auto& chem = net.chem();
  if (out) out->assign(chem.size(), Classification::None);
  if (state.history.empty() || !state.history.front().full()) return counts;

  // Classification reads only activations and histories, so computing all of
  // them before writing any weight keeps the phase order-independent.
  std::vector<Classification> cls(chem.size(), Classification::None);
  for (std::size_t s = 0; s < chem.size(); ++s) {
    const auto& syn = chem[s];
    if (syn.mutability == 0.0) continue;
    const double a_pre = state.activation[syn.pre], a_post = state.activation[syn.post];
    if (!(a_pre > cfg.activity_threshold && a_post > cfg.activity_threshold)) continue;
    cls[s] = classify(synapse_signals(state.history[syn.post], state.history[syn.pre], cfg),
                      a_pre, a_post, cfg);
  }
  for (std::size_t s = 0; s < chem.size(); ++s) {
    switch (cls[s]) {
      case Classification::RapidStrengthen: ++counts.rapid; break;
      case Classification::SlowStrengthen: ++counts.slow_strengthen; break;
      case Classification::SlowWeaken: ++counts.slow_weaken; break;
      case Classification::None: continue;
    }
    state.weights[s] = updated_weight(state.weights[s], chem[s].mutability, cls[s], cfg);
  }
  if (out) *out = std::move(cls);
  return counts;
}

}  // namespace ortus
