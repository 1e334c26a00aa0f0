#pragma once

// Synchronous, double-buffered activation update:
//
//   A[m+1] = A[m] - C_D*A[m] + sum(gap flux) + sum(chemical inflow) + injected
//
// followed by clamping to [-1, 1] and any per-neuron clamp directives.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "ortus/connectome.hpp"
#include "ortus/error.hpp"

namespace ortus {

inline constexpr std::size_t kHistoryLength = 8;

// Most recent activations of one neuron, index 0 = most recently committed.
class History {
 public:
  void push(double v) {
    std::copy_backward(buf_.begin(), buf_.end() - 1, buf_.end());
    buf_[0] = v;
    if (size_ < kHistoryLength) ++size_;
  }

  std::size_t size() const { return size_; }
  bool full() const { return size_ == kHistoryLength; }
  double operator[](std::size_t i) const { return buf_[i]; }
  std::span<const double> samples() const { return {buf_.data(), size_}; }

 private:
  std::array<double, kHistoryLength> buf_{};
  std::size_t size_ = 0;
};

struct SimState {
  std::vector<double> activation;
  std::vector<History> history;
  std::vector<double> weights;  // one per chemical synapse, storage order
  std::uint64_t step = 0;

  // Write buffer for the next step; swapped with `activation` on commit.
  std::vector<double> next;
};

inline SimState initial_state(const Connectome& net) {
  SimState s;
  s.activation.assign(net.size(), 0.0);
  s.next.assign(net.size(), 0.0);
  s.history.assign(net.size(), History{});
  s.weights.reserve(net.chem().size());
  for (const auto& c : net.chem()) s.weights.push_back(c.weight);
  return s;
}

enum class GjMode { Symmetric, PaperLiteral };

inline std::string_view to_string(GjMode m) {
  return m == GjMode::Symmetric ? "symmetric" : "paper-literal";
}

struct SimConfig {
  double decay_fraction = 0.20;
  GjMode gj_mode = GjMode::Symmetric;
  bool activation_clamp = true;
  double clamp_min = -1.0;
  double clamp_max = 1.0;
  // Verify sum(gj_in - gj_out) == 0 every step.
  bool check_conservation = false;
  unsigned threads = 1;

  void validate() const {
    if (!(decay_fraction >= 0.0 && decay_fraction < 1.0))
      throw ConfigError("sim.decay_fraction must lie in [0, 1)");
    if (!(clamp_min < clamp_max)) throw ConfigError("sim.clamp_min must be below sim.clamp_max");
    if (check_conservation && gj_mode == GjMode::PaperLiteral)
      throw ConfigError("conservation checks are meaningless in paper-literal gap junction mode");
  }
};

// Per-neuron injected activation and clamp directives for one step.
struct ExternalInputs {
  std::vector<double> injected;
  std::vector<std::optional<double>> clamp;

  static ExternalInputs none(std::size_t n) {
    return {std::vector<double>(n, 0.0), std::vector<std::optional<double>>(n)};
  }
};

struct StepFluxes {
  std::vector<double> gj_in;
  std::vector<double> cs_in;
  std::vector<double> gj_out;
  std::vector<double> decay;
  std::vector<double> conductance;  // per chemical synapse

  void resize(std::size_t neurons, std::size_t synapses) {
    gj_in.assign(neurons, 0.0);
    cs_in.assign(neurons, 0.0);
    gj_out.assign(neurons, 0.0);
    decay.assign(neurons, 0.0);
    conductance.assign(synapses, 0.0);
  }
};

// Sigmoid conductance of a graded synapse, 1/(1 + e^(-5 x)) with
// x = a_pre/range (or -a_pre/range for inverted drive).
inline double conductance(double a_pre, const NeuronParams& params = {}, bool inverted = false) {
  const double drive = (inverted ? -(a_pre - params.equilibrium) : a_pre - params.equilibrium);
  return 1.0 / (1.0 + std::exp(-5.0 * drive / params.range()));
}

inline bool transmits(double a_pre, double threshold, bool inverted) {
  return (inverted ? -a_pre : a_pre) >= threshold;
}

// weight * S_g * (A_rev - a_post), or 0 when the presynaptic activation is
// below the postsynaptic neuron's threshold.
inline double cs_inflow(const ChemicalSynapse& syn, double weight, double a_pre, double a_post,
                        double threshold, const NeuronParams& pre_params = {}) {
  if (!transmits(a_pre, threshold, syn.inverted)) return 0.0;
  return weight * conductance(a_pre, pre_params, syn.inverted) * (syn.reversal - a_post);
}

inline double cs_inflow(const ChemicalSynapse& syn, double a_pre, double a_post, double threshold,
                        const NeuronParams& pre_params = {}) {
  return cs_inflow(syn, syn.weight, a_pre, a_post, threshold, pre_params);
}

struct GapFlux {
  double into_a = 0.0;
  double into_b = 0.0;
};

// Half the activation difference, scaled by the junction weight, moves from
// the fuller side to the emptier one.
inline GapFlux gj_flux(const GapJunction& j, double a_a, double a_b) {
  const double into_b = j.weight * (a_a - a_b) / 2.0;
  return {-into_b, into_b};
}

// Activation of neuron `i` at step m+1, reading only step-m values from
// `state`. When `fluxes` is non-null the neuron's terms are recorded there.
inline double next_activation(NeuronId i, const SimState& state, const Connectome& net,
                              const ExternalInputs& ext, const SimConfig& cfg,
                              StepFluxes* fluxes = nullptr) {
  const auto& act = state.activation;
  const double a = act[i];

  double gj_in = 0.0, gj_out = 0.0;
  for (std::size_t g : net.junctions(i)) {
    const auto& j = net.gap()[g];
    if (cfg.gj_mode == GjMode::Symmetric) {
      const auto f = gj_flux(j, act[j.a], act[j.b]);
      const double into = (i == j.a) ? f.into_a : f.into_b;
      if (into >= 0.0) gj_in += into;
      else gj_out -= into;
    } else if (i == j.b) {
      gj_in += j.weight * (act[j.a] - act[j.b]) / 2.0;
    } else {
      gj_out += j.weight * (act[j.a] - act[j.b]) / 2.0;
    }
  }

  double cs_in = 0.0;
  const double threshold = net.neuron(i).threshold;
  for (std::size_t s : net.incoming(i)) {
    const auto& syn = net.chem()[s];
    const auto& pre = net.neuron(syn.pre);
    const double a_pre = act[syn.pre];
    if (fluxes) fluxes->conductance[s] = conductance(a_pre, pre.params, syn.inverted);
    cs_in += cs_inflow(syn, state.weights[s], a_pre, a, threshold, pre.params);
  }

  double decay = cfg.decay_fraction * a;
  double next;
  if (cfg.gj_mode == GjMode::Symmetric) {
    next = a - decay + (gj_in - gj_out) + cs_in;
  } else {
    // A_decay = C_D*A - A_GJout, substituted verbatim.
    decay -= gj_out;
    next = (a - decay) + gj_in + cs_in;
  }
  next += ext.injected.empty() ? 0.0 : ext.injected[i];

  if (cfg.activation_clamp) next = std::clamp(next, cfg.clamp_min, cfg.clamp_max);
  if (!ext.clamp.empty() && ext.clamp[i]) next = *ext.clamp[i];

  if (fluxes) {
    fluxes->gj_in[i] = gj_in;
    fluxes->gj_out[i] = gj_out;
    fluxes->cs_in[i] = cs_in;
    fluxes->decay[i] = decay;
  }
  return next;
}

// Advances every neuron one step and commits the result into `state`.
inline void step(SimState& state, const Connectome& net, const ExternalInputs& ext,
                 const SimConfig& cfg, StepFluxes* fluxes = nullptr) {
  cfg.validate();
  const auto n = net.size();
  if (state.activation.size() != n || state.weights.size() != net.chem().size())
    throw ConfigError("simulation state does not match the connectome");
  if ((!ext.injected.empty() && ext.injected.size() != n) ||
      (!ext.clamp.empty() && ext.clamp.size() != n))
    throw ConfigError("external inputs do not match the connectome");

  StepFluxes local;
  if (!fluxes && cfg.check_conservation) fluxes = &local;
  if (fluxes) fluxes->resize(n, net.chem().size());
  state.next.resize(n);

  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      state.next[i] = next_activation(static_cast<NeuronId>(i), state, net, ext, cfg, fluxes);
  };

  // Each neuron sums its own terms in storage order, so splitting the neuron
  // range across threads gives bit-identical results.
  const unsigned threads = std::max(1u, cfg.threads);
  if (threads == 1 || n < 256) {
    run_range(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t lo = 0; lo < n; lo += chunk)
      pool.emplace_back(run_range, lo, std::min(n, lo + chunk));
  }

  if (cfg.check_conservation) {
    double net_flux = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      net_flux += fluxes->gj_in[i] - fluxes->gj_out[i];
      scale += fluxes->gj_in[i] + fluxes->gj_out[i];
    }
    if (std::abs(net_flux) > 1e-9 * std::max(1.0, scale))
      throw Error("gap junction fluxes do not conserve activation");
  }

  std::swap(state.activation, state.next);
  for (std::size_t i = 0; i < n; ++i) state.history[i].push(state.activation[i]);
  ++state.step;
}

}  // namespace ortus
