#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ortus/dsl.hpp"
#include "ortus/error.hpp"
#include "ortus/format.hpp"

namespace ortus {

using NeuronId = std::uint32_t;

enum class Layer { Sensory, SEI, SCI, EEI, Emotion, Motor, Muscle, PlainInterneuron };

inline std::string_view to_string(Layer l) {
  switch (l) {
    case Layer::Sensory: return "sensory";
    case Layer::SEI: return "SEI";
    case Layer::SCI: return "SCI";
    case Layer::EEI: return "EEI";
    case Layer::Emotion: return "emotion";
    case Layer::Motor: return "motor";
    case Layer::Muscle: return "muscle";
    case Layer::PlainInterneuron: return "plain-interneuron";
  }
  return "?";
}

// Activation scale: equilibrium 0, reversals at +1 / -1.
struct NeuronParams {
  double excit_reversal = 1.0;
  double inhib_reversal = -1.0;
  double equilibrium = 0.0;

  double range() const { return excit_reversal - inhib_reversal; }
};

struct Neuron {
  NeuronId id = 0;
  std::string name;
  Layer layer = Layer::PlainInterneuron;
  // Presynaptic activation below this does not cross chemical synapses into
  // this neuron.
  double threshold = 0.05;
  Affect affect = Affect::Neutral;
  NeuronParams params;
};

struct ChemicalSynapse {
  NeuronId pre = 0;
  NeuronId post = 0;
  double weight = 0.0;
  double reversal = 1.0;
  double mutability = 0.0;
  // Conductance follows the presynaptic *decrease* (for `-A causes ...`).
  bool inverted = false;

  bool excitatory() const { return reversal > 0.0; }
};

struct GapJunction {
  NeuronId a = 0;
  NeuronId b = 0;
  double weight = 0.0;
};

// Compiled network. Immutable after construction; the constructor checks the
// structural invariants and builds the per-neuron adjacency used by the kernel.
class Connectome {
 public:
  Connectome() = default;

  Connectome(std::vector<Neuron> neurons, std::vector<ChemicalSynapse> chem,
             std::vector<GapJunction> gap)
      : neurons_(std::move(neurons)), chem_(std::move(chem)), gap_(std::move(gap)) {
    const auto n = neurons_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (neurons_[i].id != i)
        throw BuildError(BuildError::Kind::InvalidSpec,
                         "neuron '" + neurons_[i].name + "' id does not match its position");
      if (!by_name_.emplace(neurons_[i].name, static_cast<NeuronId>(i)).second)
        throw BuildError(BuildError::Kind::InvalidSpec,
                         "duplicate neuron name '" + neurons_[i].name + "'");
      if (neurons_[i].params.range() <= 0.0)
        throw BuildError(BuildError::Kind::InvalidSpec, "neuron activation range must be positive");
      switch (neurons_[i].layer) {
        case Layer::Sensory: sensor_ids_.push_back(static_cast<NeuronId>(i)); break;
        case Layer::Emotion: emotion_ids_.push_back(static_cast<NeuronId>(i)); break;
        case Layer::Motor: motor_ids_.push_back(static_cast<NeuronId>(i)); break;
        case Layer::Muscle: muscle_ids_.push_back(static_cast<NeuronId>(i)); break;
        default: break;
      }
    }

    incoming_.assign(n, {});
    std::set<std::pair<NeuronId, NeuronId>> pairs;
    for (std::size_t s = 0; s < chem_.size(); ++s) {
      const auto& c = chem_[s];
      if (c.pre >= n || c.post >= n)
        throw BuildError(BuildError::Kind::InvalidSpec, "chemical synapse endpoint out of range");
      if (c.weight < 0.0 || c.weight > 1.0 || c.mutability < 0.0 || c.mutability > 1.0)
        throw BuildError(BuildError::Kind::InvalidSpec,
                         "chemical synapse weight and mutability must lie in [0, 1]");
      const auto& p = neurons_[c.post].params;
      if (c.reversal != p.excit_reversal && c.reversal != p.inhib_reversal)
        throw BuildError(BuildError::Kind::InvalidSpec,
                         "synapse reversal must be the post neuron's excitatory or inhibitory reversal");
      if (!pairs.emplace(c.pre, c.post).second)
        throw BuildError(BuildError::Kind::UnsatisfiableRelationship,
                         "duplicate chemical synapse " + neurons_[c.pre].name + " -> " +
                             neurons_[c.post].name);
      incoming_[c.post].push_back(s);
    }

    junctions_.assign(n, {});
    std::set<std::pair<NeuronId, NeuronId>> gj_pairs;
    for (std::size_t g = 0; g < gap_.size(); ++g) {
      auto& j = gap_[g];
      if (j.a > j.b) std::swap(j.a, j.b);
      if (j.b >= n || j.a == j.b)
        throw BuildError(BuildError::Kind::InvalidSpec, "invalid gap junction endpoints");
      if (j.weight < 0.0 || j.weight > 1.0)
        throw BuildError(BuildError::Kind::InvalidSpec, "gap junction weight must lie in [0, 1]");
      if (!gj_pairs.emplace(j.a, j.b).second)
        throw BuildError(BuildError::Kind::UnsatisfiableRelationship,
                         "duplicate gap junction " + neurons_[j.a].name + " <-> " +
                             neurons_[j.b].name);
      junctions_[j.a].push_back(g);
      junctions_[j.b].push_back(g);
    }
  }

  std::size_t size() const { return neurons_.size(); }
  const std::vector<Neuron>& neurons() const { return neurons_; }
  const std::vector<ChemicalSynapse>& chem() const { return chem_; }
  const std::vector<GapJunction>& gap() const { return gap_; }
  const Neuron& neuron(NeuronId id) const { return neurons_.at(id); }

  const std::vector<NeuronId>& sensor_ids() const { return sensor_ids_; }
  const std::vector<NeuronId>& emotion_ids() const { return emotion_ids_; }
  const std::vector<NeuronId>& motor_ids() const { return motor_ids_; }
  const std::vector<NeuronId>& muscle_ids() const { return muscle_ids_; }

  // Chemical synapse indices terminating at `post`, in storage order.
  std::span<const std::size_t> incoming(NeuronId post) const { return incoming_[post]; }
  // Gap junction indices touching `id`, in storage order.
  std::span<const std::size_t> junctions(NeuronId id) const { return junctions_[id]; }

  std::optional<NeuronId> find(std::string_view name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  NeuronId id_of(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw Error("unknown neuron '" + std::string(name) + "'");
  }

  std::vector<NeuronId> layer_ids(Layer layer) const {
    std::vector<NeuronId> out;
    for (const auto& n : neurons_)
      if (n.layer == layer) out.push_back(n.id);
    return out;
  }

 private:
  std::vector<Neuron> neurons_;
  std::vector<ChemicalSynapse> chem_;
  std::vector<GapJunction> gap_;
  std::vector<NeuronId> sensor_ids_, emotion_ids_, motor_ids_, muscle_ids_;
  std::vector<std::vector<std::size_t>> incoming_;
  std::vector<std::vector<std::size_t>> junctions_;
  std::map<std::string, NeuronId, std::less<>> by_name_;
};

struct BuildConfig {
  std::uint64_t sci_cap = 4095;
  double default_threshold = 0.05;
  double sei_weight = 1.0;
  double sci_mutability = 0.0;
  double eei_initial_weight = 0.01;
  double eei_mutability = 0.9;
  double eei_gj_weight = 0.2;
  double eei_feedback_weight = 0.02;
  double eei_feedback_mutability = 0.0;
  double dominance_weight = 0.6;
};

// Mutable staging area used while compiling a spec.
struct ConnectomeDraft {
  std::vector<Neuron> neurons;
  std::vector<ChemicalSynapse> chem;
  std::vector<GapJunction> gap;
  std::map<std::string, NeuronId, std::less<>> by_name;

  NeuronId add_neuron(std::string name, Layer layer, double threshold,
                      Affect affect = Affect::Neutral) {
    const auto id = static_cast<NeuronId>(neurons.size());
    if (!by_name.emplace(name, id).second)
      throw BuildError(BuildError::Kind::InvalidSpec, "duplicate neuron name '" + name + "'");
    neurons.push_back({id, std::move(name), layer, threshold, affect, {}});
    return id;
  }

  void add_chem(NeuronId pre, NeuronId post, double weight, bool excitatory,
                double mutability, bool inverted = false) {
    const auto& p = neurons[post].params;
    chem.push_back({pre, post, weight, excitatory ? p.excit_reversal : p.inhib_reversal,
                    mutability, inverted});
  }

  void add_gap(NeuronId a, NeuronId b, double weight) {
    if (a > b) std::swap(a, b);
    gap.push_back({a, b, weight});
  }

  std::optional<NeuronId> find(std::string_view name) const {
    auto it = by_name.find(name);
    if (it == by_name.end()) return std::nullopt;
    return it->second;
  }
};

struct SensorChannel {
  NeuronId sensor;
  NeuronId sei;
};

// One SCI per non-empty sensor subset, in bitmask order (bit i = i-th sensor).
// Each SCI receives an excitatory synapse from the SEI of every sensor in its
// subset with weight 1/|subset|.
inline std::vector<NeuronId> generate_scis(ConnectomeDraft& draft,
                                           std::span<const SensorChannel> channels,
                                           const BuildConfig& cfg) {
  const auto count = sci_count(channels.size());
  if (channels.empty() || count > cfg.sci_cap)
    throw BuildError(BuildError::Kind::SciCapExceeded,
                     std::to_string(channels.size()) + " sensors need " + std::to_string(count) +
                         " SCIs, above the cap of " + std::to_string(cfg.sci_cap));
  std::vector<NeuronId> scis;
  scis.reserve(count);
  for (std::uint64_t mask = 1; mask <= count; ++mask) {
    std::vector<std::string> names;
    std::vector<NeuronId> seis;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        names.push_back(draft.neurons[channels[i].sensor].name);
        seis.push_back(channels[i].sei);
      }
    }
    const auto sci = draft.add_neuron(sci_name(names), Layer::SCI, cfg.default_threshold);
    const double w = 1.0 / static_cast<double>(seis.size());
    for (auto sei : seis) draft.add_chem(sei, sci, w, true, cfg.sci_mutability);
    scis.push_back(sci);
  }
  return scis;
}

// (dominant, dominated) emotion pair.
using DominancePair = std::pair<NeuronId, NeuronId>;

// EEIs for every (SCI, emotion) pair, SCI-major. Returns eei[sci_index][emotion_index].
inline std::vector<std::vector<NeuronId>> generate_emotion_layer(
    ConnectomeDraft& draft, std::span<const NeuronId> scis, std::span<const NeuronId> emotions,
    std::span<const DominancePair> dominance, const BuildConfig& cfg) {
  if (emotions.empty())
    throw BuildError(BuildError::Kind::InvalidSpec, "at least one emotion is required");
  std::vector<std::vector<NeuronId>> eei(scis.size(), std::vector<NeuronId>(emotions.size()));
  for (std::size_t s = 0; s < scis.size(); ++s) {
    for (std::size_t e = 0; e < emotions.size(); ++e) {
      const auto& emo = draft.neurons[emotions[e]];
      const auto id = draft.add_neuron(eei_name(emo.name, draft.neurons[scis[s]].name),
                                       Layer::EEI, cfg.default_threshold, emo.affect);
      draft.add_chem(scis[s], id, cfg.eei_initial_weight, true, cfg.eei_mutability);
      draft.add_chem(id, scis[s], cfg.eei_feedback_weight, true, cfg.eei_feedback_mutability);
      draft.add_gap(id, emotions[e], cfg.eei_gj_weight);
      eei[s][e] = id;
    }
  }
  auto index_of = [&](NeuronId emotion) {
    return static_cast<std::size_t>(std::find(emotions.begin(), emotions.end(), emotion) -
                                    emotions.begin());
  };
  for (const auto& [dom, sub] : dominance) {
    const auto d = index_of(dom), p = index_of(sub);
    if (d == emotions.size() || p == emotions.size()) continue;
    for (std::size_t s = 0; s < scis.size(); ++s)
      draft.add_chem(eei[s][d], eei[s][p], cfg.dominance_weight, false, 0.0);
  }
  return eei;
}

// Translates declared relationships into synapses:
//   +A causes +B  excitatory CS        +A causes -B  inhibitory CS
//   -A causes +B  excitatory, inverted -A causes -B  inhibitory, inverted
//   correlated    gap junction         opposes       inhibitory CS both ways
//   dominates     inhibitory CS A -> B
inline void apply_relationships(const NetworkSpec& spec, ConnectomeDraft& draft) {
  using K = BuildError::Kind;
  for (const auto& r : spec.relationships) {
    const auto a = draft.find(r.a), b = draft.find(r.b);
    if (!a || !b)
      throw BuildError(K::InvalidSpec, "relationship references unknown element '" +
                                           (a ? r.b : r.a) + "'");
    auto reject_sensory_target = [&](NeuronId target) {
      if (draft.neurons[target].layer == Layer::Sensory)
        throw BuildError(K::UnsatisfiableRelationship,
                         std::string(to_string(r.kind)) + " cannot drive sensory element '" +
                             draft.neurons[target].name + "'; sensors are inputs only");
    };
    const bool excitatory = r.effective_polarity() == Polarity::Excitatory;
    switch (r.kind) {
      case RelationKind::Causes:
        reject_sensory_target(*b);
        draft.add_chem(*a, *b, r.weight, excitatory, r.mutability,
                       r.a_sign.value_or(Sign::Plus) == Sign::Minus);
        break;
      case RelationKind::Correlated:
        draft.add_gap(*a, *b, r.weight);
        break;
      case RelationKind::Opposes:
        reject_sensory_target(*a);
        reject_sensory_target(*b);
        draft.add_chem(*a, *b, r.weight, false, 0.0);
        draft.add_chem(*b, *a, r.weight, false, 0.0);
        break;
      case RelationKind::Dominates:
        reject_sensory_target(*b);
        draft.add_chem(*a, *b, r.weight, false, 0.0);
        break;
    }
  }
}

inline Layer layer_of(ElementKind kind) {
  switch (kind) {
    case ElementKind::Sensory: return Layer::Sensory;
    case ElementKind::Interneuron: return Layer::PlainInterneuron;
    case ElementKind::Motor: return Layer::Motor;
    case ElementKind::Muscle: return Layer::Muscle;
    case ElementKind::Emotion: return Layer::Emotion;
  }
  return Layer::PlainInterneuron;
}

// Neuron order: declared elements, SEIs, SCIs, EEIs. Synapse order: SEI relays,
// SCI fan-in, EEI wiring, EEI dominance, declared relationships.
inline Connectome build(const NetworkSpec& spec, const BuildConfig& cfg = {}) {
  const auto diags = validate_spec(spec, cfg.sci_cap);
  for (const auto& d : diags)
    if (d.is_error()) throw BuildError(BuildError::Kind::InvalidSpec, to_string(d));

  ConnectomeDraft draft;
  std::vector<NeuronId> emotions;
  std::vector<SensorChannel> channels;
  for (const auto& e : spec.elements) {
    const auto id = draft.add_neuron(e.name, layer_of(e.kind),
                                     e.threshold.value_or(cfg.default_threshold), e.affect);
    if (e.kind == ElementKind::Sensory) channels.push_back({id, 0});
    if (e.kind == ElementKind::Emotion) emotions.push_back(id);
  }
  if (sci_count(channels.size()) > cfg.sci_cap)
    throw BuildError(BuildError::Kind::SciCapExceeded,
                     std::to_string(channels.size()) + " sensors need " +
                         std::to_string(sci_count(channels.size())) + " SCIs, above the cap of " +
                         std::to_string(cfg.sci_cap));
  // The SEI relays the sensor, so it gates on the sensor's declared threshold.
  for (auto& ch : channels) {
    const auto& sensor = draft.neurons[ch.sensor];
    ch.sei = draft.add_neuron(sei_name(sensor.name), Layer::SEI, sensor.threshold);
  }
  for (const auto& ch : channels) draft.add_chem(ch.sensor, ch.sei, cfg.sei_weight, true, 0.0);

  const auto scis = generate_scis(draft, channels, cfg);

  std::vector<DominancePair> dominance;
  for (const auto& r : spec.relationships) {
    if (r.kind != RelationKind::Dominates && r.kind != RelationKind::Opposes) continue;
    const auto* a = spec.find(r.a);
    const auto* b = spec.find(r.b);
    if (!a || !b || a->kind != ElementKind::Emotion || b->kind != ElementKind::Emotion) continue;
    dominance.emplace_back(*draft.find(r.a), *draft.find(r.b));
    if (r.kind == RelationKind::Opposes) dominance.emplace_back(*draft.find(r.b), *draft.find(r.a));
  }
  generate_emotion_layer(draft, scis, emotions, dominance, cfg);
  apply_relationships(spec, draft);

  return Connectome(std::move(draft.neurons), std::move(draft.chem), std::move(draft.gap));
}

// ---------------------------------------------------------------------------
// Export

inline std::string neurons_csv(const Connectome& net) {
  std::string out = "id,name,layer,threshold,affect\n";
  for (const auto& n : net.neurons()) {
    out += std::to_string(n.id) + "," + n.name + "," + std::string(to_string(n.layer)) + "," +
           format_double(n.threshold) + "," + std::string(to_string(n.affect)) + "\n";
  }
  return out;
}

inline std::string chem_csv(const Connectome& net) {
  std::string out = "pre,post,weight,reversal,mutability,inverted\n";
  for (const auto& c : net.chem()) {
    out += std::to_string(c.pre) + "," + std::to_string(c.post) + "," + format_double(c.weight) +
           "," + format_double(c.reversal) + "," + format_double(c.mutability) + "," +
           (c.inverted ? "1" : "0") + "\n";
  }
  return out;
}

inline std::string gap_csv(const Connectome& net) {
  std::string out = "a,b,weight\n";
  for (const auto& g : net.gap())
    out += std::to_string(g.a) + "," + std::to_string(g.b) + "," + format_double(g.weight) + "\n";
  return out;
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(f), {});
}

inline void write_connectome_csv(const Connectome& net, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "neurons.csv", neurons_csv(net));
  write_text(dir / "chem.csv", chem_csv(net));
  write_text(dir / "gap.csv", gap_csv(net));
}

inline std::string to_dot(const Connectome& net) {
  auto color = [](Layer l) -> std::string_view {
    switch (l) {
      case Layer::Sensory: return "black";
      case Layer::SEI: return "purple";
      case Layer::SCI: return "orange";
      case Layer::EEI: return "blue";
      case Layer::Emotion: return "teal";
      case Layer::Motor: return "darkgreen";
      case Layer::Muscle: return "brown";
      case Layer::PlainInterneuron: return "gray";
    }
    return "gray";
  };
  std::string out = "digraph connectome {\n  rankdir=LR;\n";
  for (const auto& n : net.neurons()) {
    out += "  n" + std::to_string(n.id) + " [label=\"" + n.name + "\", color=" +
           std::string(color(n.layer)) + "];\n";
  }
  for (const auto& c : net.chem()) {
    out += "  n" + std::to_string(c.pre) + " -> n" + std::to_string(c.post) + " [color=" +
           (c.excitatory() ? "green" : "red") + (c.excitatory() ? "" : ", arrowhead=tee") +
           (c.inverted ? ", style=dashed" : "") + ", label=\"" + format_double(c.weight) + "\"];\n";
  }
  for (const auto& g : net.gap()) {
    out += "  n" + std::to_string(g.a) + " -> n" + std::to_string(g.b) +
           " [dir=both, arrowhead=tee, arrowtail=tee, style=bold, label=\"" +
           format_double(g.weight) + "\"];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace ortus
