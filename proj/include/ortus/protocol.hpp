#pragma once

// Experiment scripts and the closed-loop runner.
//
// Protocol files are line oriented; `#` starts a comment:
//
//   steps <N>
//   at <start>..<end> inject <element> <amplitude>
//   at <start>..<end> clamp <element> <value>
//   at <start>..<end> block respiration [exhale] [inhale]
//   map <co2|o2|lung> <element>
//
// Windows are half-open: an event is active on steps start <= m < end.
// `block respiration` without flags blocks both directions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ortus/config.hpp"
#include "ortus/connectome.hpp"
#include "ortus/error.hpp"
#include "ortus/format.hpp"
#include "ortus/kernel.hpp"
#include "ortus/physiology.hpp"
#include "ortus/plasticity.hpp"

namespace ortus {

struct Inject {
  std::string element;
  double amplitude = 0.0;
};

struct Clamp {
  std::string element;
  double value = 0.0;
};

struct RespirationBlock {
  bool exhale = true;
  bool inhale = true;
};

using Action = std::variant<Inject, Clamp, RespirationBlock>;

struct Event {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  Action action;
  std::size_t line = 0;

  bool active(std::uint64_t step) const { return start <= step && step < end; }
};

inline std::string describe(const Action& a) {
  if (const auto* i = std::get_if<Inject>(&a))
    return "inject " + i->element + " " + format_double(i->amplitude);
  if (const auto* c = std::get_if<Clamp>(&a))
    return "clamp " + c->element + " " + format_double(c->value);
  const auto& b = std::get<RespirationBlock>(a);
  std::string out = "block respiration";
  if (b.exhale) out += " exhale";
  if (b.inhale) out += " inhale";
  return out;
}

struct Protocol {
  std::uint64_t total_steps = 0;
  std::vector<Event> events;
  PhysioNames physio_names;
};

inline Protocol parse_protocol(std::string_view text) {
  Protocol p;
  bool have_steps = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::vector<std::string> w;
    for (std::string s; words >> s;) w.push_back(s);
    if (w.empty()) continue;

    auto fail = [&](const std::string& msg) -> ProtocolError { return {line_no, msg}; };
    auto number = [&](const std::string& s, const char* what) {
      auto v = parse_double(s);
      if (!v) throw fail(std::string("expected ") + what + ", got '" + s + "'");
      return *v;
    };
    auto count = [&](const std::string& s) {
      auto v = parse_int(s);
      if (!v || *v < 0) throw fail("expected a non-negative step count, got '" + s + "'");
      return static_cast<std::uint64_t>(*v);
    };

    if (w[0] == "steps") {
      if (w.size() != 2) throw fail("usage: steps <N>");
      if (have_steps) throw fail("'steps' given twice");
      p.total_steps = count(w[1]);
      have_steps = true;
    } else if (w[0] == "map") {
      if (w.size() != 3) throw fail("usage: map <co2|o2|lung> <element>");
      if (w[1] == "co2") p.physio_names.co2 = w[2];
      else if (w[1] == "o2") p.physio_names.o2 = w[2];
      else if (w[1] == "lung") p.physio_names.lung = w[2];
      else throw fail("unknown physiology role '" + w[1] + "'");
    } else if (w[0] == "at") {
      if (w.size() < 3) throw fail("usage: at <start>..<end> <action> ...");
      const auto dots = w[1].find("..");
      if (dots == std::string::npos) throw fail("expected <start>..<end>, got '" + w[1] + "'");
      Event e;
      e.line = line_no;
      e.start = count(w[1].substr(0, dots));
      e.end = count(w[1].substr(dots + 2));
      if (w[2] == "inject" || w[2] == "clamp") {
        if (w.size() != 5) throw fail("usage: at <start>..<end> " + w[2] + " <element> <value>");
        const double v = number(w[4], "a number");
        if (v < -1.0 || v > 1.0) throw fail(w[2] + " value must lie in [-1, 1]");
        if (w[2] == "inject") e.action = Inject{w[3], v};
        else e.action = Clamp{w[3], v};
      } else if (w[2] == "block") {
        if (w.size() < 4 || w[3] != "respiration")
          throw fail("usage: at <start>..<end> block respiration [exhale] [inhale]");
        RespirationBlock b{false, false};
        for (std::size_t k = 4; k < w.size(); ++k) {
          if (w[k] == "exhale") b.exhale = true;
          else if (w[k] == "inhale") b.inhale = true;
          else throw fail("unexpected '" + w[k] + "' (expected exhale or inhale)");
        }
        if (!b.exhale && !b.inhale) b = {true, true};
        e.action = b;
      } else {
        throw fail("unknown action '" + w[2] + "' (expected inject, clamp or block)");
      }
      p.events.push_back(std::move(e));
    } else {
      throw fail("unknown directive '" + w[0] + "' (expected steps, at or map)");
    }
  }
  if (!have_steps) throw ProtocolError(0, "protocol is missing a 'steps' line");
  for (const auto& e : p.events) {
    if (!(e.start < e.end)) throw ProtocolError(e.line, "event end must be after its start");
    if (e.end > p.total_steps)
      throw ProtocolError(e.line, "event ends after the protocol's last step");
  }
  return p;
}

// Checks every element reference against the connectome.
inline void resolve(const Protocol& p, const Connectome& net) {
  for (const auto& e : p.events) {
    const std::string* name = nullptr;
    if (const auto* i = std::get_if<Inject>(&e.action)) name = &i->element;
    if (const auto* c = std::get_if<Clamp>(&e.action)) name = &c->element;
    if (name && !net.find(*name))
      throw ProtocolError(e.line, "unknown element '" + *name + "'");
  }
}

inline Protocol load_protocol(const std::filesystem::path& path) {
  return parse_protocol(read_text(path));
}

inline Protocol load_protocol(const std::filesystem::path& path, const Connectome& net) {
  auto p = load_protocol(path);
  resolve(p, net);
  return p;
}

// ---------------------------------------------------------------------------
// Trace

struct WeightSnapshot {
  std::uint64_t step = 0;
  std::size_t synapse = 0;
  double weight = 0.0;
};

struct Marker {
  std::uint64_t step = 0;
  std::string label;
};

class TraceLog {
 public:
  TraceLog() = default;
  explicit TraceLog(const Connectome& net) {
    for (const auto& n : net.neurons()) names_.push_back(n.name);
    for (const auto& c : net.chem()) synapses_.emplace_back(c.pre, c.post);
  }

  std::size_t neurons() const { return names_.size(); }
  std::size_t steps() const { return names_.empty() ? 0 : activations_.size() / names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  void record(std::span<const double> row) {
    activations_.insert(activations_.end(), row.begin(), row.end());
  }
  void snapshot(std::uint64_t step, std::size_t synapse, double w) {
    weights_.push_back({step, synapse, w});
  }
  void mark(std::uint64_t step, std::string label) { markers_.push_back({step, std::move(label)}); }

  std::span<const double> row(std::size_t step) const {
    return {activations_.data() + step * neurons(), neurons()};
  }
  double at(std::size_t step, NeuronId id) const { return activations_[step * neurons() + id]; }

  std::optional<NeuronId> find(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<NeuronId>(it - names_.begin());
  }

  std::vector<double> series(NeuronId id) const {
    std::vector<double> out(steps());
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = at(m, id);
    return out;
  }

  std::vector<double> series(std::string_view name) const {
    auto id = find(name);
    if (!id) throw Error("trace has no neuron named '" + std::string(name) + "'");
    return series(*id);
  }

  const std::vector<WeightSnapshot>& weight_snapshots() const { return weights_; }
  const std::vector<Marker>& markers() const { return markers_; }

  std::string trace_csv() const {
    std::string out;
    for (std::size_t i = 0; i < names_.size(); ++i) out += (i ? "," : "") + names_[i];
    out += "\n";
    for (std::size_t m = 0; m < steps(); ++m) {
      const auto r = row(m);
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_double(r[i]);
      out += "\n";
    }
    return out;
  }

  std::string weights_csv() const {
    std::string out = "step,synapse,pre,post,weight\n";
    for (const auto& w : weights_) {
      const auto [pre, post] = synapses_[w.synapse];
      out += std::to_string(w.step) + "," + std::to_string(w.synapse) + "," + names_[pre] + "," +
             names_[post] + "," + format_double(w.weight) + "\n";
    }
    return out;
  }

  std::string markers_csv() const {
    std::string out = "step,label\n";
    for (const auto& m : markers_) out += std::to_string(m.step) + "," + m.label + "\n";
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::pair<NeuronId, NeuronId>> synapses_;
  std::vector<double> activations_;
  std::vector<WeightSnapshot> weights_;
  std::vector<Marker> markers_;
};

// ---------------------------------------------------------------------------
// Closed-loop runner

struct RunResult {
  TraceLog trace;
  SimState final_state;
};

// Each step: physiology and protocol inputs -> kernel step -> plasticity ->
// record. Deterministic; there is no randomness anywhere in the loop.
inline RunResult run(const Connectome& net, const Protocol& protocol, const Config& cfg) {
  cfg.validate();
  resolve(protocol, net);

  std::optional<PhysioBindings> physio;
  if (cfg.harness.physiology) physio = bind_physiology(net, protocol.physio_names);

  RunResult out{TraceLog(net), initial_state(net)};
  auto& state = out.final_state;
  if (physio) {
    state.activation[physio->co2] = cfg.physio.initial_co2;
    state.activation[physio->o2] = cfg.physio.initial_o2;
  }

  struct Boundary {
    std::uint64_t step;
    std::size_t order;
    std::string label;
  };
  std::vector<Boundary> bounds;
  for (std::size_t k = 0; k < protocol.events.size(); ++k) {
    const auto& e = protocol.events[k];
    bounds.push_back({e.start, 2 * k + 1, "start " + describe(e.action)});
    bounds.push_back({e.end, 2 * k, "end " + describe(e.action)});
  }
  std::stable_sort(bounds.begin(), bounds.end(), [](const Boundary& a, const Boundary& b) {
    return a.step != b.step ? a.step < b.step : a.order < b.order;
  });
  for (auto& b : bounds) out.trace.mark(b.step, std::move(b.label));

  const auto n = net.size();
  for (std::uint64_t m = 0; m < protocol.total_steps; ++m) {
    auto ext = ExternalInputs::none(n);
    RespirationClamp block;
    bool any_active = false;
    for (const auto& e : protocol.events) {
      if (!e.active(m)) continue;
      any_active = true;
      if (const auto* b = std::get_if<RespirationBlock>(&e.action)) {
        block.block_exhale |= b->exhale;
        block.block_inhale |= b->inhale;
      }
    }
    if (physio) physiology_inputs(state, *physio, cfg.physio, block, ext);
    for (const auto& e : protocol.events) {
      if (!e.active(m)) continue;
      if (const auto* i = std::get_if<Inject>(&e.action)) ext.injected[net.id_of(i->element)] += i->amplitude;
      if (const auto* c = std::get_if<Clamp>(&e.action)) ext.clamp[net.id_of(c->element)] = c->value;
    }

    step(state, net, ext, cfg.sim);
    if (cfg.harness.plasticity && (any_active || cfg.harness.plasticity_when_idle))
      apply_updates(state, net, cfg.plasticity);

    out.trace.record(state.activation);
    if (cfg.harness.snapshot_every && m % cfg.harness.snapshot_every == 0) {
      for (std::size_t s = 0; s < net.chem().size(); ++s)
        if (net.chem()[s].mutability > 0.0) out.trace.snapshot(m, s, state.weights[s]);
    }
  }
  return out;
}

inline void write_trace_csv(const TraceLog& trace, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "trace.csv", trace.trace_csv());
  write_text(dir / "weights.csv", trace.weights_csv());
  write_text(dir / "markers.csv", trace.markers_csv());
}

// ---------------------------------------------------------------------------
// Metrics

// One peak per excursion above the midpoint between the series' minimum and
// maximum: the first sample holding the excursion's maximum. An excursion
// still open at the end of the series is not counted.
inline std::vector<std::size_t> find_peaks(std::span<const double> x) {
  std::vector<std::size_t> peaks;
  if (x.size() < 3) return peaks;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (!(*hi > *lo)) return peaks;
  const double level = *lo + 0.5 * (*hi - *lo);
  std::size_t k = 0;
  while (k < x.size() && x[k] > level) ++k;  // skip an excursion already open at the start
  while (k < x.size()) {
    if (x[k] <= level) {
      ++k;
      continue;
    }
    std::size_t best = k;
    while (k < x.size() && x[k] > level) {
      if (x[k] > x[best]) best = k;
      ++k;
    }
    if (k < x.size()) peaks.push_back(best);
  }
  return peaks;
}

inline std::vector<double> intervals(std::span<const std::size_t> peaks) {
  std::vector<double> out;
  for (std::size_t k = 1; k < peaks.size(); ++k)
    out.push_back(static_cast<double>(peaks[k] - peaks[k - 1]));
  return out;
}

inline double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Population coefficient of variation.
inline double coefficient_of_variation(std::span<const double> x) {
  const double mu = mean(x);
  if (x.empty() || mu == 0.0) return 0.0;
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(x.size())) / std::abs(mu);
}

// Zero-lag correlation of the mean-removed series.
inline double correlation(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  const double mx = mean(x.first(n)), my = mean(y.first(n));
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

enum class MetricKind { Peak, Mean, Auc, Intervals };

struct MetricQuery {
  MetricKind kind = MetricKind::Peak;
  std::string neuron;
  std::uint64_t start = 0;
  std::uint64_t end = 0;  // exclusive
  std::string label;      // defaults to "<kind>:<neuron>:<start>..<end>"
};

struct MetricRow {
  std::string label;
  double value = 0.0;
};

using MetricTable = std::vector<MetricRow>;

inline std::string metric_name(MetricKind k) {
  switch (k) {
    case MetricKind::Peak: return "peak";
    case MetricKind::Mean: return "mean";
    case MetricKind::Auc: return "auc";
    case MetricKind::Intervals: return "intervals";
  }
  return "?";
}

// Intervals queries produce three rows: `.count`, `.mean` and `.cv` of the
// inter-peak intervals inside the window.
inline MetricTable summarize(const TraceLog& trace, std::span<const MetricQuery> queries) {
  MetricTable table;
  for (const auto& q : queries) {
    const auto id = trace.find(q.neuron);
    if (!id) throw Error("summary refers to unknown neuron '" + q.neuron + "'");
    if (!(q.start < q.end) || q.end > trace.steps())
      throw Error("summary window " + std::to_string(q.start) + ".." + std::to_string(q.end) +
                  " is outside the trace (" + std::to_string(trace.steps()) + " steps)");
    const auto all = trace.series(*id);
    const std::span<const double> w(all.data() + q.start, q.end - q.start);
    const std::string label = q.label.empty()
                                  ? metric_name(q.kind) + ":" + q.neuron + ":" +
                                        std::to_string(q.start) + ".." + std::to_string(q.end)
                                  : q.label;
    switch (q.kind) {
      case MetricKind::Peak: table.push_back({label, *std::max_element(w.begin(), w.end())}); break;
      case MetricKind::Mean: table.push_back({label, mean(w)}); break;
      case MetricKind::Auc: {
        double s = 0.0;
        for (double v : w) s += v;
        table.push_back({label, s});
        break;
      }
      case MetricKind::Intervals: {
        const auto iv = intervals(find_peaks(w));
        table.push_back({label + ".count", static_cast<double>(iv.size())});
        table.push_back({label + ".mean", mean(iv)});
        table.push_back({label + ".cv", coefficient_of_variation(iv)});
        break;
      }
    }
  }
  return table;
}

inline std::string summary_csv(const MetricTable& table) {
  std::string out = "metric,value\n";
  for (const auto& r : table) out += r.label + "," + format_double(r.value) + "\n";
  return out;
}

}  // namespace ortus
