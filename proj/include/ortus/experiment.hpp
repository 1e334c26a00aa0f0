#pragma once

// Classical-conditioning experiment built on the protocol runner.
//
// Conditioning bursts are the inject events that overlap a respiration block;
// probes are inject events that overlap none. The control run replays only
// the probes on a fresh network so the probe response can be compared with
// and without prior conditioning.

#include <algorithm>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ortus/config.hpp"
#include "ortus/connectome.hpp"
#include "ortus/protocol.hpp"

namespace ortus {

struct Window {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
};

struct ConditioningLayout {
  std::vector<Window> bursts;
  std::vector<Window> probes;
};

inline ConditioningLayout conditioning_layout(const Protocol& p) {
  ConditioningLayout out;
  for (const auto& e : p.events) {
    if (!std::holds_alternative<Inject>(e.action)) continue;
    const bool paired = std::any_of(p.events.begin(), p.events.end(), [&](const Event& b) {
      return std::holds_alternative<RespirationBlock>(b.action) && b.start < e.end &&
             e.start < b.end;
    });
    (paired ? out.bursts : out.probes).push_back({e.start, e.end});
  }
  return out;
}

// Same length and physiology mapping, probe injections only.
inline Protocol control_protocol(const Protocol& p) {
  Protocol c;
  c.total_steps = p.total_steps;
  c.physio_names = p.physio_names;
  const auto layout = conditioning_layout(p);
  for (const auto& e : p.events) {
    if (!std::holds_alternative<Inject>(e.action)) continue;
    for (const auto& w : layout.probes)
      if (w.start == e.start && w.end == e.end) c.events.push_back(e);
  }
  return c;
}

struct ExperimentReport {
  RunResult conditioned;
  RunResult control;
  ConditioningLayout layout;
  std::vector<double> burst_peaks;
  double probe_peak = 0.0;
  double control_probe_peak = 0.0;
  MetricTable summary;

  double probe_ratio() const {
    return control_probe_peak > 0.0 ? probe_peak / control_probe_peak : 0.0;
  }
};

inline ExperimentReport run_experiment(const Connectome& net, const Protocol& protocol,
                                       const Config& cfg, const std::string& fear = "eFEAR") {
  ExperimentReport r;
  r.layout = conditioning_layout(protocol);
  r.conditioned = run(net, protocol, cfg);
  r.control = run(net, control_protocol(protocol), cfg);

  auto peak = [&](const TraceLog& t, const Window& w, const std::string& label) {
    MetricQuery q{MetricKind::Peak, fear, w.start, w.end, label};
    const auto row = summarize(t, std::span(&q, 1)).front();
    r.summary.push_back(row);
    return row.value;
  };
  for (std::size_t k = 0; k < r.layout.bursts.size(); ++k)
    r.burst_peaks.push_back(peak(r.conditioned.trace, r.layout.bursts[k],
                                 "burst" + std::to_string(k + 1) + "." + fear + ".peak"));
  if (!r.layout.probes.empty()) {
    const auto& probe = r.layout.probes.back();
    r.probe_peak = peak(r.conditioned.trace, probe, "probe." + fear + ".peak");
    r.control_probe_peak = peak(r.control.trace, probe, "control.probe." + fear + ".peak");
    r.summary.push_back({"probe_" + fear + "_peak_ratio", r.probe_ratio()});
  }
  if (r.burst_peaks.size() >= 2 && r.burst_peaks.front() > 0.0)
    r.summary.push_back({"burst_peak_growth", r.burst_peaks.back() / r.burst_peaks.front()});
  return r;
}

inline void write_experiment(const ExperimentReport& r, const std::filesystem::path& dir) {
  write_trace_csv(r.conditioned.trace, dir);
  write_trace_csv(r.control.trace, dir / "control");
  write_text(dir / "summary.csv", summary_csv(r.summary));
}

}  // namespace ortus
