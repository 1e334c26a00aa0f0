// Command-line front end: validate, build, run, experiment, export.
//
// Exit codes: 0 ok, 1 domain error (bad spec, failed build, bad protocol),
// 2 usage or I/O error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ortus/ortus.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

// Bad settings on the command line are usage errors, unlike ConfigError
// raised while binding a network.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string ort;
  std::string protocol;
  std::string out = "out";
  std::string dot;
  std::string csv;
  std::vector<std::string> sets;
  unsigned threads = 1;
  bool no_plasticity = false;
};

ortus::Config make_config(const Options& o) {
  ortus::Config cfg;
  try {
    for (const auto& s : o.sets) ortus::apply_setting(cfg, s);
    cfg.sim.threads = o.threads;
    if (o.no_plasticity) cfg.harness.plasticity = false;
    cfg.validate();
  } catch (const ortus::ConfigError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

ortus::NetworkSpec load_spec(const Options& o, const ortus::Config& cfg) {
  return ortus::parse_source(ortus::read_text(o.ort), cfg.relationship);
}

ortus::Connectome load_connectome(const Options& o, const ortus::Config& cfg) {
  return ortus::build(load_spec(o, cfg), cfg.build);
}

int cmd_validate(const Options& o) {
  const auto cfg = make_config(o);
  const auto spec = load_spec(o, cfg);
  const auto diags = ortus::validate_spec(spec, cfg.build.sci_cap);
  for (const auto& d : diags) std::cout << o.ort << ":" << ortus::to_string(d) << "\n";
  std::size_t sensors = 0;
  for (const auto& e : spec.elements) sensors += e.kind == ortus::ElementKind::Sensory;
  std::cout << "elements=" << spec.elements.size()
            << " relationships=" << spec.relationships.size() << " sensors=" << sensors
            << " errors=" << std::count_if(diags.begin(), diags.end(),
                                           [](const auto& d) { return d.is_error(); })
            << "\n";
  return ortus::has_errors(diags) ? kDomainError : kOk;
}

void print_counts(const ortus::Connectome& net) {
  using ortus::Layer;
  std::cout << "neurons=" << net.size() << " SEI=" << net.layer_ids(Layer::SEI).size()
            << " SCI=" << net.layer_ids(Layer::SCI).size()
            << " EEI=" << net.layer_ids(Layer::EEI).size() << " chem=" << net.chem().size()
            << " gap=" << net.gap().size() << "\n";
}

int cmd_build(const Options& o) {
  const auto cfg = make_config(o);
  const auto net = load_connectome(o, cfg);
  ortus::write_connectome_csv(net, o.out);
  ortus::write_text(fs::path(o.out) / "config.resolved", ortus::resolved_config(cfg));
  print_counts(net);
  return kOk;
}

int cmd_export(const Options& o) {
  const auto cfg = make_config(o);
  const auto net = load_connectome(o, cfg);
  if (o.dot.empty() && o.csv.empty()) {
    std::cout << ortus::to_dot(net);
    return kOk;
  }
  if (o.dot == "-") std::cout << ortus::to_dot(net);
  else if (!o.dot.empty()) ortus::write_text(o.dot, ortus::to_dot(net));
  if (!o.csv.empty()) ortus::write_connectome_csv(net, o.csv);
  return kOk;
}

int cmd_run(const Options& o) {
  const auto cfg = make_config(o);
  const auto net = load_connectome(o, cfg);
  const auto protocol = ortus::load_protocol(o.protocol, net);
  const auto result = ortus::run(net, protocol, cfg);
  ortus::write_connectome_csv(net, o.out);
  ortus::write_trace_csv(result.trace, o.out);
  ortus::write_text(fs::path(o.out) / "config.resolved", ortus::resolved_config(cfg));
  std::cout << "steps=" << result.trace.steps() << " neurons=" << result.trace.neurons() << "\n";
  return kOk;
}

int cmd_experiment(const Options& o) {
  const auto cfg = make_config(o);
  const auto net = load_connectome(o, cfg);
  const auto protocol = ortus::load_protocol(o.protocol, net);
  const auto report = ortus::run_experiment(net, protocol, cfg);
  ortus::write_connectome_csv(net, o.out);
  ortus::write_experiment(report, o.out);
  ortus::write_text(fs::path(o.out) / "config.resolved", ortus::resolved_config(cfg));
  for (const auto& row : report.summary)
    std::cout << row.label << "=" << ortus::format_double(row.value) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ortus virtual organism simulator"};
  app.require_subcommand(1, 1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--set", o.sets, "Override a setting (key=value), repeatable");
    sub->add_option("--threads", o.threads, "Worker threads for the kernel")->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "Check an .ort file and print diagnostics");
  validate->add_option("ort", o.ort, "Network description")->required();
  common(validate);

  auto* build = app.add_subcommand("build", "Compile an .ort file and write connectome CSVs");
  build->add_option("ort", o.ort)->required();
  build->add_option("-o,--out", o.out, "Output directory");
  common(build);

  auto* run = app.add_subcommand("run", "Run one protocol and write its traces");
  run->add_option("ort", o.ort)->required();
  run->add_option("protocol", o.protocol)->required();
  run->add_option("-o,--out", o.out, "Output directory");
  run->add_flag("--no-plasticity", o.no_plasticity, "Disable learning");
  common(run);

  auto* experiment = app.add_subcommand(
      "experiment", "Run a conditioning protocol plus its never-conditioned control");
  experiment->add_option("ort", o.ort)->required();
  experiment->add_option("protocol", o.protocol)->required();
  experiment->add_option("-o,--out", o.out, "Output directory");
  experiment->add_flag("--no-plasticity", o.no_plasticity, "Disable learning in both runs");
  common(experiment);

  auto* exp = app.add_subcommand("export", "Export the compiled connectome");
  exp->add_option("ort", o.ort)->required();
  exp->add_option("--dot", o.dot, "Write Graphviz DOT to FILE ('-' for stdout)");
  exp->add_option("--csv", o.csv, "Write neurons/chem/gap CSVs into DIR");
  common(exp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*build) return cmd_build(o);
    if (*run) return cmd_run(o);
    if (*experiment) return cmd_experiment(o);
    if (*exp) return cmd_export(o);
  } catch (const ortus::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ortus::LexError& e) {
    std::cerr << o.ort << ":" << e.what() << "\n";
    return kDomainError;
  } catch (const ortus::ParseError& e) {
    std::cerr << o.ort << ":" << e.what() << "\n";
    return kDomainError;
  } catch (const ortus::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}
