#include <gtest/gtest.h>

#include <vector>

#include "ortus/ortus.hpp"
#include "support.hpp"

using namespace ortus;

namespace {

Connectome gas_only() {
  return Connectome({{0, "sCO2", Layer::Sensory, 0.05, Affect::Neutral, {}},
                     {1, "sO2", Layer::Sensory, 0.05, Affect::Neutral, {}},
                     {2, "LUNG", Layer::Muscle, 0.05, Affect::Neutral, {}}},
                    {}, {});
}

Connectome shipped() {
  return build(parse_source(read_text(testkit::data_path("ortus.ort")), {}), {});
}

RunResult run_text(const Connectome& net, const std::string& text, Config cfg = {}) {
  return run(net, parse_protocol(text), cfg);
}

}  // namespace

TEST(Physiology, MetabolismAlone) {
  const PhysioConfig cfg;
  const auto d = metabolic_step(cfg);
  EXPECT_EQ(d.co2, 0.01);
  EXPECT_EQ(d.o2, -0.01);
}

TEST(Physiology, LungExchangeExamples) {
  const PhysioConfig cfg;
  const auto d = lung_exchange(0.8, cfg);
  EXPECT_NEAR(d.co2, -0.096, 1e-15);
  EXPECT_NEAR(d.o2, 0.096, 1e-15);
  const auto idle = lung_exchange(0.0, cfg);
  EXPECT_EQ(idle.co2, 0.0);
  EXPECT_EQ(idle.o2, 0.0);
  const auto at_threshold = lung_exchange(cfg.lung_threshold, cfg);
  EXPECT_EQ(at_threshold.co2, 0.0);
  const auto blocked = lung_exchange(0.8, cfg, {true, true});
  EXPECT_EQ(blocked.co2, 0.0);
  EXPECT_EQ(blocked.o2, 0.0);
  const auto half = lung_exchange(0.8, cfg, {true, false});
  EXPECT_EQ(half.co2, 0.0);
  EXPECT_NEAR(half.o2, 0.096, 1e-15);
}

TEST(Physiology, CarbonDioxideRisesWithoutBreathing) {
  const auto net = gas_only();
  const auto ids = bind_physiology(net);
  const PhysioConfig cfg;
  auto s = initial_state(net);
  double prev = s.activation[ids.co2];
  for (int m = 0; m < 100; ++m) {
    auto ext = ExternalInputs::none(net.size());
    physiology_inputs(s, ids, cfg, {}, ext);
    step(s, net, ext, {});
    if (m < 10) {
      EXPECT_GT(s.activation[ids.co2], prev) << "step " << m;
      EXPECT_LT(s.activation[ids.o2], 0.0);
    }
    prev = s.activation[ids.co2];
  }
  // Decay balances production at production / C_D.
  EXPECT_NEAR(s.activation[ids.co2], 0.05, 1e-9);
  EXPECT_NEAR(s.activation[ids.o2], -0.05, 1e-9);
}

TEST(Physiology, LungPullsGasesBack) {
  const auto net = gas_only();
  const auto ids = bind_physiology(net);
  auto s = initial_state(net);
  s.activation[ids.lung] = 0.8;
  auto ext = ExternalInputs::none(net.size());
  const auto d = physiology_inputs(s, ids, {}, {}, ext);
  EXPECT_NEAR(d.co2, 0.01 - 0.096, 1e-15);
  EXPECT_NEAR(ext.injected[ids.co2], d.co2, 0.0);
  EXPECT_NEAR(ext.injected[ids.o2], -0.01 + 0.096, 1e-15);
  EXPECT_EQ(ext.injected[ids.lung], 0.0);
}

TEST(Physiology, BindingNeedsEveryRole) {
  const auto net = gas_only();
  EXPECT_NO_THROW(bind_physiology(net));
  EXPECT_THROW(bind_physiology(net, {"CO2", "sO2", "LUNG"}), ConfigError);
  EXPECT_THROW(bind_physiology(net, {"sCO2", "sO2", "Lungs"}), ConfigError);
  const auto ids = bind_physiology(net, {"sO2", "sCO2", "LUNG"});
  EXPECT_EQ(ids.co2, 1u);
  EXPECT_EQ(ids.o2, 0u);
}

TEST(Physiology, ConfigValidation) {
  PhysioConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.exchange_gain = 0.005;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.co2_production = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Physiology, RespirationBlockDrivesFear) {
  const auto net = shipped();
  const auto r = run_text(net, "steps 400\nat 200..300 block respiration\n");
  const auto co2 = r.trace.series("sCO2");
  const auto fear = r.trace.series("eFEAR");
  for (std::size_t m = 201; m < 300; ++m) ASSERT_GE(co2[m], co2[m - 1]) << "step " << m;
  const double before = mean(std::span(fear).subspan(100, 100));
  const double during = mean(std::span(fear).subspan(200, 100));
  EXPECT_GT(during, before);
  EXPECT_GT(*std::max_element(co2.begin() + 200, co2.begin() + 300),
            *std::max_element(co2.begin(), co2.begin() + 200));
}

TEST(Physiology, FreeRunOscillates) {
  const auto net = shipped();
  const auto r = run(net, load_protocol(testkit::data_path("free_run.protocol"), net), {});
  const auto co2 = r.trace.series("sCO2");
  const auto iv = intervals(find_peaks(co2));
  EXPECT_GE(iv.size() + 1, 3u);
  EXPECT_LT(coefficient_of_variation(iv), 0.2);
  EXPECT_LT(correlation(co2, r.trace.series("sO2")), -0.5);
}

TEST(Physiology, DisabledHarnessPhysiologyLeavesGasesAlone) {
  const auto net = shipped();
  Config cfg;
  cfg.harness.physiology = false;
  const auto r = run_text(net, "steps 50\n", cfg);
  for (double v : r.trace.series("sCO2")) ASSERT_EQ(v, 0.0);
}
