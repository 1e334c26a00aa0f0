#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "ortus/plasticity.hpp"
#include "support.hpp"

using namespace ortus;

namespace {

History history_of(const std::vector<double>& newest_first) {
  History h;
  for (auto it = newest_first.rbegin(); it != newest_first.rend(); ++it) h.push(*it);
  return h;
}

std::vector<double> constant(double v, std::size_t n = kHistoryLength) {
  return std::vector<double>(n, v);
}

std::vector<double> alternating(double v, std::size_t n = kHistoryLength) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = k % 2 ? -v : v;
  return out;
}

SynapseSignals signals(const std::vector<double>& post, const std::vector<double>& pre) {
  return synapse_signals(history_of(post), history_of(pre), PlasticityConfig{});
}

// pre -> post with the given mutability; histories filled newest first.
struct Pair {
  Connectome net;
  SimState state;

  Pair(double mutability, const std::vector<double>& pre, const std::vector<double>& post)
      : net({{0, "pre", Layer::PlainInterneuron, 0.05, Affect::Neutral, {}},
             {1, "post", Layer::PlainInterneuron, 0.05, Affect::Neutral, {}}},
            {{0, 1, 0.5, 1.0, mutability, false}}, {}),
        state(initial_state(net)) {
    state.history = {history_of(pre), history_of(post)};
    state.activation = {pre.front(), post.front()};
  }
};

}  // namespace

TEST(Xcorr, IdenticalConstantVectors) {
  const auto h = constant(0.5);
  EXPECT_NEAR(lagged_xcorr(h, h, 1), 1.0, 1e-15);
}

TEST(Xcorr, AntiParallel) {
  EXPECT_NEAR(lagged_xcorr(constant(1.0), constant(-1.0), 2), -1.0, 1e-15);
}

TEST(Xcorr, ZeroNormGuard) {
  EXPECT_EQ(lagged_xcorr(constant(0.5), constant(0.0), 1), 0.0);
  EXPECT_EQ(lagged_xcorr(constant(0.0), constant(0.5), 1), 0.0);
}

TEST(Xcorr, UsesLaggedPartnerWindow) {
  // Partner leads by exactly two steps: only lag 2 lines up.
  const std::vector<double> post{1, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<double> pre{0, 0, 1, 0, 0, 0, 0, 0};
  EXPECT_NEAR(lagged_xcorr(post, pre, 2), 1.0, 1e-15);
  EXPECT_EQ(lagged_xcorr(post, pre, 1), 0.0);
}

TEST(Xcorr, NeedsEnoughHistory) {
  EXPECT_THROW(lagged_xcorr(constant(1, 4), constant(1, 4), 1), InsufficientHistory);
  EXPECT_NO_THROW(lagged_xcorr(constant(1, 4), constant(1, 5), 1));
}

TEST(Slope, Examples) {
  EXPECT_EQ(slope(constant(0.4), 0), 0.0);
  EXPECT_NEAR(slope(std::vector<double>{0.3, 0.2, 0.1}, 0), 0.1, 1e-15);
  EXPECT_NEAR(slope(std::vector<double>{0.0, 0.5, 1.0}, 0), -0.5, 1e-15);
  EXPECT_NEAR(slope(std::vector<double>{9, 0.3, 0.2, 0.1}, 1), 0.1, 1e-15);
  EXPECT_THROW(slope(std::vector<double>{0.3, 0.2}, 0), InsufficientHistory);
}

TEST(PlasticityOracle, RandomHistoriesMatchBruteForce) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto post = testkit::random_history(rng, kHistoryLength);
    const auto pre = testkit::random_history(rng, kHistoryLength);
    for (std::size_t lag = 1; lag <= 4; ++lag)
      ASSERT_NEAR(lagged_xcorr(post, pre, lag), testkit::oracle_xcorr(post, pre, lag, 4), 1e-9);
    for (std::size_t t = 0; t + 2 < kHistoryLength; ++t)
      ASSERT_NEAR(slope(pre, t), testkit::oracle_slope(pre, t, 2), 1e-9);
  }
}

TEST(Signals, ConstantSynchronizedPair) {
  const auto sig = signals(constant(0.5), constant(0.5));
  EXPECT_NEAR(sig.xcorr_sum, 4.0, 1e-9);
  EXPECT_EQ(sig.slope_abs_sum, 0.0);
}

TEST(Classify, RapidStrengthenForConstantSupraThresholdPair) {
  const auto sig = signals(constant(0.5), constant(0.5));
  EXPECT_EQ(classify(sig, 0.5, 0.5, {}), Classification::RapidStrengthen);
}

TEST(Classify, SlowWeakenForOrthogonalPair) {
  const auto sig = signals(alternating(0.5), constant(0.5));
  EXPECT_NEAR(sig.xcorr_sum, 0.0, 1e-12);
  EXPECT_EQ(classify(sig, 0.5, 0.5, {}), Classification::SlowWeaken);
}

TEST(Classify, SlowStrengthenWhenCorrelatedButMoving) {
  // Steady ramp: windows stay nearly parallel but the slope is too large for
  // the rapid rule.
  std::vector<double> ramp(kHistoryLength);
  for (std::size_t k = 0; k < ramp.size(); ++k) ramp[k] = 0.9 - 0.05 * static_cast<double>(k);
  const auto sig = signals(ramp, ramp);
  EXPECT_GT(sig.xcorr_sum, 3.5);
  EXPECT_GT(sig.slope_abs_sum, 0.02);
  EXPECT_EQ(classify(sig, 0.9, 0.9, {}), Classification::SlowStrengthen);
}

TEST(Classify, NothingBelowActivityThreshold) {
  const auto sig = signals(constant(0.5), constant(0.5));
  EXPECT_EQ(classify(sig, 0.05, 0.5, {}), Classification::None);
  EXPECT_EQ(classify(sig, 0.5, 0.01, {}), Classification::None);
  const auto orth = signals(alternating(0.5), constant(0.5));
  EXPECT_EQ(classify(orth, 0.0, 0.0, {}), Classification::None);
}

TEST(Classify, MiddleBandIsNone) {
  SynapseSignals sig;
  sig.xcorr_sum = 2.0;
  EXPECT_EQ(classify(sig, 0.5, 0.5, {}), Classification::None);
}

TEST(UpdatedWeight, Examples) {
  const PlasticityConfig cfg;
  for (auto c : {Classification::RapidStrengthen, Classification::SlowStrengthen,
                 Classification::SlowWeaken})
    EXPECT_EQ(updated_weight(0.4, 0.0, c, cfg), 0.4);
  EXPECT_NEAR(updated_weight(0.05, 0.9, Classification::RapidStrengthen, cfg) - 0.05, 0.009, 1e-15);
  EXPECT_NEAR(updated_weight(0.5, 1.0, Classification::SlowStrengthen, cfg), 0.501, 1e-15);
  EXPECT_NEAR(updated_weight(0.5, 0.5, Classification::SlowWeaken, cfg), 0.4995, 1e-15);
  EXPECT_EQ(updated_weight(1.0, 0.9, Classification::RapidStrengthen, cfg), 1.0);
  EXPECT_EQ(updated_weight(0.0, 0.9, Classification::SlowWeaken, cfg), 0.0);
  EXPECT_EQ(updated_weight(0.3, 0.9, Classification::None, cfg), 0.3);
}

TEST(ApplyUpdates, RapidStrengthening) {
  Pair p(0.9, constant(0.5), constant(0.5));
  std::vector<Classification> cls;
  const auto counts = apply_updates(p.state, p.net, {}, &cls);
  EXPECT_EQ(counts.rapid, 1u);
  EXPECT_EQ(cls[0], Classification::RapidStrengthen);
  EXPECT_NEAR(p.state.weights[0], 0.509, 1e-15);
}

TEST(ApplyUpdates, ImmutableSynapseNeverChanges) {
  Pair p(0.0, constant(0.5), constant(0.5));
  apply_updates(p.state, p.net, {});
  EXPECT_EQ(p.state.weights[0], 0.5);
}

TEST(ApplyUpdates, SubThresholdPairIsInert) {
  Pair p(0.9, constant(0.04), constant(0.04));
  const auto counts = apply_updates(p.state, p.net, {});
  EXPECT_EQ(counts.rapid + counts.slow_strengthen + counts.slow_weaken, 0u);
  EXPECT_EQ(p.state.weights[0], 0.5);
}

TEST(ApplyUpdates, InertDuringWarmUp) {
  const Connectome net({{0, "pre", Layer::PlainInterneuron, 0.05, Affect::Neutral, {}},
                        {1, "post", Layer::PlainInterneuron, 0.05, Affect::Neutral, {}}},
                       {{0, 1, 0.5, 1.0, 1.0, false}}, {});
  auto s = initial_state(net);
  auto ext = ExternalInputs::none(2);
  for (std::size_t m = 0; m < kHistoryLength; ++m) {
    ext.clamp = {0.5, 0.5};
    step(s, net, ext, {});
    const auto counts = apply_updates(s, net, {});
    if (m + 1 < kHistoryLength) {
      EXPECT_EQ(counts.rapid, 0u) << "step " << m;
      EXPECT_EQ(s.weights[0], 0.5);
    } else {
      EXPECT_EQ(counts.rapid, 1u);
    }
  }
}

TEST(PlasticityProperty, XcorrSumBoundedAndRegionsDisjoint) {
  std::mt19937_64 rng(99);
  const PlasticityConfig cfg;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto sig = signals(testkit::random_history(rng, kHistoryLength),
                             testkit::random_history(rng, kHistoryLength));
    ASSERT_GE(sig.xcorr_sum, -4.0);
    ASSERT_LE(sig.xcorr_sum, 4.0);
    for (std::size_t k = 0; k < 4; ++k) {
      ASSERT_GE(sig.xcorr[k], -1.0);
      ASSERT_LE(sig.xcorr[k], 1.0);
    }
    const bool rapid = sig.xcorr_sum >= cfg.rapid_xcorr_min && sig.slope_abs_sum <= cfg.rapid_slope_max;
    const bool weaken = sig.xcorr_sum < cfg.weaken_xcorr_max;
    const bool strengthen = sig.xcorr_sum > cfg.strengthen_xcorr_min;
    ASSERT_FALSE(weaken && (rapid || strengthen));
    const auto c = classify(sig, 0.5, 0.5, cfg);
    if (rapid) ASSERT_EQ(c, Classification::RapidStrengthen);
    else if (weaken) ASSERT_EQ(c, Classification::SlowWeaken);
    else if (strengthen) ASSERT_EQ(c, Classification::SlowStrengthen);
    else ASSERT_EQ(c, Classification::None);
  }
}

TEST(PlasticityProperty, MonotoneBoundedTrajectories) {
  const PlasticityConfig cfg;
  for (auto c : {Classification::RapidStrengthen, Classification::SlowStrengthen,
                 Classification::SlowWeaken}) {
    double w = 0.5;
    for (int k = 0; k < 2000; ++k) {
      const double next = updated_weight(w, 0.7, c, cfg);
      if (c == Classification::SlowWeaken) ASSERT_LE(next, w);
      else ASSERT_GE(next, w);
      ASSERT_GE(next, 0.0);
      ASSERT_LE(next, 1.0);
      w = next;
    }
    EXPECT_EQ(w, c == Classification::SlowWeaken ? 0.0 : 1.0);
  }
}

TEST(PlasticityConfig, Invariants) {
  PlasticityConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.strengthen_xcorr_min = 3.95;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_lag = 5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.rapid_xcorr_min = 4.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
