#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ncs/errors.hpp"
#include "ncs/netproto/protocol.hpp"
#include "oracles.hpp"

using namespace ncs;
using namespace ncs::netproto;

namespace {

NetworkConfiguration all_at(int nodes, int m) { return {std::vector<int>(nodes, m)}; }

}  // namespace

TEST(HopSuccess, SingleAttemptIsLinkProbability) {
  for (double p : {0.01, 0.3, 0.97, 1.0}) EXPECT_EQ(hop_success(p, 1), p);
}

TEST(HopSuccess, TwoAttemptsAtHalf) { EXPECT_DOUBLE_EQ(hop_success(0.5, 2), 0.75); }

TEST(HopSuccess, AgreesWithAttemptSimulation) {
  oracle::Rng rng(11);
  const std::int64_t n = 1'000'000;
  const auto ok = oracle::simulate_packets(rng, {0.3}, {4}, n);
  EXPECT_TRUE(oracle::within_3_sigma(ok, n, hop_success(0.3, 4)))
      << ok << " vs " << n * hop_success(0.3, 4);
}

TEST(HopSuccess, NondecreasingInLevelAndLink) {
  oracle::Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const double p = oracle::uniform(rng, 1e-3, 1.0);
    const double dp = oracle::uniform(rng, 0.0, 1.0 - p);
    for (int m = 1; m < 8; ++m) {
      EXPECT_LE(hop_success(p, m), hop_success(p, m + 1));
      EXPECT_LE(hop_success(p, m), hop_success(p + dp, m));
    }
  }
}

TEST(HopSuccess, RejectsBadArguments) {
  EXPECT_THROW(hop_success(0.5, 0), InvalidArgument);
  EXPECT_THROW(hop_success(0.5, -1), InvalidArgument);
  EXPECT_THROW(hop_success(0.0, 1), InvalidArgument);
  EXPECT_THROW(hop_success(1.5, 1), InvalidArgument);
  EXPECT_THROW(hop_success(std::nan(""), 1), InvalidArgument);
}

TEST(ExpectedAttempts, TruncatedGeometricMean) {
  EXPECT_DOUBLE_EQ(expected_attempts(1.0, 3), 1.0);
  EXPECT_DOUBLE_EQ(expected_attempts(0.5, 1), 1.0);
  // 1 + 0.5 = 1.5 attempts on average with two tries.
  EXPECT_DOUBLE_EQ(expected_attempts(0.5, 2), 1.5);
  for (int m = 1; m < 10; ++m) EXPECT_LE(expected_attempts(0.05, m), m);
}

TEST(EndToEnd, SingleHopEqualsHopSuccess) {
  const auto chain = uniform_chain(1, 0.4);
  EXPECT_DOUBLE_EQ(end_to_end_success(chain, all_at(1, 3)), hop_success(0.4, 3));
}

TEST(EndToEnd, TwoHopsProduct) {
  const auto chain = uniform_chain(2, 0.5);
  EXPECT_DOUBLE_EQ(end_to_end_success(chain, all_at(2, 2)), 0.5625);
}

TEST(EndToEnd, SixteenHopsAgreeWithPacketSimulation) {
  const auto chain = uniform_chain(16, 0.9);
  NetworkConfiguration cfg;
  std::vector<double> p;
  for (int n = 0; n < 16; ++n) {
    cfg.mntp.push_back(1 + n % 3);
    p.push_back(0.9);
  }
  oracle::Rng rng(17);
  const std::int64_t n = 1'000'000;
  const auto ok = oracle::simulate_packets(rng, p, cfg.mntp, n);
  const double q = end_to_end_success(chain, cfg);
  EXPECT_TRUE(oracle::within_3_sigma(ok, n, q)) << ok << " vs " << n * q;
}

TEST(EndToEnd, MissingAssignmentRejected) {
  const auto chain = uniform_chain(3, 0.9);
  EXPECT_THROW(end_to_end_success(chain, all_at(2, 1)), InvalidArgument);
}

TEST(EndToEnd, RaisingOneLevelNeverLowersQ) {
  // Exhaustive over a 4-node network with three levels each.
  const auto chain = uniform_chain(4, 0.6);
  const auto policy = MntpPolicy::uniform(4, {1, 2, 3}, 0.5);
  for (std::uint64_t id = 0; id < configuration_count(policy); ++id) {
    const auto cfg = configuration_from_id(policy, id);
    const double q = end_to_end_success(chain, cfg);
    for (int n = 0; n < 4; ++n) {
      if (cfg.mntp[n] == 3) continue;
      auto up = cfg;
      ++up.mntp[n];
      EXPECT_GE(end_to_end_success(chain, up), q);
    }
  }
}

TEST(EndToEnd, RaisingOneLevelSampledOnLargeNetwork) {
  oracle::Rng rng(5);
  std::vector<HopLink> chain;
  for (int n = 0; n < 16; ++n) chain.push_back({oracle::uniform(rng, 0.5, 1.0), n});
  for (int t = 0; t < 500; ++t) {
    NetworkConfiguration cfg;
    for (int n = 0; n < 16; ++n) cfg.mntp.push_back(1 + static_cast<int>(rng() % 4));
    const double q = end_to_end_success(chain, cfg);
    auto up = cfg;
    ++up.mntp[rng() % 16];
    EXPECT_GE(end_to_end_success(chain, up), q);
  }
}

TEST(Census, SixteenNodesTwoLevels) {
  const auto chain = uniform_chain(16, 0.97);
  const auto policy = MntpPolicy::uniform(16, {1, 2}, 0.5);
  std::uint64_t seen = 0, expected_id = 0;
  double lo = 1.0, hi = 0.0;
  const auto summary = enumerate_configurations(
      chain, policy, [&](std::uint64_t id, const NetworkConfiguration& cfg, double q) {
        EXPECT_EQ(id, expected_id++);
        EXPECT_EQ(cfg.mntp.size(), 16u);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        ++seen;
      });
  EXPECT_EQ(summary.count, 65536u);
  EXPECT_EQ(seen, 65536u);
  EXPECT_EQ(summary.q_min, lo);
  EXPECT_EQ(summary.q_max, hi);
  EXPECT_DOUBLE_EQ(summary.q_min, end_to_end_success(chain, all_at(16, 1)));
  EXPECT_DOUBLE_EQ(summary.q_max, end_to_end_success(chain, all_at(16, 2)));
}

TEST(Census, OneNodeOneLevel) {
  const auto chain = uniform_chain(1, 0.8);
  const auto policy = MntpPolicy::uniform(1, {2}, 0.5);
  const auto summary = enumerate_configurations(chain, policy);
  EXPECT_EQ(summary.count, 1u);
  EXPECT_EQ(summary.q_min, summary.q_max);
  EXPECT_DOUBLE_EQ(summary.q_min, hop_success(0.8, 2));
}

TEST(Census, EveryValueWithinExtremes) {
  oracle::Rng rng(8);
  std::vector<HopLink> chain;
  for (int n = 0; n < 6; ++n) chain.push_back({oracle::uniform(rng, 0.3, 1.0), n});
  MntpPolicy policy;
  for (int n = 0; n < 6; ++n) {
    policy.levels.push_back({1, 2 + n % 2, 5});
    policy.thresholds.push_back(0.5);
  }
  const auto qs = configuration_probabilities(chain, policy);
  const auto summary = enumerate_configurations(chain, policy);
  ASSERT_EQ(qs.size(), summary.count);
  EXPECT_EQ(qs.size(), 729u);
  for (double q : qs) {
    EXPECT_GE(q, summary.q_min);
    EXPECT_LE(q, summary.q_max);
    EXPECT_GT(q, 0.0);
  }
  NetworkConfiguration lo, hi;
  for (int n = 0; n < 6; ++n) {
    lo.mntp.push_back(policy.levels[n].front());
    hi.mntp.push_back(policy.levels[n].back());
  }
  EXPECT_DOUBLE_EQ(summary.q_min, end_to_end_success(chain, lo));
  EXPECT_DOUBLE_EQ(summary.q_max, end_to_end_success(chain, hi));
}

TEST(Census, IdDecodingNodeZeroFastest) {
  const auto policy = MntpPolicy::uniform(3, {1, 4}, 0.5);
  EXPECT_EQ(configuration_from_id(policy, 0).mntp, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(configuration_from_id(policy, 1).mntp, (std::vector<int>{4, 1, 1}));
  EXPECT_EQ(configuration_from_id(policy, 6).mntp, (std::vector<int>{1, 4, 4}));
  EXPECT_THROW(configuration_from_id(policy, 8), InvalidArgument);
}

TEST(Census, OverflowGuard) {
  const auto policy = MntpPolicy::uniform(25, {1, 2}, 0.5);
  EXPECT_THROW(configuration_count(policy), InvalidArgument);
  EXPECT_EQ(configuration_count(MntpPolicy::uniform(24, {1, 2}, 0.5)), kMaxConfigurations);
}

TEST(Policy, ValidationRejectsBadLevels) {
  EXPECT_THROW(MntpPolicy::uniform(2, {}, 0.5).validate(), InvalidArgument);
  EXPECT_THROW(MntpPolicy::uniform(2, {0, 1}, 0.5).validate(), InvalidArgument);
  EXPECT_THROW(MntpPolicy::uniform(2, {2, 1}, 0.5).validate(), InvalidArgument);
  EXPECT_NO_THROW(MntpPolicy::uniform(2, {3}, 0.5).validate());
}

TEST(EnergyPolicy, FullBatteriesPickHighestLevel) {
  const auto chain = uniform_chain(4, 0.9);
  const auto policy = MntpPolicy::uniform(4, {1, 3}, 0.5);
  const auto step = energy_policy_step({{1.0, 1.0, 1.0, 1.0}, 0.01}, policy, chain);
  EXPECT_EQ(step.config.mntp, (std::vector<int>(4, 3)));
}

TEST(EnergyPolicy, EmptyBatteriesPickLowestLevel) {
  const auto chain = uniform_chain(4, 0.9);
  const auto policy = MntpPolicy::uniform(4, {1, 3}, 0.5);
  const auto step = energy_policy_step({{0.0, 0.0, 0.0, 0.0}, 0.01}, policy, chain);
  EXPECT_EQ(step.config.mntp, (std::vector<int>(4, 1)));
  for (double b : step.next.battery) EXPECT_EQ(b, 0.0);
}

TEST(EnergyPolicy, MixedBatteriesMatchElementwiseRule) {
  oracle::Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const int nodes = 1 + static_cast<int>(rng() % 10);
    std::vector<HopLink> chain;
    MntpPolicy policy;
    EnergyState state;
    state.cost_per_attempt = oracle::uniform(rng, 1e-3, 0.2);
    for (int n = 0; n < nodes; ++n) {
      chain.push_back({oracle::uniform(rng, 0.2, 1.0), n});
      policy.levels.push_back({1, 2 + static_cast<int>(rng() % 3)});
      policy.thresholds.push_back(oracle::uniform(rng, 0.1, 0.9));
      state.battery.push_back(oracle::uniform(rng, 0.0, 1.0));
    }
    const auto step = energy_policy_step(state, policy, chain);
    for (int n = 0; n < nodes; ++n) {
      const int want = state.battery[n] >= policy.thresholds[n] ? policy.levels[n].back()
                                                                : policy.levels[n].front();
      EXPECT_EQ(step.config.mntp[n], want);
      const double drain = state.cost_per_attempt * expected_attempts(chain[n].p_link, want);
      EXPECT_DOUBLE_EQ(step.next.battery[n], std::max(0.0, state.battery[n] - drain));
      EXPECT_LE(step.next.battery[n], state.battery[n]);
    }
  }
}

TEST(EnergyPolicy, BatteriesNeverIncreaseOverManySteps) {
  const auto chain = uniform_chain(8, 0.7);
  const auto policy = MntpPolicy::uniform(8, {1, 2, 4}, 0.4);
  EnergyState state{std::vector<double>(8, 1.0), 0.003};
  for (int k = 0; k < 1000; ++k) {
    const auto step = energy_policy_step(state, policy, chain);
    for (int n = 0; n < 8; ++n) {
      EXPECT_LE(step.next.battery[n], state.battery[n]);
      EXPECT_GE(step.next.battery[n], 0.0);
    }
    state = step.next;
  }
  for (double b : state.battery) EXPECT_EQ(b, 0.0);
}

TEST(EnergyPolicy, InvalidStateRejected) {
  EXPECT_THROW((EnergyState{{1.2}, 0.1}).validate(), InvalidArgument);
  EXPECT_THROW((EnergyState{{0.5}, 0.0}).validate(), InvalidArgument);
}

TEST(Polytope, DegenerateAtOne) {
  const auto poly = probability_interval_to_polytope({1.0, 1.0});
  for (const auto& v : poly.vertices()) {
    EXPECT_EQ(v(0, 0), 1.0);
    EXPECT_EQ(v(1, 0), 1.0);
    EXPECT_EQ(v(0, 1), 0.0);
    EXPECT_EQ(v(1, 1), 0.0);
  }
}

TEST(Polytope, VerticesAtEndpoints) {
  const auto poly = probability_interval_to_polytope({0.6, 1.0});
  ASSERT_EQ(poly.vertices().size(), 2u);
  const auto& a = poly.vertices()[0];
  const auto& b = poly.vertices()[1];
  for (int i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(a(i, mjls::kReceived), 0.6);
    EXPECT_DOUBLE_EQ(a(i, mjls::kLost), 0.4);
    EXPECT_DOUBLE_EQ(b(i, mjls::kReceived), 1.0);
    EXPECT_DOUBLE_EQ(b(i, mjls::kLost), 0.0);
  }
}

TEST(Polytope, ConvexCombinationsRowStochastic) {
  oracle::Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const double x = oracle::uniform(rng, 1e-3, 1.0);
    const double y = oracle::uniform(rng, 1e-3, 1.0);
    const auto poly = probability_interval_to_polytope({std::min(x, y), std::max(x, y)});
    const double a = oracle::uniform(rng, 0.0, 1.0);
    const double alpha[2] = {a, 1.0 - a};
    const auto g = poly.combine(alpha);
    for (int i = 0; i < 2; ++i) {
      EXPECT_GE(g(i, 0), 0.0);
      EXPECT_GE(g(i, 1), 0.0);
      EXPECT_NEAR(g(i, 0) + g(i, 1), 1.0, 1e-12);
      EXPECT_EQ(g(i, 0), g(0, 0));
    }
  }
}

TEST(Polytope, InvalidRangeRejected) {
  EXPECT_THROW(probability_interval_to_polytope({0.8, 0.6}), InvalidArgument);
  EXPECT_THROW(probability_interval_to_polytope({0.0, 0.6}), InvalidArgument);
  EXPECT_THROW(probability_interval_to_polytope({0.5, 1.1}), InvalidArgument);
}
