#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ncs/mjls/markov.hpp"

namespace ncs::netproto {

/// One hop of the source-to-sink chain; `node` is the transmitting node.
struct HopLink {
  double p_link = 1.0;  ///< single-attempt success probability, in (0, 1]
  int node = 0;
};

/// Per-node MNTP level sets (strictly increasing, positive) and the battery
/// threshold above which a node uses its highest level.
struct MntpPolicy {
  std::vector<std::vector<int>> levels;
  std::vector<double> thresholds;

  /// Same level set and threshold for every node.
  static MntpPolicy uniform(int node_count, std::vector<int> level_set, double threshold);

  int node_count() const { return static_cast<int>(levels.size()); }
  void validate() const;
};

/// One MNTP value per node.
struct NetworkConfiguration {
  std::vector<int> mntp;
};

struct ProbabilityRange {
  double q_min = 1.0;
  double q_max = 1.0;
  void validate() const;
};

struct EnergyState {
  std::vector<double> battery;  ///< normalized level per node, in [0, 1]
  double cost_per_attempt = 0.0;
  void validate() const;
};

/// 1 - (1 - p_link)^m: at least one of m independent attempts succeeds.
double hop_success(double p_link, int m);

/// Product of hop successes along the chain.
double end_to_end_success(const std::vector<HopLink>& topology, const NetworkConfiguration& config);

/// Expected attempts per packet on one hop, (1 - (1 - p)^m) / p, capped at m.
double expected_attempts(double p_link, int m);

/// Largest enumeration the census accepts.
inline constexpr std::uint64_t kMaxConfigurations = std::uint64_t{1} << 24;

/// prod_n |levels_n|; throws InvalidArgument above kMaxConfigurations.
std::uint64_t configuration_count(const MntpPolicy& policy);

/// Mixed-radix decoding, node 0 is the least significant digit.
NetworkConfiguration configuration_from_id(const MntpPolicy& policy, std::uint64_t id);

struct CensusSummary {
  std::uint64_t count = 0;
  double q_min = 1.0;
  double q_max = 0.0;
};

using ConfigurationSink =
    std::function<void(std::uint64_t id, const NetworkConfiguration& config, double q)>;

/// Streams every configuration in id order and returns count and extremes.
CensusSummary enumerate_configurations(const std::vector<HopLink>& topology,
                                       const MntpPolicy& policy, const ConfigurationSink& sink = {});

/// The full multiset of end-to-end probabilities, in id order.
std::vector<double> configuration_probabilities(const std::vector<HopLink>& topology,
                                                const MntpPolicy& policy);

/// Chain of `node_count` hops, node n transmitting hop n, all with p_link.
std::vector<HopLink> uniform_chain(int node_count, double p_link);

struct PolicyStep {
  NetworkConfiguration config;
  EnergyState next;
};

/// Threshold rule: a node picks its highest level when battery >= threshold,
/// its lowest otherwise, then pays cost_per_attempt * expected attempts on
/// the hop it transmits. Batteries saturate at 0.
PolicyStep energy_policy_step(const EnergyState& state, const MntpPolicy& policy,
                              const std::vector<HopLink>& topology);

/// Two Bernoulli vertices with rows [q, 1 - q] at q_min and q_max
/// (mode 1 = received, mode 2 = lost).
mjls::TransitionPolytope probability_interval_to_polytope(const ProbabilityRange& range);

}  // namespace ncs::netproto
