#include "ncs/netproto/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "ncs/errors.hpp"

namespace ncs::netproto {

MntpPolicy MntpPolicy::uniform(int node_count, std::vector<int> level_set, double threshold) {
  if (node_count < 1) throw InvalidArgument("MntpPolicy: node_count must be >= 1");
  MntpPolicy p;
  p.levels.assign(static_cast<std::size_t>(node_count), std::move(level_set));
  p.thresholds.assign(static_cast<std::size_t>(node_count), threshold);
  p.validate();
  return p;
}

void MntpPolicy::validate() const {
  if (levels.empty()) throw InvalidArgument("MntpPolicy: no nodes");
  if (thresholds.size() != levels.size()) {
    throw DimensionError("MntpPolicy: one threshold per node required");
  }
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const auto& set = levels[n];
    if (set.empty()) throw InvalidArgument("MntpPolicy: node " + std::to_string(n) + " has no levels");
    for (std::size_t k = 0; k < set.size(); ++k) {
      if (set[k] < 1) throw InvalidArgument("MntpPolicy: MNTP levels must be >= 1");
      if (k > 0 && set[k] <= set[k - 1]) {
        throw InvalidArgument("MntpPolicy: level set must be strictly increasing");
      }
    }
    if (!std::isfinite(thresholds[n])) throw InvalidArgument("MntpPolicy: non-finite threshold");
  }
}

void ProbabilityRange::validate() const {
  if (!(q_min > 0.0 && q_min <= q_max && q_max <= 1.0)) {
    throw InvalidArgument("ProbabilityRange: need 0 < q_min <= q_max <= 1");
  }
}

void EnergyState::validate() const {
  for (double b : battery) {
    if (!(b >= 0.0 && b <= 1.0)) throw InvalidArgument("EnergyState: battery level outside [0, 1]");
  }
  if (!(cost_per_attempt > 0.0)) throw InvalidArgument("EnergyState: cost must be positive");
}

namespace {

void require_link(double p_link) {
  if (!(p_link > 0.0 && p_link <= 1.0)) {
    throw InvalidArgument("p_link must lie in (0, 1], got " + std::to_string(p_link));
  }
}

void require_level(int m) {
  if (m < 1) throw InvalidArgument("MNTP level must be >= 1, got " + std::to_string(m));
}

// sum_{k < m} (1 - p)^k, so that hop success is p times this sum.
double attempt_sum(double p_link, int m) {
  const double fail = 1.0 - p_link;
  double s = 1.0;
  for (int k = 1; k < m; ++k) s = 1.0 + fail * s;
  return s;
}

}  // namespace

double hop_success(double p_link, int m) {
  require_link(p_link);
  require_level(m);
  return p_link * attempt_sum(p_link, m);
}

double expected_attempts(double p_link, int m) {
  require_link(p_link);
  require_level(m);
  return std::min(static_cast<double>(m), attempt_sum(p_link, m));
}

double end_to_end_success(const std::vector<HopLink>& topology, const NetworkConfiguration& config) {
  if (topology.empty()) throw InvalidArgument("end_to_end_success: empty topology");
  double q = 1.0;
  for (const auto& hop : topology) {
    if (hop.node < 0 || hop.node >= static_cast<int>(config.mntp.size())) {
      throw InvalidArgument("end_to_end_success: no MNTP assignment for node " +
                            std::to_string(hop.node));
    }
    q *= hop_success(hop.p_link, config.mntp[static_cast<std::size_t>(hop.node)]);
  }
  return q;
}

std::uint64_t configuration_count(const MntpPolicy& policy) {
  policy.validate();
  std::uint64_t count = 1;
  for (const auto& set : policy.levels) {
    count *= set.size();
    if (count > kMaxConfigurations) {
      throw InvalidArgument("configuration count exceeds the enumeration limit of 2^24");
    }
  }
  return count;
}

NetworkConfiguration configuration_from_id(const MntpPolicy& policy, std::uint64_t id) {
  NetworkConfiguration config;
  config.mntp.reserve(policy.levels.size());
  for (const auto& set : policy.levels) {
    config.mntp.push_back(set[id % set.size()]);
    id /= set.size();
  }
  if (id != 0) throw InvalidArgument("configuration_from_id: id out of range");
  return config;
}

CensusSummary enumerate_configurations(const std::vector<HopLink>& topology,
                                       const MntpPolicy& policy, const ConfigurationSink& sink) {
  const std::uint64_t count = configuration_count(policy);
  for (const auto& hop : topology) {
    if (hop.node >= policy.node_count()) {
      throw InvalidArgument("enumerate_configurations: hop owned by unknown node");
    }
  }
  // Odometer over per-node level indices, node 0 fastest.
  std::vector<std::size_t> digit(policy.levels.size(), 0);
  NetworkConfiguration config;
  for (const auto& set : policy.levels) config.mntp.push_back(set.front());

  CensusSummary summary;
  summary.count = count;
  for (std::uint64_t id = 0; id < count; ++id) {
    const double q = end_to_end_success(topology, config);
    summary.q_min = std::min(summary.q_min, q);
    summary.q_max = std::max(summary.q_max, q);
    if (sink) sink(id, config, q);
    for (std::size_t n = 0; n < digit.size(); ++n) {
      const auto& set = policy.levels[n];
      if (++digit[n] < set.size()) {
        config.mntp[n] = set[digit[n]];
        break;
      }
      digit[n] = 0;
      config.mntp[n] = set.front();
    }
  }
  return summary;
}

std::vector<double> configuration_probabilities(const std::vector<HopLink>& topology,
                                                const MntpPolicy& policy) {
  std::vector<double> out;
  out.reserve(configuration_count(policy));
  enumerate_configurations(topology, policy,
                           [&](std::uint64_t, const NetworkConfiguration&, double q) { out.push_back(q); });
  return out;
}

std::vector<HopLink> uniform_chain(int node_count, double p_link) {
  if (node_count < 1) throw InvalidArgument("uniform_chain: node_count must be >= 1");
  require_link(p_link);
  std::vector<HopLink> chain;
  for (int n = 0; n < node_count; ++n) chain.push_back({p_link, n});
  return chain;
}

PolicyStep energy_policy_step(const EnergyState& state, const MntpPolicy& policy,
                              const std::vector<HopLink>& topology) {
  policy.validate();
  state.validate();
  if (state.battery.size() != policy.levels.size()) {
    throw DimensionError("energy_policy_step: one battery level per node required");
  }
  PolicyStep step;
  step.next = state;
  for (std::size_t n = 0; n < policy.levels.size(); ++n) {
    const auto& set = policy.levels[n];
    step.config.mntp.push_back(state.battery[n] >= policy.thresholds[n] ? set.back() : set.front());
  }
  for (const auto& hop : topology) {
    const auto n = static_cast<std::size_t>(hop.node);
    if (n >= step.next.battery.size()) throw InvalidArgument("energy_policy_step: unknown node");
    const double drain = state.cost_per_attempt * expected_attempts(hop.p_link, step.config.mntp[n]);
    step.next.battery[n] = std::max(0.0, step.next.battery[n] - drain);
  }
  return step;
}

mjls::TransitionPolytope probability_interval_to_polytope(const ProbabilityRange& range) {
  range.validate();
  return mjls::TransitionPolytope({mjls::BernoulliRow::success(range.q_min).expand(),
                                   mjls::BernoulliRow::success(range.q_max).expand()});
}

}  // namespace ncs::netproto
