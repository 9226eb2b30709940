#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncs/errors.hpp"
#include "ncs/hinf/monte_carlo.hpp"
#include "ncs/hinf/synthesis.hpp"
#include "ncs/lmi/sdp.hpp"
#include "ncs/mjls/model.hpp"
#include "ncs/netproto/protocol.hpp"
#include "ncs/plant/two_tank.hpp"

namespace ncs::cli {

enum class PlantKind { TwoTank, StateSpace };

struct PlantSection {
  PlantKind kind = PlantKind::TwoTank;
  plant::TankParams tank;
  plant::ChannelConfig channels;
  /// Discrete matrices when kind = state_space (Ad, Bd, Ed, Cz, Dz, Ez).
  plant::DiscretePlant state_space;
};

struct NetworkSection {
  int nodes = 16;
  double p_link = 0.97;
  std::vector<int> levels{1, 2};
  double threshold = 0.5;
};

struct SweepSection {
  int count = 25;
  double q_min = 0.6;
  double q_max = 1.0;
};

enum class RobustSource { Explicit, Protocol };

struct RobustSection {
  RobustSource source = RobustSource::Explicit;
  double q_lo = 0.6;
  double q_hi = 1.0;
};

struct SolverSection {
  lmi::SolverTolerances tolerances;
  int max_refine_iterations = 25;
  double refine_tolerance = 1e-5;
};

struct Scenario {
  PlantSection plant;
  std::optional<NetworkSection> network;
  SweepSection sweep;
  RobustSection robust;
  SolverSection solver;
  hinf::MonteCarloOptions montecarlo;  ///< its seed field is unused; see seed
  std::uint64_t seed = 1;
  std::string out = "out";
  int workers = 0;  ///< 0 = one per hardware thread
};

struct ScenarioIssue {
  int line = 0;  ///< 0 when the issue is not tied to a line (missing section)
  std::string key;
  std::string reason;
};

class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<ScenarioIssue> issues);
  const std::vector<ScenarioIssue>& issues() const { return issues_; }

 private:
  std::vector<ScenarioIssue> issues_;
};

/// Parses the INI-style scenario text. Collects every problem before
/// throwing a single ScenarioError.
Scenario parse_scenario_text(std::string_view text);
Scenario parse_scenario(const std::string& path);

/// Canonical text: fixed section and key order, shortest round-trip numbers.
std::string serialize_scenario(const Scenario& scenario);

/// Discrete plant with output map, from either plant kind.
plant::DiscretePlant discrete_plant(const Scenario& scenario);
mjls::MjlsModel build_model(const Scenario& scenario);

std::vector<double> sweep_grid(const SweepSection& sweep);

/// Robust success-probability interval; runs the census when the scenario
/// asks for the protocol-derived range.
netproto::ProbabilityRange robust_interval(const Scenario& scenario);

std::vector<netproto::HopLink> network_topology(const NetworkSection& network);
netproto::MntpPolicy network_policy(const NetworkSection& network);

hinf::DesignOptions design_options(const Scenario& scenario);

}  // namespace ncs::cli
