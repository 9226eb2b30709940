#include "ncs/mjls/simulate.hpp"

#include "ncs/errors.hpp"

namespace ncs::mjls {

Trajectory simulate_along(const MjlsModel& closed, const std::vector<int>& modes,
                          const std::vector<Eigen::VectorXd>& w, const Eigen::VectorXd& x0) {
  if (modes.size() != w.size()) {
    throw DimensionError("simulate: mode sequence length " + std::to_string(modes.size()) +
                         " != input length " + std::to_string(w.size()));
  }
  if (x0.size() != closed.nx()) throw DimensionError("simulate: x0 has wrong size");
  Trajectory traj;
  traj.modes = modes;
  traj.x.reserve(w.size() + 1);
  traj.z.reserve(w.size());
  traj.x.push_back(x0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k].size() != closed.nw()) throw DimensionError("simulate: w(k) has wrong size");
    if (modes[k] < 0 || modes[k] >= closed.mode_count()) {
      throw InvalidArgument("simulate: mode index out of range");
    }
    const auto& m = closed.mode(modes[k]);
    const Eigen::VectorXd& x = traj.x.back();
    Eigen::VectorXd z = m.Cz * x + m.Ez * w[k];
    Eigen::VectorXd next = m.A * x + m.E * w[k];
    traj.input_energy += w[k].squaredNorm();
    traj.output_energy += z.squaredNorm();
    traj.z.push_back(std::move(z));
    traj.x.push_back(std::move(next));
  }
  return traj;
}

Trajectory simulate(const MjlsModel& closed, const TransitionMatrix& gamma,
                    const std::vector<Eigen::VectorXd>& w, const Eigen::VectorXd& x0, int theta0,
                    std::uint64_t seed) {
  if (gamma.order() != closed.mode_count()) {
    throw DimensionError("simulate: transition matrix order does not match mode count");
  }
  const auto modes = sample_chain(gamma, theta0, static_cast<int>(w.size()), seed);
  return simulate_along(closed, modes, w, x0);
}

}  // namespace ncs::mjls
