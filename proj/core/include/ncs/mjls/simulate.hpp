#pragma once

#include <cstdint>
#include <vector>

#include "ncs/mjls/markov.hpp"
#include "ncs/mjls/model.hpp"

namespace ncs::mjls {

struct Trajectory {
  std::vector<Eigen::VectorXd> x;  ///< x(0..T)
  std::vector<Eigen::VectorXd> z;  ///< z(0..T-1)
  std::vector<int> modes;          ///< theta(0..T-1)
  double input_energy = 0.0;       ///< sum_k |w(k)|^2
  double output_energy = 0.0;      ///< sum_k |z(k)|^2
};

/// Runs the closed-loop recursion along a given mode sequence.
Trajectory simulate_along(const MjlsModel& closed, const std::vector<int>& modes,
                          const std::vector<Eigen::VectorXd>& w, const Eigen::VectorXd& x0);

/// Samples theta from gamma (starting at theta0, stream seeded by `seed`)
/// and runs the closed-loop recursion.
Trajectory simulate(const MjlsModel& closed, const TransitionMatrix& gamma,
                    const std::vector<Eigen::VectorXd>& w, const Eigen::VectorXd& x0, int theta0,
                    std::uint64_t seed);

}  // namespace ncs::mjls
