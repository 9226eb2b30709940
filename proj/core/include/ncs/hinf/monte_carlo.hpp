#pragma once

#include <cstdint>

#include "ncs/mjls/markov.hpp"
#include "ncs/mjls/model.hpp"

namespace ncs::hinf {

struct MonteCarloOptions {
  int trials = 200;
  int horizon = 400;
  int power_iters = 10;
  int restarts = 5;
  std::uint64_t seed = 1;
};

/// Empirical lower bound on the H-infinity norm of a closed loop:
///
///   sqrt( max_w  mean_trials |z|_2^2 / |w|_2^2 )
///
/// The maximization runs power iterations on the sample-averaged operator
/// T^T T (forward pass, then adjoint pass) from random starts, for every
/// initial mode. The disturbance does not observe the modes, so the
/// estimate sits below the certified gamma up to sampling error.
/// Throws InvalidArgument for closed loops that are not mean-square stable.
double mc_lower_bound(const mjls::MjlsModel& closed, const mjls::TransitionMatrix& gamma,
                      const MonteCarloOptions& options = {});

}  // namespace ncs::hinf
