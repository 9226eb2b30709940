#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ncs/errors.hpp"
#include "ncs/mjls/model.hpp"

namespace ncs::plant {

/// Physical data of the two coupled tanks. Any consistent unit system works;
/// the shipped scenario uses cm, cm^2, cm^3/s and s.
///
///   area1 dH1/dt = Q1 - Cc sqrt(2 g (H1 - H2))
///   area2 dH2/dt = Q2 + Cc sqrt(2 g (H1 - H2)) - Cd sqrt(2 g H2)
struct TankParams {
  double area1 = 0.0;
  double area2 = 0.0;
  double coupling = 0.0;  ///< Cc: discharge coefficient times orifice area
  double outlet = 0.0;    ///< Cd
  double gravity = 0.0;
  double inflow1 = 0.0;   ///< nominal Q1
  double inflow2 = 0.0;   ///< nominal Q2
  double sample_time = 0.0;

  void validate() const;
};

/// Which tanks receive the control and disturbance inflows, and the
/// weights of the controlled output z = [w1 dH1; w2 dH2; rho u].
struct ChannelConfig {
  std::vector<int> control_tanks{1, 2};
  std::vector<int> disturbance_tanks{1};
  double level_weight1 = 1.0;
  double level_weight2 = 1.0;
  double control_weight = 0.1;
};

struct Levels {
  double h1 = 0.0;
  double h2 = 0.0;
};

class NoEquilibrium : public Error {
 public:
  using Error::Error;
};

class SingularLinearization : public Error {
 public:
  using Error::Error;
};

struct ContinuousModel {
  Eigen::MatrixXd Ac, Bc, Ec;
};

/// Discrete plant with controlled output; the input of to_mjls.
struct DiscretePlant {
  Eigen::MatrixXd Ad, Bd, Ed, Cz, Dz, Ez;
  double sample_time = 0.0;
};

struct LinearPlant {
  Levels equilibrium;
  ContinuousModel continuous;
  DiscretePlant discrete;
};

/// Level derivatives of the nonlinear model for inflow deviations du
/// (per control tank) and w (per disturbance tank).
Eigen::Vector2d tank_derivative(const TankParams& params, const ChannelConfig& channels,
                                const Eigen::Vector2d& levels, const Eigen::VectorXd& du,
                                const Eigen::VectorXd& w);

/// Steady state from the two flow balances, by damped Newton on each
/// balance. Throws NoEquilibrium when no physical solution exists.
Levels equilibrium(const TankParams& params);

/// Jacobian of the tank dynamics at the given operating point.
ContinuousModel linearize(const TankParams& params, const Levels& operating_point,
                          const ChannelConfig& channels = {});

/// Matrix exponential (scaling and squaring with a [6/6] Pade approximant).
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// Zero-order hold. Ad = exp(Ac Ts); [Bd Ed] from the augmented exponential.
DiscretePlant discretize(const ContinuousModel& continuous, double sample_time);

/// Output map z = [w1 x1; w2 x2; rho u] for the given channels.
void attach_output(DiscretePlant& plant, const ChannelConfig& channels);

/// Equilibrium, linearization, discretization and output map in one go.
LinearPlant build_two_tank(const TankParams& params, const ChannelConfig& channels = {});

/// Zero-input dropout model: mode 1 (received) uses Bd, mode 2 (lost)
/// replaces it by zero. E, Cz, Dz, Ez are shared by both modes.
mjls::MjlsModel to_mjls(const DiscretePlant& plant);

}  // namespace ncs::plant
