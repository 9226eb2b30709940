#include "ncs/plant/two_tank.hpp"

#include <cmath>

namespace ncs::plant {

using Eigen::MatrixXd;

void TankParams::validate() const {
  const std::pair<const char*, double> positive[] = {{"area1", area1},     {"area2", area2},
                                                     {"outlet", outlet},   {"gravity", gravity},
                                                     {"sample_time", sample_time}};
  for (const auto& [name, v] : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument(std::string("TankParams: ") + name + " must be positive and finite");
    }
  }
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
    throw InvalidArgument("TankParams: coupling must be nonnegative and finite");
  }
  if (!std::isfinite(inflow1) || !std::isfinite(inflow2)) {
    throw InvalidArgument("TankParams: non-finite inflow");
  }
}

namespace {

void require_tanks(const std::vector<int>& tanks, const char* what) {
  for (int t : tanks) {
    if (t != 1 && t != 2) throw InvalidArgument(std::string(what) + ": tank index must be 1 or 2");
  }
}

MatrixXd inflow_map(const TankParams& p, const std::vector<int>& tanks) {
  MatrixXd m = MatrixXd::Zero(2, static_cast<Eigen::Index>(tanks.size()));
  for (std::size_t k = 0; k < tanks.size(); ++k) {
    const int t = tanks[k];
    m(t - 1, static_cast<Eigen::Index>(k)) = 1.0 / (t == 1 ? p.area1 : p.area2);
  }
  return m;
}

// Root of c * sqrt(2 g h) = flow by damped Newton; flow >= 0.
double solve_head(double c, double g, double flow, const char* what) {
  if (flow < 0.0) throw NoEquilibrium(std::string(what) + ": negative flow has no equilibrium");
  if (flow == 0.0) return 0.0;
  if (c == 0.0) throw NoEquilibrium(std::string(what) + ": closed orifice cannot carry the flow");
  auto residual = [&](double h) { return c * std::sqrt(2.0 * g * h) - flow; };
  double h = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double r = residual(h);
    if (std::abs(r) <= 1e-13 * (1.0 + flow)) return h;
    const double slope = c * g / std::sqrt(2.0 * g * h);
    double step = r / slope;
    double t = 1.0;
    // Keep h positive and the residual decreasing.
    while (t > 1e-12 && (h - t * step <= 0.0 || std::abs(residual(h - t * step)) >= std::abs(r))) {
      t *= 0.5;
    }
    h -= t * step;
  }
  throw NoEquilibrium(std::string(what) + ": Newton iteration did not converge");
}

}  // namespace

Eigen::Vector2d tank_derivative(const TankParams& p, const ChannelConfig& ch,
                                const Eigen::Vector2d& levels, const Eigen::VectorXd& du,
                                const Eigen::VectorXd& w) {
  const double head = levels(0) - levels(1);
  const double coupling_flow =
      (head >= 0.0 ? 1.0 : -1.0) * p.coupling * std::sqrt(2.0 * p.gravity * std::abs(head));
  const double outflow = p.outlet * std::sqrt(2.0 * p.gravity * std::max(levels(1), 0.0));
  Eigen::Vector2d d((p.inflow1 - coupling_flow) / p.area1,
                    (p.inflow2 + coupling_flow - outflow) / p.area2);
  d += inflow_map(p, ch.control_tanks) * du + inflow_map(p, ch.disturbance_tanks) * w;
  return d;
}

Levels equilibrium(const TankParams& params) {
  params.validate();
  const double dh = solve_head(params.coupling, params.gravity, params.inflow1, "coupling balance");
  const double h2 =
      solve_head(params.outlet, params.gravity, params.inflow1 + params.inflow2, "outlet balance");
  if (h2 <= 0.0) throw NoEquilibrium("equilibrium: tank 2 would be empty");
  return {h2 + dh, h2};
}

ContinuousModel linearize(const TankParams& p, const Levels& op, const ChannelConfig& ch) {
  p.validate();
  require_tanks(ch.control_tanks, "control_tanks");
  require_tanks(ch.disturbance_tanks, "disturbance_tanks");
  if (!(op.h1 > op.h2 && op.h2 > 0.0)) {
    throw SingularLinearization("linearize: need H1 > H2 > 0 (square-root slope is unbounded)");
  }
  // d/dh [c sqrt(2 g h)] = c g / sqrt(2 g h)
  const double kc = p.coupling * p.gravity / std::sqrt(2.0 * p.gravity * (op.h1 - op.h2));
  const double kd = p.outlet * p.gravity / std::sqrt(2.0 * p.gravity * op.h2);
  ContinuousModel m;
  m.Ac.resize(2, 2);
  m.Ac << -kc / p.area1, kc / p.area1,
           kc / p.area2, -(kc + kd) / p.area2;
  m.Bc = inflow_map(p, ch.control_tanks);
  m.Ec = inflow_map(p, ch.disturbance_tanks);
  return m;
}

MatrixXd expm(const MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionError("expm: matrix must be square");
  const auto n = a.rows();
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const MatrixXd x = a / std::ldexp(1.0, squarings);

  // [6/6] Pade coefficients c_k = (12 - k)! 6! / (12! k! (6 - k)!)
  constexpr double c[] = {1.0,
                          1.0 / 2.0,
                          5.0 / 44.0,
                          1.0 / 66.0,
                          1.0 / 792.0,
                          1.0 / 15840.0,
                          1.0 / 665280.0};
  const MatrixXd eye = MatrixXd::Identity(n, n);
  MatrixXd power = eye, num = c[0] * eye, den = c[0] * eye;
  for (int k = 1; k <= 6; ++k) {
    power = power * x;
    num += c[k] * power;
    den += ((k % 2) ? -c[k] : c[k]) * power;
  }
  MatrixXd result = den.partialPivLu().solve(num);
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

DiscretePlant discretize(const ContinuousModel& cont, double ts) {
  if (!(ts > 0.0)) throw InvalidArgument("discretize: sample time must be positive");
  const auto n = cont.Ac.rows();
  const auto nu = cont.Bc.cols();
  const auto nw = cont.Ec.cols();
  if (cont.Ac.cols() != n || cont.Bc.rows() != n || cont.Ec.rows() != n) {
    throw DimensionError("discretize: inconsistent continuous matrices");
  }
  MatrixXd aug = MatrixXd::Zero(n + nu + nw, n + nu + nw);
  aug.topLeftCorner(n, n) = cont.Ac;
  aug.block(0, n, n, nu) = cont.Bc;
  aug.block(0, n + nu, n, nw) = cont.Ec;
  const MatrixXd phi = expm(aug * ts);
  DiscretePlant d;
  d.Ad = phi.topLeftCorner(n, n);
  d.Bd = phi.block(0, n, n, nu);
  d.Ed = phi.block(0, n + nu, n, nw);
  d.sample_time = ts;
  return d;
}

void attach_output(DiscretePlant& plant, const ChannelConfig& ch) {
  const auto nu = plant.Bd.cols();
  const auto nw = plant.Ed.cols();
  plant.Cz = MatrixXd::Zero(2 + nu, 2);
  plant.Cz(0, 0) = ch.level_weight1;
  plant.Cz(1, 1) = ch.level_weight2;
  plant.Dz = MatrixXd::Zero(2 + nu, nu);
  plant.Dz.bottomRows(nu) = ch.control_weight * MatrixXd::Identity(nu, nu);
  plant.Ez = MatrixXd::Zero(2 + nu, nw);
}

LinearPlant build_two_tank(const TankParams& params, const ChannelConfig& channels) {
  LinearPlant p;
  p.equilibrium = equilibrium(params);
  p.continuous = linearize(params, p.equilibrium, channels);
  p.discrete = discretize(p.continuous, params.sample_time);
  attach_output(p.discrete, channels);
  return p;
}

mjls::MjlsModel to_mjls(const DiscretePlant& plant) {
  mjls::ModeMatrices received{plant.Ad, plant.Bd, plant.Ed, plant.Cz, plant.Dz, plant.Ez};
  mjls::ModeMatrices lost = received;
  lost.B = MatrixXd::Zero(plant.Bd.rows(), plant.Bd.cols());
  return mjls::MjlsModel({received, lost});
}

}  // namespace ncs::plant
