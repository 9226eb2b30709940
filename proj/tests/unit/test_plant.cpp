#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "ncs/mjls/markov.hpp"
#include "ncs/plant/two_tank.hpp"
#include "ncscli/scenario.hpp"
#include "oracles.hpp"

using namespace ncs;
using namespace ncs::plant;

namespace {

TankParams shipped() {
  TankParams p;
  p.area1 = 100;
  p.area2 = 100;
  p.coupling = 0.5;
  p.outlet = 0.4;
  p.gravity = 981;
  p.inflow1 = 50;
  p.inflow2 = 20;
  p.sample_time = 2;
  return p;
}

TankParams random_params(oracle::Rng& rng) {
  TankParams p;
  p.area1 = oracle::uniform(rng, 10, 500);
  p.area2 = oracle::uniform(rng, 10, 500);
  p.coupling = oracle::uniform(rng, 0.05, 2);
  p.outlet = oracle::uniform(rng, 0.05, 2);
  p.gravity = oracle::uniform(rng, 1, 1000);
  p.inflow1 = oracle::uniform(rng, 1, 100);
  p.inflow2 = oracle::uniform(rng, 0, 100);
  p.sample_time = oracle::uniform(rng, 0.1, 10);
  return p;
}

double spectral_radius(const Eigen::MatrixXd& a) {
  return a.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Equilibrium, NoCouplingFlowMeansEqualLevels) {
  auto p = shipped();
  p.inflow1 = 0.0;
  const auto h = equilibrium(p);
  EXPECT_DOUBLE_EQ(h.h1, h.h2);
  EXPECT_GT(h.h2, 0.0);
}

TEST(Equilibrium, MatchesClosedForm) {
  const auto p = shipped();
  const auto h = equilibrium(p);
  const double dh = std::pow(p.inflow1 / p.coupling, 2) / (2 * p.gravity);
  const double h2 = std::pow((p.inflow1 + p.inflow2) / p.outlet, 2) / (2 * p.gravity);
  EXPECT_NEAR(h.h2, h2, 1e-10 * h2);
  EXPECT_NEAR(h.h1, h2 + dh, 1e-10 * (h2 + dh));
  EXPECT_NEAR(h.h1, 20.706, 1e-3);
  EXPECT_NEAR(h.h2, 15.609, 1e-3);
}

TEST(Equilibrium, BalancesHoldTightly) {
  oracle::Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_params(rng);
    const auto h = equilibrium(p);
    const double r1 = p.inflow1 - p.coupling * std::sqrt(2 * p.gravity * (h.h1 - h.h2));
    const double r2 = p.inflow1 + p.inflow2 - p.outlet * std::sqrt(2 * p.gravity * h.h2);
    EXPECT_LE(std::abs(r1), 1e-12 * (1 + p.inflow1));
    EXPECT_LE(std::abs(r2), 1e-12 * (1 + p.inflow1 + p.inflow2));
  }
}

TEST(Equilibrium, DoublingOutletQuartersLowerLevel) {
  auto p = shipped();
  const double before = equilibrium(p).h2;
  p.outlet *= 2;
  EXPECT_NEAR(equilibrium(p).h2, before / 4, 1e-10 * before);
}

TEST(Equilibrium, NoSolutionWithoutCouplingButWithInflow) {
  auto p = shipped();
  p.coupling = 0.0;
  EXPECT_THROW(equilibrium(p), NoEquilibrium);
}

TEST(Equilibrium, InvalidParamsRejected) {
  auto p = shipped();
  p.area1 = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = shipped();
  p.sample_time = -1;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = shipped();
  p.outlet = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Linearize, NoCouplingIsLowerTriangular) {
  auto p = shipped();
  p.coupling = 0.0;
  const auto c = linearize(p, Levels{20.0, 15.0});
  EXPECT_EQ(c.Ac(0, 0), 0.0);
  EXPECT_EQ(c.Ac(0, 1), 0.0);
  EXPECT_EQ(c.Ac(1, 0), 0.0);
  EXPECT_LT(c.Ac(1, 1), 0.0);
}

TEST(Linearize, CouplingTermsHaveOppositeSigns) {
  const auto p = shipped();
  const auto c = linearize(p, equilibrium(p));
  EXPECT_LT(c.Ac(0, 0), 0.0);
  EXPECT_GT(c.Ac(0, 1), 0.0);
  EXPECT_GT(c.Ac(1, 0), 0.0);
  EXPECT_NEAR(c.Ac(0, 0) * p.area1, -c.Ac(1, 0) * p.area2, 1e-14);
}

TEST(Linearize, MatchesFiniteDifferenceJacobian) {
  oracle::Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto p = random_params(rng);
    const ChannelConfig ch;
    const auto h = equilibrium(p);
    const auto c = linearize(p, h, ch);
    const Eigen::Vector2d x0(h.h1, h.h2);
    const Eigen::VectorXd du0 = Eigen::VectorXd::Zero(2), w0 = Eigen::VectorXd::Zero(1);

    const auto fa = oracle::fd_jacobian(
        [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
          return tank_derivative(p, ch, x, du0, w0);
        },
        x0, 1e-6);
    const auto fb = oracle::fd_jacobian(
        [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
          return tank_derivative(p, ch, x0, u, w0);
        },
        du0, 1e-6);
    const auto fe = oracle::fd_jacobian(
        [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
          return tank_derivative(p, ch, x0, du0, w);
        },
        w0, 1e-6);
    EXPECT_LE((fa - c.Ac).norm(), 1e-5 * c.Ac.norm()) << "trial " << t;
    EXPECT_LE((fb - c.Bc).norm(), 1e-5 * c.Bc.norm()) << "trial " << t;
    EXPECT_LE((fe - c.Ec).norm(), 1e-5 * c.Ec.norm()) << "trial " << t;
  }
}

TEST(Linearize, DoublingAreasHalvesEveryRow) {
  auto p = shipped();
  const auto h = equilibrium(p);
  const auto a = linearize(p, h);
  p.area1 *= 2;
  p.area2 *= 2;
  const auto b = linearize(p, h);
  EXPECT_TRUE(b.Ac.isApprox(a.Ac / 2, 1e-14));
  EXPECT_TRUE(b.Bc.isApprox(a.Bc / 2, 1e-14));
  EXPECT_TRUE(b.Ec.isApprox(a.Ec / 2, 1e-14));
}

TEST(Linearize, EqualLevelsAreSingular) {
  EXPECT_THROW(linearize(shipped(), Levels{10.0, 10.0}), SingularLinearization);
  EXPECT_THROW(linearize(shipped(), Levels{5.0, 10.0}), SingularLinearization);
  EXPECT_THROW(linearize(shipped(), Levels{5.0, 0.0}), SingularLinearization);
}

TEST(Discretize, ZeroDynamicsIsIntegrator) {
  ContinuousModel c{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2),
                    Eigen::MatrixXd::Ones(2, 1)};
  const auto d = discretize(c, 0.7);
  EXPECT_TRUE(d.Ad.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-15));
  EXPECT_TRUE(d.Bd.isApprox(0.7 * c.Bc, 1e-14));
  EXPECT_TRUE(d.Ed.isApprox(0.7 * c.Ec, 1e-14));
}

TEST(Discretize, ScalarClosedForm) {
  for (double a : {-3.0, -0.2, 0.5}) {
    ContinuousModel c{Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Constant(1, 1, 2.0),
                      Eigen::MatrixXd::Constant(1, 1, 1.0)};
    const double ts = 1.3;
    const auto d = discretize(c, ts);
    EXPECT_NEAR(d.Ad(0, 0), std::exp(a * ts), 1e-13 * std::exp(a * ts));
    const double bd = (std::exp(a * ts) - 1) / a * 2.0;
    EXPECT_NEAR(d.Bd(0, 0), bd, 1e-12 * std::abs(bd));
  }
}

TEST(Discretize, AgreesWithHeunIntegration) {
  oracle::Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd a =
        oracle::random_with_radius(rng, 2, 1.0) - 1.5 * Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd b = oracle::random_matrix(rng, 2, 1);
    const double ts = oracle::uniform(rng, 0.2, 2.0);
    const auto d = discretize({a, b, b}, ts);
    const auto ref = oracle::heun_zoh(a, b, ts);
    EXPECT_LE((d.Ad - ref.leftCols(2)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((d.Bd - ref.rightCols(1)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Discretize, ExpmOfDiagonalAndNilpotent) {
  Eigen::MatrixXd d = Eigen::Vector3d(-1.0, 0.5, 3.0).asDiagonal();
  const auto e = expm(d);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(e(i, i), std::exp(d(i, i)), 1e-13 * std::exp(d(i, i)));
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(2, 2);
  n(0, 1) = 4.0;
  const auto en = expm(n);
  EXPECT_NEAR(en(0, 1), 4.0, 1e-14);
  EXPECT_NEAR(en(0, 0), 1.0, 1e-15);
  // Large norm exercises squaring.
  const auto big = expm(Eigen::MatrixXd::Constant(1, 1, -40.0));
  EXPECT_NEAR(big(0, 0), std::exp(-40.0), 1e-12 * std::exp(-40.0));
}

TEST(ShippedPlant, DiscreteMatrices) {
  const auto lp = build_two_tank(shipped());
  EXPECT_NEAR(lp.discrete.Ad(0, 0), 0.9109, 1e-4);
  EXPECT_NEAR(lp.discrete.Ad(0, 1), 0.0871, 1e-4);
  EXPECT_NEAR(lp.discrete.Ad(1, 0), 0.0871, 1e-4);
  EXPECT_NEAR(lp.discrete.Ad(1, 1), 0.8710, 1e-4);
  EXPECT_LT(spectral_radius(lp.discrete.Ad), 1.0);
}

TEST(ShippedPlant, OutputMapWeights) {
  ChannelConfig ch;
  ch.level_weight1 = 2.0;
  ch.level_weight2 = 3.0;
  ch.control_weight = 0.5;
  const auto d = build_two_tank(shipped(), ch).discrete;
  ASSERT_EQ(d.Cz.rows(), 4);
  EXPECT_EQ(d.Cz(0, 0), 2.0);
  EXPECT_EQ(d.Cz(1, 1), 3.0);
  EXPECT_EQ(d.Cz.bottomRows(2).norm(), 0.0);
  EXPECT_EQ(d.Dz.topRows(2).norm(), 0.0);
  EXPECT_TRUE(d.Dz.bottomRows(2).isApprox(0.5 * Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_EQ(d.Ez.norm(), 0.0);
}

TEST(ShippedPlant, OpenLoopStableForRandomPhysicalParameters) {
  oracle::Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_params(rng);
    const auto lp = build_two_tank(p);
    EXPECT_LT(spectral_radius(lp.discrete.Ad), 1.0) << "trial " << t;
  }
}

TEST(ShippedPlant, NonlinearAndLinearTrajectoriesAgree) {
  const auto p = shipped();
  const ChannelConfig ch;
  const auto lp = build_two_tank(p, ch);
  const Eigen::Vector2d eq(lp.equilibrium.h1, lp.equilibrium.h2);
  const Eigen::VectorXd du = Eigen::VectorXd::Zero(2), w = Eigen::VectorXd::Zero(1);
  for (const Eigen::Vector2d dir : {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1),
                                    Eigen::Vector2d(1, -1)}) {
    const Eigen::Vector2d dx0 = 1e-3 * eq.cwiseProduct(dir);
    Eigen::Vector2d x = eq + dx0;
    Eigen::Vector2d lin = dx0;
    const int sub = 4096;
    const double h = p.sample_time / sub;
    for (int k = 0; k < 20; ++k) {
      for (int s = 0; s < sub; ++s) x += h * tank_derivative(p, ch, x, du, w);
      lin = lp.discrete.Ad * lin;
      EXPECT_LE((x - eq - lin).norm(), 0.05 * lin.norm()) << "sample " << k;
    }
  }
}

TEST(ToMjls, ModeConventions) {
  const auto d = build_two_tank(shipped()).discrete;
  const auto m = to_mjls(d);
  ASSERT_EQ(m.mode_count(), 2);
  EXPECT_EQ(m.nx(), 2);
  EXPECT_EQ(m.nu(), 2);
  EXPECT_EQ(m.nw(), 1);
  EXPECT_EQ(m.nz(), 4);
  const auto& rx = m.mode(mjls::kReceived);
  const auto& lost = m.mode(mjls::kLost);
  EXPECT_EQ(rx.A, d.Ad);
  EXPECT_EQ(lost.A, d.Ad);
  EXPECT_EQ(rx.B, d.Bd);
  EXPECT_EQ(lost.B.norm(), 0.0);
  EXPECT_EQ(rx.E, lost.E);
  EXPECT_EQ(rx.Cz, lost.Cz);
  EXPECT_EQ(rx.Dz, lost.Dz);
  EXPECT_EQ(rx.Ez, lost.Ez);
}

TEST(ToMjls, LostModeClosedLoopIsOpenLoop) {
  const auto d = build_two_tank(shipped()).discrete;
  const auto m = to_mjls(d);
  oracle::Rng rng(12);
  for (int t = 0; t < 5; ++t) {
    mjls::ControllerGain k{oracle::random_matrix(rng, 2, 2), "random"};
    const auto cl = mjls::close_loop(m, k);
    EXPECT_EQ(cl.mode(mjls::kLost).A, d.Ad);
  }
}

TEST(ToMjls, FullSuccessChainNeverLoses) {
  const auto chain = mjls::BernoulliRow::success(1.0).expand();
  const auto modes = mjls::sample_chain(chain, mjls::kReceived, 100000, 77);
  for (int m : modes) ASSERT_EQ(m, mjls::kReceived);
}

TEST(ToMjls, StateSpaceScenarioRoundTripsByteIdentically) {
  cli::Scenario s;
  s.plant.kind = cli::PlantKind::StateSpace;
  s.plant.state_space = build_two_tank(shipped()).discrete;
  const std::string text = cli::serialize_scenario(s);
  const auto back = cli::parse_scenario_text(text);
  EXPECT_EQ(cli::serialize_scenario(back), text);
  const auto a = to_mjls(s.plant.state_space);
  const auto b = cli::build_model(back);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(a.mode(i).A, b.mode(i).A);
    EXPECT_EQ(a.mode(i).B, b.mode(i).B);
    EXPECT_EQ(a.mode(i).E, b.mode(i).E);
    EXPECT_EQ(a.mode(i).Cz, b.mode(i).Cz);
    EXPECT_EQ(a.mode(i).Dz, b.mode(i).Dz);
    EXPECT_EQ(a.mode(i).Ez, b.mode(i).Ez);
  }
}
