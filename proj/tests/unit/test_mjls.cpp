#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "ncs/errors.hpp"
#include "ncs/mjls/markov.hpp"
#include "ncs/mjls/model.hpp"
#include "ncs/mjls/simulate.hpp"
#include "ncs/mjls/stability.hpp"
#include "ncs/random.hpp"
#include "oracles.hpp"

using namespace ncs;
using namespace ncs::mjls;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MjlsModel random_model(oracle::Rng& rng, int modes, int nx, int nu, int nw, int nz, double radius) {
  std::vector<ModeMatrices> m;
  for (int i = 0; i < modes; ++i) {
    m.push_back({oracle::random_with_radius(rng, nx, radius), oracle::random_matrix(rng, nx, nu),
                 oracle::random_matrix(rng, nx, nw), oracle::random_matrix(rng, nz, nx),
                 oracle::random_matrix(rng, nz, nu), oracle::random_matrix(rng, nz, nw)});
  }
  return MjlsModel(m);
}

TransitionMatrix random_stochastic(oracle::Rng& rng, int n) {
  MatrixXd p(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) p(i, j) = oracle::uniform(rng, 0.0, 1.0);
    p.row(i) /= p.row(i).sum();
  }
  return TransitionMatrix(p);
}

MjlsModel scalar_model(double a, double b, double e, double c, double d, double ez) {
  return MjlsModel({{MatrixXd::Constant(1, 1, a), MatrixXd::Constant(1, 1, b), MatrixXd::Constant(1, 1, e),
                     MatrixXd::Constant(1, 1, c), MatrixXd::Constant(1, 1, d),
                     MatrixXd::Constant(1, 1, ez)}});
}

}  // namespace

TEST(TransitionMatrix, ValidatesRows) {
  EXPECT_NO_THROW(TransitionMatrix((MatrixXd(2, 2) << 0.3, 0.7, 1.0, 0.0).finished()));
  EXPECT_THROW(TransitionMatrix((MatrixXd(2, 2) << 0.3, 0.6, 1.0, 0.0).finished()), InvalidArgument);
  EXPECT_THROW(TransitionMatrix((MatrixXd(2, 2) << 1.2, -0.2, 1.0, 0.0).finished()), InvalidArgument);
  EXPECT_THROW(TransitionMatrix(MatrixXd::Constant(2, 3, 1.0 / 3)), DimensionError);
}

TEST(BernoulliRow, ExpandsToIdenticalRows) {
  const auto g = BernoulliRow::success(0.8).expand();
  EXPECT_EQ(g.order(), 2);
  EXPECT_DOUBLE_EQ(g(0, kReceived), 0.8);
  EXPECT_DOUBLE_EQ(g(1, kReceived), 0.8);
  EXPECT_NEAR(g(1, kLost), 0.2, 1e-16);
  EXPECT_THROW(BernoulliRow::success(1.1), InvalidArgument);
}

TEST(TransitionPolytope, ConvexCombinationsStayStochastic) {
  oracle::Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4, v = 1 + trial % 3;
    std::vector<TransitionMatrix> vertices;
    for (int k = 0; k < v; ++k) vertices.push_back(random_stochastic(rng, n));
    TransitionPolytope poly(vertices);
    std::vector<double> alpha(v);
    double sum = 0.0;
    for (auto& a : alpha) sum += (a = oracle::uniform(rng, 0.0, 1.0));
    for (auto& a : alpha) a /= sum;
    const auto g = poly.combine(alpha);
    EXPECT_GE(g.matrix().minCoeff(), 0.0);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(g.matrix().row(i).sum(), 1.0, 1e-12);
  }
}

TEST(CloseLoop, ZeroGainKeepsOpenLoop) {
  oracle::Rng rng(2);
  const auto m = random_model(rng, 2, 3, 2, 1, 2, 0.9);
  const auto cl = close_loop(m, {MatrixXd::Zero(2, 3)});
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(cl.mode(i).A, m.mode(i).A);
    EXPECT_EQ(cl.mode(i).Cz, m.mode(i).Cz);
    EXPECT_EQ(cl.mode(i).B.norm(), 0.0);
    EXPECT_EQ(cl.mode(i).Dz.norm(), 0.0);
    EXPECT_EQ(cl.mode(i).E, m.mode(i).E);
    EXPECT_EQ(cl.mode(i).Ez, m.mode(i).Ez);
  }
}

TEST(CloseLoop, NullInputModeIgnoresGain) {
  oracle::Rng rng(3);
  auto modes = random_model(rng, 2, 2, 1, 1, 2, 0.9).modes();
  modes[1].B.setZero();
  const MjlsModel m(modes);
  const auto cl = close_loop(m, {oracle::random_matrix(rng, 1, 2)});
  EXPECT_EQ(cl.mode(1).A, m.mode(1).A);
}

TEST(CloseLoop, MatchesDirectArithmetic) {
  oracle::Rng rng(4);
  const auto m = random_model(rng, 2, 3, 2, 2, 4, 1.2);
  const MatrixXd K = oracle::random_matrix(rng, 2, 3);
  const auto cl = close_loop(m, {K});
  for (int i = 0; i < 2; ++i) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        double a = m.mode(i).A(r, c);
        for (int k = 0; k < 2; ++k) a += m.mode(i).B(r, k) * K(k, c);
        EXPECT_NEAR(cl.mode(i).A(r, c), a, 1e-14);
      }
    EXPECT_LE((cl.mode(i).Cz - (m.mode(i).Cz + m.mode(i).Dz * K)).norm(), 1e-14);
  }
}

TEST(CloseLoop, AffineInGain) {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_model(rng, 2, 3, 2, 1, 2, 1.0);
    const MatrixXd K1 = oracle::random_matrix(rng, 2, 3), K2 = oracle::random_matrix(rng, 2, 3);
    const auto a = close_loop(m, {K1 + K2});
    const auto b = close_loop(m, {K1});
    for (int i = 0; i < 2; ++i) {
      EXPECT_LE((a.mode(i).A - b.mode(i).A - m.mode(i).B * K2).norm(), 1e-12);
    }
  }
}

TEST(CloseLoop, RejectsWrongShape) {
  oracle::Rng rng(6);
  const auto m = random_model(rng, 2, 3, 2, 1, 2, 1.0);
  EXPECT_THROW(close_loop(m, {MatrixXd::Zero(3, 2)}), DimensionError);
}

TEST(MjlsModel, RejectsInconsistentModes) {
  oracle::Rng rng(7);
  auto modes = random_model(rng, 2, 2, 1, 1, 1, 0.5).modes();
  modes[1].A = MatrixXd::Zero(3, 3);
  EXPECT_THROW(MjlsModel{modes}, DimensionError);
  EXPECT_THROW(MjlsModel{std::vector<ModeMatrices>{}}, InvalidArgument);
}

TEST(MssSpectralRadius, ScalarMultipleOfIdentity) {
  for (double a : {0.3, 0.9, 1.4}) {
    const MjlsModel m({{a * MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 1), MatrixXd::Zero(3, 1),
                        MatrixXd::Zero(1, 3), MatrixXd::Zero(1, 1), MatrixXd::Zero(1, 1)}});
    EXPECT_NEAR(mss_spectral_radius(m, TransitionMatrix(MatrixXd::Ones(1, 1))), a * a, 1e-12 * a * a);
  }
}

TEST(MssSpectralRadius, IdenticalModesGiveSquaredRadius) {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd A = oracle::random_matrix(rng, 3, 3);
    const double rho = A.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<ModeMatrices> modes(3, {A, MatrixXd::Zero(3, 1), MatrixXd::Zero(3, 1), MatrixXd::Zero(1, 3),
                                        MatrixXd::Zero(1, 1), MatrixXd::Zero(1, 1)});
    const MjlsModel m(modes);
    EXPECT_NEAR(mss_spectral_radius(m, random_stochastic(rng, 3)), rho * rho, 1e-9 * rho * rho);
  }
}

TEST(MssSpectralRadius, SimilarityInvariant) {
  oracle::Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto modes = random_model(rng, 2, 3, 1, 1, 1, 0.8).modes();
    const auto gamma = random_stochastic(rng, 2);
    const double before = mss_spectral_radius(MjlsModel(modes), gamma);
    MatrixXd T = oracle::random_matrix(rng, 3, 3) + 3.0 * MatrixXd::Identity(3, 3);
    const MatrixXd Tinv = T.inverse();
    for (auto& m : modes) m.A = Tinv * m.A * T;
    const double after = mss_spectral_radius(MjlsModel(modes), gamma);
    EXPECT_NEAR(after, before, 1e-8 * before);
  }
}

TEST(MssSpectralRadius, AgreesWithMonteCarloSecondMoment) {
  oracle::Rng rng(10);
  int checked = 0;
  while (checked < 6) {
    const auto m = random_model(rng, 2, 2, 1, 1, 1, oracle::uniform(rng, 0.6, 1.3));
    const auto gamma = random_stochastic(rng, 2);
    const double rho = mss_spectral_radius(m, gamma);
    if (std::abs(rho - 1.0) < 0.1) continue;
    ++checked;
    const double growth = oracle::second_moment_growth(rng, {m.mode(0).A, m.mode(1).A}, gamma.matrix(),
                                                       10000, 500);
    if (rho < 1.0) EXPECT_LT(growth, 1.0) << "rho " << rho;
    else EXPECT_GT(growth, 1.0) << "rho " << rho;
  }
}

TEST(MssSpectralRadius, RejectsOrderMismatch) {
  oracle::Rng rng(11);
  const auto m = random_model(rng, 2, 2, 1, 1, 1, 0.5);
  EXPECT_THROW(mss_spectral_radius(m, TransitionMatrix(MatrixXd::Identity(3, 3))), DimensionError);
}

TEST(MssLyapunov, AgreesWithSpectralTestOnClearCases) {
  oracle::Rng rng(12);
  int checked = 0;
  while (checked < 10) {
    const auto m = random_model(rng, 2, 2, 1, 1, 1, oracle::uniform(rng, 0.5, 1.4));
    const auto gamma = random_stochastic(rng, 2);
    const double rho = mss_spectral_radius(m, gamma);
    if (std::abs(rho - 1.0) < 1e-2) continue;
    ++checked;
    EXPECT_EQ(mss_lyapunov_feasible(m, gamma), rho < 1.0) << "rho " << rho;
  }
}

TEST(SampleChain, ForcedPermutation) {
  const TransitionMatrix perm((MatrixXd(3, 3) << 0, 1, 0, 0, 0, 1, 1, 0, 0).finished());
  const auto seq = sample_chain(perm, 1, 7, 42);
  EXPECT_EQ(seq, (std::vector<int>{1, 2, 0, 1, 2, 0, 1}));
}

TEST(SampleChain, IdentityStaysPut) {
  const auto seq = sample_chain(TransitionMatrix(MatrixXd::Identity(3, 3)), 2, 50, 9);
  for (int s : seq) EXPECT_EQ(s, 2);
}

TEST(SampleChain, BernoulliFrequencies) {
  const auto gamma = BernoulliRow(Eigen::Vector2d(0.7, 0.3)).expand();
  const int n = 1000000;
  const auto seq = sample_chain(gamma, 0, n + 1, 2024);
  std::int64_t zeros = 0;
  for (int k = 1; k <= n; ++k) zeros += seq[static_cast<std::size_t>(k)] == 0;
  EXPECT_TRUE(oracle::within_3_sigma(zeros, n, 0.7)) << zeros;
}

TEST(SampleChain, ReproducibleAndValidated) {
  const auto gamma = BernoulliRow::success(0.5).expand();
  EXPECT_EQ(sample_chain(gamma, 0, 100, 5), sample_chain(gamma, 0, 100, 5));
  EXPECT_NE(sample_chain(gamma, 0, 100, 5), sample_chain(gamma, 0, 100, 6));
  EXPECT_THROW(sample_chain(gamma, 2, 10, 1), InvalidArgument);
  EXPECT_THROW(sample_chain(gamma, -1, 10, 1), InvalidArgument);
}

TEST(RandomStream, StreamsDiffer) {
  RandomStream a(1, 0), b(1, 1), c(1, 0);
  EXPECT_NE(a.next(), b.next());
  RandomStream d(1, 0);
  c.next();
  d.next();
  EXPECT_EQ(c.next(), d.next());
  double sum = 0.0, sq = 0.0;
  RandomStream n(3, 4);
  for (int k = 0; k < 100000; ++k) {
    const double v = n.normal();
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / 100000, 0.0, 0.02);
  EXPECT_NEAR(sq / 100000, 1.0, 0.02);
}

TEST(Simulate, ZeroInputZeroState) {
  oracle::Rng rng(13);
  const auto m = close_loop(random_model(rng, 2, 2, 1, 1, 2, 0.9), {MatrixXd::Zero(1, 2)});
  std::vector<VectorXd> w(30, VectorXd::Zero(1));
  const auto t = simulate(m, BernoulliRow::success(0.5).expand(), w, VectorXd::Zero(2), 0, 1);
  for (const auto& z : t.z) EXPECT_EQ(z.norm(), 0.0);
  EXPECT_EQ(t.input_energy, 0.0);
  EXPECT_EQ(t.output_energy, 0.0);
}

TEST(Simulate, OneStepDelay) {
  const auto m = scalar_model(0.0, 0.0, 1.0, 1.0, 0.0, 0.0);
  std::vector<VectorXd> w(5, VectorXd::Zero(1));
  w[0](0) = 1.0;
  const auto t = simulate(m, TransitionMatrix(MatrixXd::Ones(1, 1)), w, VectorXd::Zero(1), 0, 1);
  ASSERT_EQ(t.z.size(), 5u);
  const double expected[] = {0, 1, 0, 0, 0};
  for (int k = 0; k < 5; ++k) EXPECT_EQ(t.z[static_cast<std::size_t>(k)](0), expected[k]);
  EXPECT_EQ(t.input_energy, 1.0);
  EXPECT_EQ(t.output_energy, 1.0);
}

TEST(Simulate, MatchesDuplicateRecursionBitForBit) {
  oracle::Rng rng(14);
  const auto m = close_loop(random_model(rng, 2, 3, 1, 2, 2, 0.95), {MatrixXd::Zero(1, 3)});
  const auto gamma = random_stochastic(rng, 2);
  const int T = 50;
  std::vector<VectorXd> w;
  for (int k = 0; k < T; ++k) w.push_back(oracle::random_matrix(rng, 2, 1));
  const VectorXd x0 = oracle::random_matrix(rng, 3, 1);
  const auto t = simulate(m, gamma, w, x0, 1, 77);
  ASSERT_EQ(t.modes, sample_chain(gamma, 1, T, 77));

  // Plain loops in the natural left-to-right summation order.
  std::vector<double> x(x0.data(), x0.data() + 3);
  double in_energy = 0.0, out_energy = 0.0;
  for (int k = 0; k < T; ++k) {
    const auto& md = m.mode(t.modes[static_cast<std::size_t>(k)]);
    std::vector<double> next(3), z(2);
    for (int r = 0; r < 3; ++r) {
      double ax = 0.0, ew = 0.0;
      for (int c = 0; c < 3; ++c) ax += md.A(r, c) * x[static_cast<std::size_t>(c)];
      for (int c = 0; c < 2; ++c) ew += md.E(r, c) * w[static_cast<std::size_t>(k)](c);
      next[static_cast<std::size_t>(r)] = ax + ew;
    }
    for (int r = 0; r < 2; ++r) {
      double cx = 0.0, dw = 0.0;
      for (int c = 0; c < 3; ++c) cx += md.Cz(r, c) * x[static_cast<std::size_t>(c)];
      for (int c = 0; c < 2; ++c) dw += md.Ez(r, c) * w[static_cast<std::size_t>(k)](c);
      z[static_cast<std::size_t>(r)] = cx + dw;
    }
    for (int r = 0; r < 2; ++r) {
      EXPECT_EQ(t.z[static_cast<std::size_t>(k)](r), z[static_cast<std::size_t>(r)]);
      out_energy += z[static_cast<std::size_t>(r)] * z[static_cast<std::size_t>(r)];
    }
    in_energy += w[static_cast<std::size_t>(k)].squaredNorm();
    x = next;
    for (int r = 0; r < 3; ++r) {
      EXPECT_EQ(t.x[static_cast<std::size_t>(k) + 1](r), x[static_cast<std::size_t>(r)]);
    }
  }
  EXPECT_NEAR(t.output_energy, out_energy, 1e-12 * out_energy);
  EXPECT_NEAR(t.input_energy, in_energy, 1e-12 * in_energy);
}

TEST(Simulate, SingleModeIsLti) {
  oracle::Rng rng(15);
  const auto m = close_loop(random_model(rng, 1, 2, 1, 1, 1, 0.9), {MatrixXd::Zero(1, 2)});
  std::vector<VectorXd> w;
  for (int k = 0; k < 40; ++k) w.push_back(oracle::random_matrix(rng, 1, 1));
  const VectorXd x0 = VectorXd::Ones(2);
  const auto t = simulate(m, TransitionMatrix(MatrixXd::Ones(1, 1)), w, x0, 0, 3);
  VectorXd x = x0;
  for (int k = 0; k < 40; ++k) {
    EXPECT_LE((t.z[static_cast<std::size_t>(k)] - (m.mode(0).Cz * x + m.mode(0).Ez * w[static_cast<std::size_t>(k)])).norm(), 1e-14);
    x = m.mode(0).A * x + m.mode(0).E * w[static_cast<std::size_t>(k)];
    EXPECT_LE((t.x[static_cast<std::size_t>(k) + 1] - x).norm(), 1e-14);
  }
}

TEST(Simulate, RejectsBadShapes) {
  const auto m = scalar_model(0.5, 0.0, 1.0, 1.0, 0.0, 0.0);
  const TransitionMatrix one(MatrixXd::Ones(1, 1));
  EXPECT_THROW(simulate(m, one, {VectorXd::Zero(2)}, VectorXd::Zero(1), 0, 1), DimensionError);
  EXPECT_THROW(simulate(m, one, {VectorXd::Zero(1)}, VectorXd::Zero(3), 0, 1), DimensionError);
}
