#include "ncs/mjls/stability.hpp"

#include <Eigen/Eigenvalues>

#include "ncs/errors.hpp"
#include "ncs/lmi/linear_matrix.hpp"

namespace ncs::mjls {

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

void require_order(const MjlsModel& closed, const TransitionMatrix& gamma, const char* what) {
  if (gamma.order() != closed.mode_count()) {
    throw DimensionError(std::string(what) + ": transition matrix order " +
                         std::to_string(gamma.order()) + " != mode count " +
                         std::to_string(closed.mode_count()));
  }
}

}  // namespace

Eigen::MatrixXd second_moment_operator(const MjlsModel& closed, const TransitionMatrix& gamma) {
  require_order(closed, gamma, "second_moment_operator");
  const int sigma = closed.mode_count();
  const int n2 = closed.nx() * closed.nx();
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(sigma * n2, sigma * n2);
  // Q_j(k+1) = sum_i p_ij A_i Q_i A_i^T, vec(A Q A^T) = (A (x) A) vec(Q).
  for (int i = 0; i < sigma; ++i) {
    const Eigen::MatrixXd ai = kron(closed.mode(i).A, closed.mode(i).A);
    for (int j = 0; j < sigma; ++j) {
      if (gamma(i, j) != 0.0) lambda.block(j * n2, i * n2, n2, n2) = gamma(i, j) * ai;
    }
  }
  return lambda;
}

double mss_spectral_radius(const MjlsModel& closed, const TransitionMatrix& gamma) {
  const Eigen::MatrixXd lambda = second_moment_operator(closed, gamma);
  Eigen::EigenSolver<Eigen::MatrixXd> eig(lambda, false);
  if (eig.info() != Eigen::Success) throw NumericalFailure("mss_spectral_radius: QR failed");
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

bool mss_lyapunov_feasible(const MjlsModel& closed, const TransitionMatrix& gamma,
                           const lmi::SolverTolerances& tol) {
  require_order(closed, gamma, "mss_lyapunov_feasible");
  const int sigma = closed.mode_count();
  const int n = closed.nx();
  lmi::SdpBuilder builder;
  std::vector<lmi::LinearMatrix> p;
  for (int j = 0; j < sigma; ++j) p.push_back(builder.add_symmetric(n));
  for (int i = 0; i < sigma; ++i) {
    lmi::LinearMatrix pbar = lmi::LinearMatrix::zero(n, n);
    for (int j = 0; j < sigma; ++j) {
      if (gamma(i, j) != 0.0) pbar += gamma(i, j) * p[j];
    }
    const Eigen::MatrixXd& a = closed.mode(i).A;
    builder.require_psd(p[i], 1.0);
    builder.require_psd(p[i] - a.transpose() * pbar * a, 1.0);
  }
  const auto sol = lmi::solve_sdp(builder.problem(), tol);
  if (sol.status == lmi::SdpStatus::Optimal) return true;
  if (sol.status == lmi::SdpStatus::Infeasible) return false;
  throw SolverFailure("mss_lyapunov_feasible: solver returned " +
                      std::string(lmi::to_string(sol.status)));
}

}  // namespace ncs::mjls
