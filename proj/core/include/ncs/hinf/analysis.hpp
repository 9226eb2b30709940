#pragma once

#include <vector>

#include "ncs/lmi/linear_matrix.hpp"
#include "ncs/mjls/markov.hpp"
#include "ncs/mjls/model.hpp"

namespace ncs::hinf {

/// Mode-dependent Lyapunov certificate for the guaranteed H-infinity cost.
struct BrlCertificate {
  std::vector<Eigen::MatrixXd> P;              ///< P_1..P_sigma, each positive definite
  double gamma = 0.0;                          ///< certified bound on the H-infinity norm
  std::vector<mjls::TransitionMatrix> vertices;  ///< transition matrices covered
};

/// Strictness margin applied to every "> 0" of the bounded-real conditions:
/// 1e-8 * (1 + largest Frobenius norm among the model matrices).
double strictness_margin(const mjls::MjlsModel& model);

/// Bounded-real LMIs of a closed loop over a transition polytope, together
/// with the variable layout needed to evaluate them at a certificate.
///
/// For every vertex v and mode i, with Pbar = sum_j p_ij^v P_j:
///
///   [ P_i - A_i^T Pbar A_i - C_i^T C_i     -(A_i^T Pbar E_i + C_i^T Ez_i)  ]
///   [ *                         mu I - E_i^T Pbar E_i - Ez_i^T Ez_i         ] >= eps I
///
/// plus P_j >= eps I, objective mu = gamma^2. The blocks are affine in p_ij,
/// so satisfaction at the vertices certifies the whole polytope.
struct BrlProblem {
  lmi::SdpProblem problem{1};
  std::vector<lmi::LinearMatrix> P;
  int mu = 0;

  /// Decision vector encoding the given certificate (mu = gamma^2).
  std::vector<double> encode(const std::vector<Eigen::MatrixXd>& P_values, double gamma) const;
};

BrlProblem build_brl_problem(const mjls::MjlsModel& closed, const mjls::TransitionPolytope& polytope);

/// Minimizes gamma over the bounded-real LMIs. Throws CertificationFailure
/// when they are infeasible and SolverFailure on any other solver outcome.
BrlCertificate brl_analysis(const mjls::MjlsModel& closed, const mjls::TransitionPolytope& polytope,
                            const lmi::SolverTolerances& tol = {});

/// Convenience overload for a single, precisely known chain.
BrlCertificate brl_analysis(const mjls::MjlsModel& closed, const mjls::TransitionMatrix& gamma,
                            const lmi::SolverTolerances& tol = {});

/// Distinct (mode, row) pairs over all vertices; rows are compared exactly.
std::vector<std::pair<int, Eigen::RowVectorXd>> distinct_mode_rows(
    const mjls::TransitionPolytope& polytope);

}  // namespace ncs::hinf
