#pragma once

#include "ncs/lmi/sdp.hpp"
#include "ncs/mjls/markov.hpp"
#include "ncs/mjls/model.hpp"

namespace ncs::mjls {

/// Second-moment operator Lambda = (Gamma^T (x) I) blockdiag(A_i (x) A_i) of
/// the closed loop; B and Dz are ignored.
Eigen::MatrixXd second_moment_operator(const MjlsModel& closed, const TransitionMatrix& gamma);

/// Spectral radius of the second-moment operator; the closed loop is
/// mean-square stable iff the result is < 1.
double mss_spectral_radius(const MjlsModel& closed, const TransitionMatrix& gamma);

/// Coupled Lyapunov test: exists P_i >= I with
/// P_i - A_i^T (sum_j p_ij P_j) A_i >= I for every mode i.
/// By homogeneity this is equivalent to the strict inequalities.
bool mss_lyapunov_feasible(const MjlsModel& closed, const TransitionMatrix& gamma,
                           const lmi::SolverTolerances& tol = {});

}  // namespace ncs::mjls
