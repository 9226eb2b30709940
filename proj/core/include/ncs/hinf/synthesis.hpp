#pragma once

#include <string_view>
#include <vector>

#include "ncs/hinf/analysis.hpp"

namespace ncs::hinf {

enum class DesignMethod { CommonX, Refined };

std::string_view to_string(DesignMethod method);

struct SynthesisResult {
  mjls::ControllerGain gain;
  /// Always produced by brl_analysis on close_loop(model, gain).
  BrlCertificate certificate;
  int refinement_iterations = 0;
  DesignMethod method = DesignMethod::CommonX;
  /// Certified gamma after the initial design and after every accepted
  /// refinement step; nonincreasing.
  std::vector<double> gamma_history;
};

struct DesignOptions {
  lmi::SolverTolerances solver;
  int max_refine_iterations = 25;
  /// Refinement stops once the relative gamma improvement drops below this.
  double refine_tolerance = 1e-5;
};

/// Convex state-feedback design with one matrix X shared by all modes.
///
/// Variables X (symmetric), Y, Q_1..Q_sigma (symmetric), mu; minimize mu s.t.
/// for every mode i
///
///   [ Q_i            0      (A_i X + B_i Y)^T  (Cz_i X + Dz_i Y)^T ]
///   [ 0              mu I   E_i^T              Ez_i^T              ]
///   [ A_i X + B_i Y  E_i    X                  0                   ] >= eps I
///   [ Cz_i X + Dz_i Y Ez_i  0                  I                   ]
///
/// and for every vertex row i:  X - sum_j p_ij Q_j >= eps I.
/// K = Y X^-1; P_j = X^-1 Q_j X^-1 is then a bounded-real certificate for
/// every vertex. Throws NotStabilizable when the LMIs are infeasible.
mjls::ControllerGain synth_common_x(const mjls::MjlsModel& model,
                                    const mjls::TransitionPolytope& vertices,
                                    const lmi::SolverTolerances& tol = {});
mjls::ControllerGain synth_common_x(const mjls::MjlsModel& model,
                                    const mjls::TransitionMatrix& vertex,
                                    const lmi::SolverTolerances& tol = {});

/// Alternates (a) brl_analysis for fixed K and (b) minimization of mu over K
/// for the Lyapunov matrices of (a), using the Schur form of the
/// bounded-real LMI at every vertex. Returns the best certified design.
SynthesisResult synth_refine(const mjls::MjlsModel& model, const mjls::TransitionPolytope& vertex_set,
                             const mjls::ControllerGain& initial, const DesignOptions& options = {});

/// Design for the precisely known success probability q (Bernoulli chain
/// with rows [q, 1 - q]).
SynthesisResult optimal_design(const mjls::MjlsModel& model, double q,
                               const DesignOptions& options = {});

/// One gain certified for every success probability in [q_lo, q_hi].
SynthesisResult robust_design(const mjls::MjlsModel& model, double q_lo, double q_hi,
                              const DesignOptions& options = {});

/// Polytope with vertices Gamma(q_lo), Gamma(q_hi); a single vertex when equal.
mjls::TransitionPolytope success_interval_polytope(double q_lo, double q_hi);

}  // namespace ncs::hinf
