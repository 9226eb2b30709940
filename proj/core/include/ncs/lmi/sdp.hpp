#pragma once

#include <string_view>
#include <vector>

#include "ncs/lmi/affine_expr.hpp"

namespace ncs::lmi {

struct SolverTolerances {
  double gap = 1e-7;            ///< relative duality gap at termination
  double feas = 1e-8;           ///< primal/dual residual and phase-I threshold
  int max_iterations = 200;     ///< per phase
  double step_damping = 0.98;   ///< fraction of the distance to the cone boundary
  double variable_bound = 1e7;  ///< |x_k| <= bound keeps every problem compact
};

enum class SdpStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

std::string_view to_string(SdpStatus status);

/// minimize c^T x  subject to  F_b(x) >= 0 (PSD) for every constraint b.
class SdpProblem {
 public:
  explicit SdpProblem(int variable_count);

  void set_objective(std::vector<double> c);
  void add_constraint(AffineMatrixExpr constraint);

  int variable_count() const { return variable_count_; }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<AffineMatrixExpr>& constraints() const { return constraints_; }

  /// Total order of the block-diagonal constraint.
  int total_order() const;

  /// Throws InvalidArgument/DimensionError when the problem is malformed.
  void validate() const;

 private:
  int variable_count_;
  std::vector<double> objective_;
  std::vector<AffineMatrixExpr> constraints_;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  std::vector<double> x;
  double objective = 0.0;
  /// Most negative eigenvalue over all constraints at x (positive means strict margin).
  double worst_violation = 0.0;
  int iterations = 0;
  /// Optimal slack t* of the phase-I problem  min t  s.t.  F_b(x) + t I >= 0.
  double phase1_slack = 0.0;
};

/// Primal-dual interior-point solver (HKM direction with Mehrotra
/// predictor-corrector). A phase-I slack problem decides feasibility first;
/// problems with an all-zero objective stop there.
SdpSolution solve_sdp(const SdpProblem& problem, const SolverTolerances& tol = {});

}  // namespace ncs::lmi
