#pragma once

#include <span>
#include <vector>

#include "ncs/lmi/sym_matrix.hpp"

namespace ncs::lmi {

struct AffineTerm {
  int variable = 0;
  SymMatrix coefficient;
};

/// Symmetric matrix that depends affinely on a decision vector:
///   M(x) = constant + sum_k x_k * coefficient_k.
/// Terms are kept sorted by variable index; at most one term per variable.
class AffineMatrixExpr {
 public:
  AffineMatrixExpr() = default;
  explicit AffineMatrixExpr(SymMatrix constant);

  /// Adds x_variable * coefficient, accumulating into an existing term.
  void add_term(int variable, const SymMatrix& coefficient);

  int order() const { return constant_.order(); }
  const SymMatrix& constant() const { return constant_; }
  const std::vector<AffineTerm>& terms() const { return terms_; }

  /// Largest referenced variable index, -1 when the expression is constant.
  int max_variable() const;

  SymMatrix evaluate(std::span<const double> x) const;

 private:
  SymMatrix constant_;
  std::vector<AffineTerm> terms_;
};

struct FeasibilityCheck {
  bool feasible = false;
  double min_eigenvalue = 0.0;
};

/// Evaluates expr at x and tests lambda_min >= -tol.
FeasibilityCheck check_feasible(const AffineMatrixExpr& expr, std::span<const double> x,
                                double tol);

}  // namespace ncs::lmi
