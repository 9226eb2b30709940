#include "ncs/lmi/affine_expr.hpp"

#include <algorithm>

#include "ncs/errors.hpp"

namespace ncs::lmi {

AffineMatrixExpr::AffineMatrixExpr(SymMatrix constant) : constant_(std::move(constant)) {}

void AffineMatrixExpr::add_term(int variable, const SymMatrix& coefficient) {
  if (variable < 0) throw InvalidArgument("AffineMatrixExpr: negative variable index");
  if (coefficient.order() != order()) {
    throw DimensionError("AffineMatrixExpr: coefficient order " +
                         std::to_string(coefficient.order()) + " != " + std::to_string(order()));
  }
  auto it = std::lower_bound(terms_.begin(), terms_.end(), variable,
                             [](const AffineTerm& t, int v) { return t.variable < v; });
  if (it != terms_.end() && it->variable == variable) {
    it->coefficient = SymMatrix(it->coefficient.dense() + coefficient.dense());
  } else {
    terms_.insert(it, AffineTerm{variable, coefficient});
  }
}

int AffineMatrixExpr::max_variable() const {
  return terms_.empty() ? -1 : terms_.back().variable;
}

SymMatrix AffineMatrixExpr::evaluate(std::span<const double> x) const {
  if (max_variable() >= static_cast<int>(x.size())) {
    throw DimensionError("AffineMatrixExpr: decision vector has " + std::to_string(x.size()) +
                         " entries, expression references variable " +
                         std::to_string(max_variable()));
  }
  Eigen::MatrixXd m = constant_.dense();
  for (const auto& t : terms_) m += x[t.variable] * t.coefficient.dense();
  return SymMatrix(m);
}

FeasibilityCheck check_feasible(const AffineMatrixExpr& expr, std::span<const double> x,
                                double tol) {
  const double lambda = min_eigenvalue(expr.evaluate(x));
  return {lambda >= -tol, lambda};
}

}  // namespace ncs::lmi
