#pragma once

#include <Eigen/Dense>

namespace ncs::lmi {

/// Dense real symmetric matrix. The input is symmetrized as (M + M^T) / 2 on
/// construction, so the stored entries are exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Throws DimensionError for non-square input, InvalidArgument for
  /// non-finite entries.
  explicit SymMatrix(const Eigen::MatrixXd& m);

  static SymMatrix identity(int order);
  static SymMatrix zero(int order);

  int order() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& dense() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

 private:
  Eigen::MatrixXd m_;
};

/// Smallest eigenvalue from a symmetric eigensolver.
double min_eigenvalue(const SymMatrix& m);

}  // namespace ncs::lmi
