#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ncs/lmi/sdp.hpp"

namespace ncs::lmi {

/// Rectangular matrix that is affine in the decision variables. This is the
/// modelling layer used to write block LMIs in their textbook layout before
/// they are lowered to symmetric AffineMatrixExpr constraints.
class LinearMatrix {
 public:
  LinearMatrix() = default;
  explicit LinearMatrix(Eigen::MatrixXd constant);

  static LinearMatrix zero(int rows, int cols);
  static LinearMatrix identity(int n);
  /// Single variable times a fixed coefficient.
  static LinearMatrix term(int variable, Eigen::MatrixXd coefficient);

  /// Assembles a block matrix; every block in a row must share its row count
  /// and every block in a column its column count.
  static LinearMatrix blocks(const std::vector<std::vector<LinearMatrix>>& grid);

  int rows() const { return static_cast<int>(constant_.rows()); }
  int cols() const { return static_cast<int>(constant_.cols()); }
  const Eigen::MatrixXd& constant() const { return constant_; }
  const std::map<int, Eigen::MatrixXd>& terms() const { return terms_; }

  LinearMatrix transpose() const;
  Eigen::MatrixXd value(std::span<const double> x) const;

  /// Lowers a square, symmetric expression; throws if any coefficient is not
  /// symmetric to within 1e-12 relative.
  AffineMatrixExpr to_symmetric() const;

  LinearMatrix& operator+=(const LinearMatrix& rhs);
  LinearMatrix& operator-=(const LinearMatrix& rhs);

  friend LinearMatrix operator+(LinearMatrix lhs, const LinearMatrix& rhs) { return lhs += rhs; }
  friend LinearMatrix operator-(LinearMatrix lhs, const LinearMatrix& rhs) { return lhs -= rhs; }
  friend LinearMatrix operator-(const LinearMatrix& m);
  friend LinearMatrix operator*(double s, const LinearMatrix& m);
  friend LinearMatrix operator*(const Eigen::MatrixXd& lhs, const LinearMatrix& m);
  friend LinearMatrix operator*(const LinearMatrix& m, const Eigen::MatrixXd& rhs);

 private:
  Eigen::MatrixXd constant_;
  std::map<int, Eigen::MatrixXd> terms_;
};

/// Declares decision variables and collects PSD constraints into an SdpProblem.
class SdpBuilder {
 public:
  int add_scalar();
  /// n x n symmetric matrix variable; n(n+1)/2 scalars.
  LinearMatrix add_symmetric(int n);
  /// rows x cols unstructured matrix variable.
  LinearMatrix add_full(int rows, int cols);

  /// expr - margin * I >= 0.
  void require_psd(const LinearMatrix& expr, double margin = 0.0);
  /// Objective from a 1x1 expression; its constant part is dropped.
  void minimize(const LinearMatrix& scalar_expr);

  int variable_count() const { return variable_count_; }
  SdpProblem problem() const;

 private:
  int variable_count_ = 0;
  std::vector<double> objective_;
  std::vector<AffineMatrixExpr> constraints_;
};

}  // namespace ncs::lmi
