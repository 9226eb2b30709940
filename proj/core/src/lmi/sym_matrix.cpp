#include "ncs/lmi/sym_matrix.hpp"

#include <Eigen/Eigenvalues>

#include "ncs/errors.hpp"

namespace ncs::lmi {

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("SymMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw InvalidArgument("SymMatrix: non-finite entry");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(int order) {
  return SymMatrix(Eigen::MatrixXd::Identity(order, order));
}

SymMatrix SymMatrix::zero(int order) { return SymMatrix(Eigen::MatrixXd::Zero(order, order)); }

double min_eigenvalue(const SymMatrix& m) {
  if (m.order() == 0) throw DimensionError("min_eigenvalue: empty matrix");
  if (m.order() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.dense(), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalFailure("min_eigenvalue: eigensolver failed");
  return eig.eigenvalues()(0);
}

}  // namespace ncs::lmi
