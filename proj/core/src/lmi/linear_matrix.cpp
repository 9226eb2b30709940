#include "ncs/lmi/linear_matrix.hpp"

#include "ncs/errors.hpp"

namespace ncs::lmi {

namespace {

void require_same_shape(const LinearMatrix& a, const LinearMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

}  // namespace

LinearMatrix::LinearMatrix(Eigen::MatrixXd constant) : constant_(std::move(constant)) {}

LinearMatrix LinearMatrix::zero(int rows, int cols) {
  return LinearMatrix(Eigen::MatrixXd::Zero(rows, cols));
}

LinearMatrix LinearMatrix::identity(int n) {
  return LinearMatrix(Eigen::MatrixXd::Identity(n, n));
}

LinearMatrix LinearMatrix::term(int variable, Eigen::MatrixXd coefficient) {
  LinearMatrix m(Eigen::MatrixXd::Zero(coefficient.rows(), coefficient.cols()));
  m.terms_.emplace(variable, std::move(coefficient));
  return m;
}

LinearMatrix LinearMatrix::blocks(const std::vector<std::vector<LinearMatrix>>& grid) {
  if (grid.empty() || grid.front().empty()) throw DimensionError("blocks: empty grid");
  const std::size_t ncols = grid.front().size();
  std::vector<int> row_sizes, col_sizes;
  for (const auto& row : grid) {
    if (row.size() != ncols) throw DimensionError("blocks: ragged grid");
    row_sizes.push_back(row.front().rows());
  }
  for (const auto& blk : grid.front()) col_sizes.push_back(blk.cols());

  int total_rows = 0, total_cols = 0;
  for (int r : row_sizes) total_rows += r;
  for (int c : col_sizes) total_cols += c;

  LinearMatrix out = zero(total_rows, total_cols);
  int r0 = 0;
  for (std::size_t bi = 0; bi < grid.size(); ++bi) {
    int c0 = 0;
    for (std::size_t bj = 0; bj < ncols; ++bj) {
      const LinearMatrix& blk = grid[bi][bj];
      if (blk.rows() != row_sizes[bi] || blk.cols() != col_sizes[bj]) {
        throw DimensionError("blocks: block (" + std::to_string(bi) + "," + std::to_string(bj) +
                             ") has inconsistent size");
      }
      out.constant_.block(r0, c0, blk.rows(), blk.cols()) = blk.constant_;
      for (const auto& [var, coeff] : blk.terms_) {
        auto [it, inserted] = out.terms_.try_emplace(var);
        if (inserted) it->second = Eigen::MatrixXd::Zero(total_rows, total_cols);
        it->second.block(r0, c0, blk.rows(), blk.cols()) += coeff;
      }
      c0 += col_sizes[bj];
    }
    r0 += row_sizes[bi];
  }
  return out;
}

LinearMatrix LinearMatrix::transpose() const {
  LinearMatrix out(constant_.transpose());
  for (const auto& [var, coeff] : terms_) out.terms_.emplace(var, coeff.transpose());
  return out;
}

Eigen::MatrixXd LinearMatrix::value(std::span<const double> x) const {
  Eigen::MatrixXd m = constant_;
  for (const auto& [var, coeff] : terms_) {
    if (var >= static_cast<int>(x.size())) throw DimensionError("LinearMatrix::value: short x");
    m += x[var] * coeff;
  }
  return m;
}

AffineMatrixExpr LinearMatrix::to_symmetric() const {
  if (rows() != cols()) throw DimensionError("to_symmetric: expression is not square");
  auto check = [](const Eigen::MatrixXd& m) {
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw InvalidArgument("to_symmetric: expression is not symmetric");
    }
  };
  check(constant_);
  AffineMatrixExpr expr{SymMatrix(constant_)};
  for (const auto& [var, coeff] : terms_) {
    check(coeff);
    if (coeff.cwiseAbs().maxCoeff() == 0.0) continue;
    expr.add_term(var, SymMatrix(coeff));
  }
  return expr;
}

LinearMatrix& LinearMatrix::operator+=(const LinearMatrix& rhs) {
  require_same_shape(*this, rhs, "operator+");
  constant_ += rhs.constant_;
  for (const auto& [var, coeff] : rhs.terms_) {
    auto [it, inserted] = terms_.try_emplace(var, coeff);
    if (!inserted) it->second += coeff;
  }
  return *this;
}

LinearMatrix& LinearMatrix::operator-=(const LinearMatrix& rhs) { return *this += -rhs; }

LinearMatrix operator-(const LinearMatrix& m) { return -1.0 * m; }

LinearMatrix operator*(double s, const LinearMatrix& m) {
  LinearMatrix out(s * m.constant_);
  for (const auto& [var, coeff] : m.terms_) out.terms_.emplace(var, s * coeff);
  return out;
}

LinearMatrix operator*(const Eigen::MatrixXd& lhs, const LinearMatrix& m) {
  if (lhs.cols() != m.rows()) throw DimensionError("operator*: inner dimensions differ");
  LinearMatrix out(lhs * m.constant_);
  for (const auto& [var, coeff] : m.terms_) out.terms_.emplace(var, lhs * coeff);
  return out;
}

LinearMatrix operator*(const LinearMatrix& m, const Eigen::MatrixXd& rhs) {
  if (m.cols() != rhs.rows()) throw DimensionError("operator*: inner dimensions differ");
  LinearMatrix out(m.constant_ * rhs);
  for (const auto& [var, coeff] : m.terms_) out.terms_.emplace(var, coeff * rhs);
  return out;
}

int SdpBuilder::add_scalar() {
  objective_.push_back(0.0);
  return variable_count_++;
}

LinearMatrix SdpBuilder::add_symmetric(int n) {
  LinearMatrix out = LinearMatrix::zero(n, n);
  for (int c = 0; c < n; ++c) {
    for (int r = c; r < n; ++r) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
      e(r, c) = 1.0;
      e(c, r) = 1.0;
      out += LinearMatrix::term(add_scalar(), e);
    }
  }
  return out;
}

LinearMatrix SdpBuilder::add_full(int rows, int cols) {
  LinearMatrix out = LinearMatrix::zero(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(rows, cols);
      e(r, c) = 1.0;
      out += LinearMatrix::term(add_scalar(), e);
    }
  }
  return out;
}

void SdpBuilder::require_psd(const LinearMatrix& expr, double margin) {
  LinearMatrix shifted = expr;
  if (margin != 0.0) shifted -= margin * LinearMatrix::identity(expr.rows());
  constraints_.push_back(shifted.to_symmetric());
}

void SdpBuilder::minimize(const LinearMatrix& scalar_expr) {
  if (scalar_expr.rows() != 1 || scalar_expr.cols() != 1) {
    throw DimensionError("minimize: objective must be 1x1");
  }
  std::fill(objective_.begin(), objective_.end(), 0.0);
  for (const auto& [var, coeff] : scalar_expr.terms()) objective_.at(var) = coeff(0, 0);
}

SdpProblem SdpBuilder::problem() const {
  SdpProblem p(variable_count_);
  p.set_objective(objective_);
  for (const auto& c : constraints_) p.add_constraint(c);
  return p;
}

}  // namespace ncs::lmi
