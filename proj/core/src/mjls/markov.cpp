#include "ncs/mjls/markov.hpp"

#include <cmath>

#include "ncs/errors.hpp"

namespace ncs::mjls {

namespace {

void require_distribution(const Eigen::Ref<const Eigen::RowVectorXd>& row, const char* what) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    const double p = row(j);
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidArgument(std::string(what) + ": negative or non-finite probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw InvalidArgument(std::string(what) + ": probabilities sum to " + std::to_string(sum));
  }
}

}  // namespace

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd p) : p_(std::move(p)) {
  if (p_.rows() != p_.cols() || p_.rows() < 1) {
    throw DimensionError("TransitionMatrix: must be square and non-empty");
  }
  for (Eigen::Index i = 0; i < p_.rows(); ++i) require_distribution(p_.row(i), "TransitionMatrix");
}

BernoulliRow::BernoulliRow(Eigen::VectorXd p) : p_(std::move(p)) {
  if (p_.size() < 1) throw DimensionError("BernoulliRow: empty");
  require_distribution(p_.transpose(), "BernoulliRow");
}

BernoulliRow BernoulliRow::success(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("BernoulliRow: q outside [0, 1]");
  return BernoulliRow(Eigen::Vector2d(q, 1.0 - q));
}

TransitionMatrix BernoulliRow::expand() const {
  const auto n = p_.size();
  return TransitionMatrix(Eigen::MatrixXd(p_.transpose().replicate(n, 1)));
}

TransitionPolytope::TransitionPolytope(std::vector<TransitionMatrix> vertices)
    : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw InvalidArgument("TransitionPolytope: no vertices");
  for (const auto& v : vertices_) {
    if (v.order() != vertices_.front().order()) {
      throw DimensionError("TransitionPolytope: vertices of different order");
    }
  }
}

TransitionMatrix TransitionPolytope::combine(std::span<const double> alpha) const {
  if (alpha.size() != vertices_.size()) {
    throw DimensionError("TransitionPolytope::combine: one weight per vertex required");
  }
  double sum = 0.0;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(order(), order());
  for (std::size_t v = 0; v < alpha.size(); ++v) {
    if (alpha[v] < 0.0) throw InvalidArgument("TransitionPolytope::combine: negative weight");
    sum += alpha[v];
    p += alpha[v] * vertices_[v].matrix();
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw InvalidArgument("TransitionPolytope::combine: weights do not sum to one");
  }
  // Rounding can push a row sum off 1 by a few ulps; renormalize.
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) /= p.row(i).sum();
  return TransitionMatrix(std::move(p));
}

int next_mode(const TransitionMatrix& gamma, int current, RandomStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (int j = 0; j < gamma.order(); ++j) {
    const double p = gamma(current, j);
    if (p > 0.0) last_positive = j;
    acc += p;
    if (u < acc) return j;
  }
  return last_positive;
}

std::vector<int> sample_chain(const TransitionMatrix& gamma, int theta0, int length,
                              RandomStream& rng) {
  if (theta0 < 0 || theta0 >= gamma.order()) {
    throw InvalidArgument("sample_chain: initial mode " + std::to_string(theta0) +
                          " outside [0, " + std::to_string(gamma.order()) + ")");
  }
  if (length < 0) throw InvalidArgument("sample_chain: negative length");
  std::vector<int> modes;
  modes.reserve(static_cast<std::size_t>(length));
  int current = theta0;
  for (int k = 0; k < length; ++k) {
    modes.push_back(current);
    current = next_mode(gamma, current, rng);
  }
  return modes;
}

std::vector<int> sample_chain(const TransitionMatrix& gamma, int theta0, int length,
                              std::uint64_t seed) {
  RandomStream rng(seed, 0);
  return sample_chain(gamma, theta0, length, rng);
}

}  // namespace ncs::mjls
