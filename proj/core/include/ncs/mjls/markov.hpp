#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ncs/random.hpp"

namespace ncs::mjls {

/// Mode conventions used across the repository (0-based internally):
/// mode 0 = control packet received, mode 1 = control packet lost.
inline constexpr int kReceived = 0;
inline constexpr int kLost = 1;

/// Row-stochastic matrix, entry (i, j) = Pr(theta_{k+1} = j | theta_k = i).
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  /// Throws if any entry is negative or a row sum differs from 1 by > 1e-12.
  explicit TransitionMatrix(Eigen::MatrixXd p);

  int order() const { return static_cast<int>(p_.rows()); }
  double operator()(int i, int j) const { return p_(i, j); }
  const Eigen::MatrixXd& matrix() const { return p_; }

 private:
  Eigen::MatrixXd p_;
};

/// Generalized Bernoulli chain: the next mode is drawn from one fixed
/// distribution regardless of the current mode.
class BernoulliRow {
 public:
  explicit BernoulliRow(Eigen::VectorXd p);

  /// [q, 1 - q]: received with probability q, lost otherwise.
  static BernoulliRow success(double q);

  const Eigen::VectorXd& probabilities() const { return p_; }
  /// Transition matrix with identical rows.
  TransitionMatrix expand() const;

 private:
  Eigen::VectorXd p_;
};

/// Convex hull of row-stochastic vertices, all of one order.
class TransitionPolytope {
 public:
  explicit TransitionPolytope(std::vector<TransitionMatrix> vertices);

  int order() const { return vertices_.front().order(); }
  const std::vector<TransitionMatrix>& vertices() const { return vertices_; }

  /// sum_v alpha_v * vertex_v; alpha must lie on the unit simplex.
  TransitionMatrix combine(std::span<const double> alpha) const;

 private:
  std::vector<TransitionMatrix> vertices_;
};

/// Mode sequence theta(0..length-1) with theta(0) = theta0.
std::vector<int> sample_chain(const TransitionMatrix& gamma, int theta0, int length,
                              RandomStream& rng);
std::vector<int> sample_chain(const TransitionMatrix& gamma, int theta0, int length,
                              std::uint64_t seed);

/// Draws the next mode from row `current`.
int next_mode(const TransitionMatrix& gamma, int current, RandomStream& rng);

}  // namespace ncs::mjls
