#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ncs::mjls {

/// State-space data of one Markov mode:
///   x(k+1) = A x(k) + B u(k) + E w(k),   z(k) = Cz x(k) + Dz u(k) + Ez w(k).
struct ModeMatrices {
  Eigen::MatrixXd A, B, E, Cz, Dz, Ez;
};

/// Markov jump linear system. All modes share the dimensions of mode 0.
class MjlsModel {
 public:
  explicit MjlsModel(std::vector<ModeMatrices> modes);

  int mode_count() const { return static_cast<int>(modes_.size()); }
  int nx() const { return static_cast<int>(modes_.front().A.rows()); }
  int nu() const { return static_cast<int>(modes_.front().B.cols()); }
  int nw() const { return static_cast<int>(modes_.front().E.cols()); }
  int nz() const { return static_cast<int>(modes_.front().Cz.rows()); }

  const ModeMatrices& mode(int i) const { return modes_.at(static_cast<std::size_t>(i)); }
  const std::vector<ModeMatrices>& modes() const { return modes_; }

 private:
  std::vector<ModeMatrices> modes_;
};

/// u(k) = K x(k), one gain for every mode (the controller does not observe
/// whether its packet arrived).
struct ControllerGain {
  Eigen::MatrixXd K;
  std::string method;
  double certified_cost = std::numeric_limits<double>::quiet_NaN();
};

/// A_i + B_i K and Cz_i + Dz_i K; the returned model has zero B and Dz.
MjlsModel close_loop(const MjlsModel& model, const ControllerGain& gain);

}  // namespace ncs::mjls
