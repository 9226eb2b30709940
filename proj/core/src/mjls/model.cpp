#include "ncs/mjls/model.hpp"

#include "ncs/errors.hpp"

namespace ncs::mjls {

namespace {

void require_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols,
                   const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(name + " is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  if (!m.allFinite()) throw InvalidArgument(name + " has non-finite entries");
}

}  // namespace

MjlsModel::MjlsModel(std::vector<ModeMatrices> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) throw InvalidArgument("MjlsModel: at least one mode required");
  const auto& m0 = modes_.front();
  const auto nx = m0.A.rows(), nu = m0.B.cols(), nw = m0.E.cols(), nz = m0.Cz.rows();
  if (nx < 1) throw DimensionError("MjlsModel: empty state");
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto& m = modes_[i];
    const std::string tag = "mode " + std::to_string(i + 1) + ": ";
    require_shape(m.A, nx, nx, tag + "A");
    require_shape(m.B, nx, nu, tag + "B");
    require_shape(m.E, nx, nw, tag + "E");
    require_shape(m.Cz, nz, nx, tag + "Cz");
    require_shape(m.Dz, nz, nu, tag + "Dz");
    require_shape(m.Ez, nz, nw, tag + "Ez");
  }
}

MjlsModel close_loop(const MjlsModel& model, const ControllerGain& gain) {
  if (gain.K.rows() != model.nu() || gain.K.cols() != model.nx()) {
    throw DimensionError("close_loop: K is " + std::to_string(gain.K.rows()) + "x" +
                         std::to_string(gain.K.cols()) + ", model needs " +
                         std::to_string(model.nu()) + "x" + std::to_string(model.nx()));
  }
  if (!gain.K.allFinite()) throw InvalidArgument("close_loop: non-finite gain");
  std::vector<ModeMatrices> closed;
  closed.reserve(static_cast<std::size_t>(model.mode_count()));
  for (const auto& m : model.modes()) {
    ModeMatrices c;
    c.A = m.A + m.B * gain.K;
    c.Cz = m.Cz + m.Dz * gain.K;
    c.B = Eigen::MatrixXd::Zero(m.B.rows(), m.B.cols());
    c.Dz = Eigen::MatrixXd::Zero(m.Dz.rows(), m.Dz.cols());
    c.E = m.E;
    c.Ez = m.Ez;
    closed.push_back(std::move(c));
  }
  return MjlsModel(std::move(closed));
}

}  // namespace ncs::mjls
