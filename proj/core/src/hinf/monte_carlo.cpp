#include "ncs/hinf/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ncs/errors.hpp"
#include "ncs/mjls/stability.hpp"
#include "ncs/random.hpp"

namespace ncs::hinf {

namespace {

// Row-major copies of the closed-loop matrices; the inner loops below run
// millions of times and stay allocation-free.
struct Mode {
  std::vector<double> A, E, C, D;
};

Mode flatten(const mjls::ModeMatrices& m) {
  auto rm = [](const Eigen::MatrixXd& a) {
    std::vector<double> out(static_cast<std::size_t>(a.size()));
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) out[static_cast<std::size_t>(r * a.cols() + c)] = a(r, c);
    }
    return out;
  };
  return {rm(m.A), rm(m.E), rm(m.Cz), rm(m.Ez)};
}

class Propagator {
 public:
  Propagator(const mjls::MjlsModel& closed, int horizon)
      : nx_(closed.nx()), nw_(closed.nw()), nz_(closed.nz()), horizon_(horizon) {
    for (const auto& m : closed.modes()) modes_.push_back(flatten(m));
    x_.resize(static_cast<std::size_t>(nx_));
    xn_.resize(static_cast<std::size_t>(nx_));
    lam_.resize(static_cast<std::size_t>(nx_));
    lamn_.resize(static_cast<std::size_t>(nx_));
    z_.resize(static_cast<std::size_t>(nz_ * horizon_));
  }

  // Adds T^T T w to grad and returns |T w|^2 for one mode sequence.
  double apply(const std::vector<int>& seq, const std::vector<double>& w, std::vector<double>& grad) {
    std::fill(x_.begin(), x_.end(), 0.0);
    double energy = 0.0;
    for (int k = 0; k < horizon_; ++k) {
      const Mode& m = modes_[static_cast<std::size_t>(seq[static_cast<std::size_t>(k)])];
      const double* wk = &w[static_cast<std::size_t>(k * nw_)];
      double* zk = &z_[static_cast<std::size_t>(k * nz_)];
      for (int r = 0; r < nz_; ++r) {
        double acc = 0.0;
        for (int c = 0; c < nx_; ++c) acc += m.C[static_cast<std::size_t>(r * nx_ + c)] * x_[static_cast<std::size_t>(c)];
        for (int c = 0; c < nw_; ++c) acc += m.D[static_cast<std::size_t>(r * nw_ + c)] * wk[c];
        zk[r] = acc;
        energy += acc * acc;
      }
      for (int r = 0; r < nx_; ++r) {
        double acc = 0.0;
        for (int c = 0; c < nx_; ++c) acc += m.A[static_cast<std::size_t>(r * nx_ + c)] * x_[static_cast<std::size_t>(c)];
        for (int c = 0; c < nw_; ++c) acc += m.E[static_cast<std::size_t>(r * nw_ + c)] * wk[c];
        xn_[static_cast<std::size_t>(r)] = acc;
      }
      std::swap(x_, xn_);
    }
    std::fill(lam_.begin(), lam_.end(), 0.0);
    for (int k = horizon_ - 1; k >= 0; --k) {
      const Mode& m = modes_[static_cast<std::size_t>(seq[static_cast<std::size_t>(k)])];
      const double* zk = &z_[static_cast<std::size_t>(k * nz_)];
      double* gk = &grad[static_cast<std::size_t>(k * nw_)];
      for (int c = 0; c < nw_; ++c) {
        double acc = 0.0;
        for (int r = 0; r < nx_; ++r) acc += m.E[static_cast<std::size_t>(r * nw_ + c)] * lam_[static_cast<std::size_t>(r)];
        for (int r = 0; r < nz_; ++r) acc += m.D[static_cast<std::size_t>(r * nw_ + c)] * zk[r];
        gk[c] += acc;
      }
      for (int c = 0; c < nx_; ++c) {
        double acc = 0.0;
        for (int r = 0; r < nx_; ++r) acc += m.A[static_cast<std::size_t>(r * nx_ + c)] * lam_[static_cast<std::size_t>(r)];
        for (int r = 0; r < nz_; ++r) acc += m.C[static_cast<std::size_t>(r * nx_ + c)] * zk[r];
        lamn_[static_cast<std::size_t>(c)] = acc;
      }
      std::swap(lam_, lamn_);
    }
    return energy;
  }

 private:
  int nx_, nw_, nz_, horizon_;
  std::vector<Mode> modes_;
  std::vector<double> x_, xn_, lam_, lamn_, z_;
};

double squared_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return s;
}

}  // namespace

double mc_lower_bound(const mjls::MjlsModel& closed, const mjls::TransitionMatrix& gamma,
                      const MonteCarloOptions& options) {
  if (options.trials < 1 || options.horizon < 1 || options.power_iters < 1 || options.restarts < 1) {
    throw InvalidArgument("mc_lower_bound: trials, horizon, power_iters and restarts must be >= 1");
  }
  const double rho = mjls::mss_spectral_radius(closed, gamma);
  if (!(rho < 1.0)) {
    throw InvalidArgument("mc_lower_bound: closed loop is not mean-square stable (rho = " +
                          std::to_string(rho) + ")");
  }
  const int sigma = closed.mode_count();
  const int horizon = options.horizon;
  const std::size_t wlen = static_cast<std::size_t>(horizon * closed.nw());
  Propagator prop(closed, horizon);

  double best = 0.0;
  for (int theta0 = 0; theta0 < sigma; ++theta0) {
    std::vector<std::vector<int>> sequences;
    sequences.reserve(static_cast<std::size_t>(options.trials));
    for (int t = 0; t < options.trials; ++t) {
      RandomStream rng(options.seed, 2 * static_cast<std::uint64_t>(theta0 * options.trials + t));
      sequences.push_back(mjls::sample_chain(gamma, theta0, horizon, rng));
    }
    for (int r = 0; r < options.restarts; ++r) {
      RandomStream rng(options.seed, 2 * static_cast<std::uint64_t>(theta0 * options.restarts + r) + 1);
      std::vector<double> w(wlen), grad(wlen);
      for (double& e : w) e = rng.normal();
      for (int it = 0; it < options.power_iters; ++it) {
        const double wnorm2 = squared_norm(w);
        std::fill(grad.begin(), grad.end(), 0.0);
        double energy = 0.0;
        for (const auto& seq : sequences) energy += prop.apply(seq, w, grad);
        best = std::max(best, energy / (options.trials * wnorm2));
        const double gnorm = std::sqrt(squared_norm(grad));
        if (!(gnorm > 0.0)) break;
        for (std::size_t k = 0; k < wlen; ++k) w[k] = grad[k] / gnorm;
      }
    }
  }
  return std::sqrt(best);
}

}  // namespace ncs::hinf
