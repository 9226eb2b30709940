#include "ncs/hinf/synthesis.hpp"

#include <cmath>
#include <optional>

#include <Eigen/Eigenvalues>

#include "ncs/errors.hpp"

namespace ncs::hinf {

using Eigen::MatrixXd;
using lmi::LinearMatrix;

std::string_view to_string(DesignMethod method) {
  return method == DesignMethod::CommonX ? "CommonX" : "Refined";
}

mjls::TransitionPolytope success_interval_polytope(double q_lo, double q_hi) {
  if (!(q_lo > 0.0 && q_lo <= q_hi && q_hi <= 1.0)) {
    throw InvalidArgument("success interval must satisfy 0 < q_lo <= q_hi <= 1");
  }
  std::vector<mjls::TransitionMatrix> v{mjls::BernoulliRow::success(q_lo).expand()};
  if (q_hi != q_lo) v.push_back(mjls::BernoulliRow::success(q_hi).expand());
  return mjls::TransitionPolytope(std::move(v));
}

mjls::ControllerGain synth_common_x(const mjls::MjlsModel& model,
                                    const mjls::TransitionPolytope& vertices,
                                    const lmi::SolverTolerances& tol) {
  if (vertices.order() != model.mode_count()) {
    throw DimensionError("synth_common_x: polytope order does not match mode count");
  }
  bool actuated = false;
  for (const auto& m : model.modes()) actuated = actuated || m.B.cwiseAbs().maxCoeff() > 0.0;
  if (!actuated) throw InvalidArgument("synth_common_x: B is zero in every mode");

  const int n = model.nx(), nu = model.nu(), nw = model.nw(), nz = model.nz();
  const double eps = strictness_margin(model);

  lmi::SdpBuilder builder;
  const LinearMatrix X = builder.add_symmetric(n);
  const LinearMatrix Y = builder.add_full(nu, n);
  std::vector<LinearMatrix> Q;
  for (int i = 0; i < model.mode_count(); ++i) Q.push_back(builder.add_symmetric(n));
  const int mu_var = builder.add_scalar();
  const LinearMatrix mu = LinearMatrix::term(mu_var, MatrixXd::Identity(nw, nw));

  builder.require_psd(X, eps);
  for (int i = 0; i < model.mode_count(); ++i) {
    const auto& m = model.mode(i);
    const LinearMatrix ax = m.A * X + m.B * Y;
    const LinearMatrix cx = m.Cz * X + m.Dz * Y;
    const LinearMatrix e(m.E), ez(m.Ez);
    const auto Z = [](int r, int c) { return LinearMatrix::zero(r, c); };
    builder.require_psd(
        LinearMatrix::blocks({
            {Q[static_cast<std::size_t>(i)], Z(n, nw), ax.transpose(), cx.transpose()},
            {Z(nw, n), mu, e.transpose(), ez.transpose()},
            {ax, e, X, Z(n, nz)},
            {cx, ez, Z(nz, n), LinearMatrix::identity(nz)},
        }),
        eps);
  }
  for (const auto& [i, row] : distinct_mode_rows(vertices)) {
    LinearMatrix coupling = X;
    for (int j = 0; j < model.mode_count(); ++j) {
      if (row(j) != 0.0) coupling -= row(j) * Q[static_cast<std::size_t>(j)];
    }
    builder.require_psd(coupling, eps);
  }
  builder.minimize(LinearMatrix::term(mu_var, MatrixXd::Identity(1, 1)));

  const auto sol = lmi::solve_sdp(builder.problem(), tol);
  const double q = vertices.vertices().front()(0, mjls::kReceived);
  if (sol.status == lmi::SdpStatus::Infeasible) {
    throw NotStabilizable(q, "common-X synthesis LMIs infeasible");
  }
  if (sol.status != lmi::SdpStatus::Optimal) {
    throw SolverFailure("synth_common_x: solver returned " +
                        std::string(lmi::to_string(sol.status)));
  }
  const MatrixXd x_val = X.value(sol.x);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(x_val, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues()(0) < 1e-10) {
    throw NumericalFailure("synth_common_x: X is numerically singular");
  }
  mjls::ControllerGain gain;
  gain.K = Y.value(sol.x) * x_val.inverse();
  gain.method = "CommonX";
  gain.certified_cost = std::sqrt(std::max(sol.x[static_cast<std::size_t>(mu_var)], 0.0));
  return gain;
}

mjls::ControllerGain synth_common_x(const mjls::MjlsModel& model,
                                    const mjls::TransitionMatrix& vertex,
                                    const lmi::SolverTolerances& tol) {
  return synth_common_x(model, mjls::TransitionPolytope({vertex}), tol);
}

namespace {

// Step (b) of the refinement: fixed Lyapunov matrices, free gain.
std::optional<mjls::ControllerGain> gain_step(const mjls::MjlsModel& model,
                                              const mjls::TransitionPolytope& vertex_set,
                                              const BrlCertificate& cert,
                                              const lmi::SolverTolerances& tol) {
  const int n = model.nx(), nu = model.nu(), nw = model.nw(), nz = model.nz();
  const double eps = strictness_margin(model);

  lmi::SdpBuilder builder;
  const LinearMatrix K = builder.add_full(nu, n);
  const int mu_var = builder.add_scalar();
  const LinearMatrix mu = LinearMatrix::term(mu_var, MatrixXd::Identity(nw, nw));
  const auto Z = [](int r, int c) { return LinearMatrix::zero(r, c); };

  for (const auto& [i, row] : distinct_mode_rows(vertex_set)) {
    const auto& m = model.mode(i);
    MatrixXd pbar = MatrixXd::Zero(n, n);
    for (int j = 0; j < model.mode_count(); ++j) pbar += row(j) * cert.P[static_cast<std::size_t>(j)];
    const MatrixXd w = pbar.inverse();
    const LinearMatrix ak = LinearMatrix(m.A) + m.B * K;
    const LinearMatrix ck = LinearMatrix(m.Cz) + m.Dz * K;
    const LinearMatrix e(m.E), ez(m.Ez);
    builder.require_psd(
        LinearMatrix::blocks({
            {LinearMatrix(cert.P[static_cast<std::size_t>(i)]), Z(n, nw), ak.transpose(), ck.transpose()},
            {Z(nw, n), mu, e.transpose(), ez.transpose()},
            {ak, e, LinearMatrix(0.5 * (w + w.transpose())), Z(n, nz)},
            {ck, ez, Z(nz, n), LinearMatrix::identity(nz)},
        }),
        eps);
  }
  builder.minimize(LinearMatrix::term(mu_var, MatrixXd::Identity(1, 1)));
  const auto sol = lmi::solve_sdp(builder.problem(), tol);
  if (sol.status != lmi::SdpStatus::Optimal) return std::nullopt;
  mjls::ControllerGain gain;
  gain.K = K.value(sol.x);
  gain.method = "Refined";
  return gain;
}

}  // namespace

SynthesisResult synth_refine(const mjls::MjlsModel& model, const mjls::TransitionPolytope& vertex_set,
                             const mjls::ControllerGain& initial, const DesignOptions& options) {
  SynthesisResult best;
  best.gain = initial;
  best.certificate = brl_analysis(mjls::close_loop(model, initial), vertex_set, options.solver);
  best.gain.certified_cost = best.certificate.gamma;
  best.method = DesignMethod::CommonX;
  best.gamma_history.push_back(best.certificate.gamma);

  for (int it = 1; it <= options.max_refine_iterations; ++it) {
    best.refinement_iterations = it;
    const auto candidate = gain_step(model, vertex_set, best.certificate, options.solver);
    if (!candidate) break;
    BrlCertificate cert;
    try {
      cert = brl_analysis(mjls::close_loop(model, *candidate), vertex_set, options.solver);
    } catch (const Error&) {
      break;
    }
    if (!(cert.gamma < best.certificate.gamma)) break;
    const double improvement = (best.certificate.gamma - cert.gamma) / best.certificate.gamma;
    best.gain = *candidate;
    best.gain.certified_cost = cert.gamma;
    best.certificate = std::move(cert);
    best.method = DesignMethod::Refined;
    best.gamma_history.push_back(best.certificate.gamma);
    if (improvement < options.refine_tolerance) break;
  }
  best.gain.method = std::string(to_string(best.method));
  return best;
}

SynthesisResult optimal_design(const mjls::MjlsModel& model, double q, const DesignOptions& options) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("optimal_design: q must lie in (0, 1]");
  const mjls::TransitionPolytope chain({mjls::BernoulliRow::success(q).expand()});
  mjls::ControllerGain k0;
  try {
    k0 = synth_common_x(model, chain, options.solver);
  } catch (const NotStabilizable&) {
    throw NotStabilizable(q, "no common-X certificate");
  }
  try {
    return synth_refine(model, chain, k0, options);
  } catch (const CertificationFailure& e) {
    throw NotStabilizable(q, e.what());
  }
}

SynthesisResult robust_design(const mjls::MjlsModel& model, double q_lo, double q_hi,
                              const DesignOptions& options) {
  const mjls::TransitionPolytope polytope = success_interval_polytope(q_lo, q_hi);
  mjls::ControllerGain k0;
  try {
    k0 = synth_common_x(model, polytope, options.solver);
  } catch (const NotStabilizable&) {
    // The joint design fixes one X for both vertices; the harder vertex alone
    // is less restrictive and its gain may still certify the interval.
    try {
      k0 = synth_common_x(model, mjls::BernoulliRow::success(q_lo).expand(), options.solver);
    } catch (const NotStabilizable&) {
      throw NotStabilizable(q_lo, "no common-X certificate at the lower interval end");
    }
  }
  try {
    return synth_refine(model, polytope, k0, options);
  } catch (const CertificationFailure& e) {
    throw NotStabilizable(q_lo, std::string("robust certificate failed: ") + e.what());
  }
}

}  // namespace ncs::hinf
