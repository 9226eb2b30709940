#include "ncs/hinf/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "ncs/errors.hpp"

namespace ncs::hinf {

using Eigen::MatrixXd;
using lmi::LinearMatrix;

double strictness_margin(const mjls::MjlsModel& model) {
  double norm = 0.0;
  for (const auto& m : model.modes()) {
    for (const MatrixXd* mat : {&m.A, &m.B, &m.E, &m.Cz, &m.Dz, &m.Ez}) {
      norm = std::max(norm, mat->norm());
    }
  }
  return 1e-8 * (1.0 + norm);
}

std::vector<std::pair<int, Eigen::RowVectorXd>> distinct_mode_rows(
    const mjls::TransitionPolytope& polytope) {
  std::vector<std::pair<int, Eigen::RowVectorXd>> out;
  for (const auto& v : polytope.vertices()) {
    for (int i = 0; i < v.order(); ++i) {
      Eigen::RowVectorXd row = v.matrix().row(i);
      const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& e) {
        return e.first == i && e.second == row;
      });
      if (!seen) out.emplace_back(i, std::move(row));
    }
  }
  return out;
}

std::vector<double> BrlProblem::encode(const std::vector<MatrixXd>& P_values, double gamma) const {
  if (P_values.size() != P.size()) throw DimensionError("BrlProblem::encode: wrong P count");
  std::vector<double> x(static_cast<std::size_t>(problem.variable_count()), 0.0);
  for (std::size_t j = 0; j < P.size(); ++j) {
    const auto& terms = P[j].terms();
    // Symmetric variables are laid out column-wise over the lower triangle.
    const int n = P[j].rows();
    auto it = terms.begin();
    for (int c = 0; c < n; ++c) {
      for (int r = c; r < n; ++r, ++it) x[static_cast<std::size_t>(it->first)] = P_values[j](r, c);
    }
  }
  x[static_cast<std::size_t>(mu)] = gamma * gamma;
  return x;
}

BrlProblem build_brl_problem(const mjls::MjlsModel& closed, const mjls::TransitionPolytope& polytope) {
  if (polytope.order() != closed.mode_count()) {
    throw DimensionError("brl_analysis: polytope order " + std::to_string(polytope.order()) +
                         " != mode count " + std::to_string(closed.mode_count()));
  }
  const int n = closed.nx();
  const int nw = closed.nw();
  const double eps = strictness_margin(closed);

  lmi::SdpBuilder builder;
  BrlProblem out;
  for (int j = 0; j < closed.mode_count(); ++j) out.P.push_back(builder.add_symmetric(n));
  out.mu = builder.add_scalar();
  const LinearMatrix mu = LinearMatrix::term(out.mu, MatrixXd::Identity(nw, nw));

  for (const auto& P : out.P) builder.require_psd(P, eps);
  for (const auto& [i, row] : distinct_mode_rows(polytope)) {
    const auto& m = closed.mode(i);
    LinearMatrix pbar = LinearMatrix::zero(n, n);
    for (int j = 0; j < closed.mode_count(); ++j) {
      if (row(j) != 0.0) pbar += row(j) * out.P[static_cast<std::size_t>(j)];
    }
    const MatrixXd at = m.A.transpose(), et = m.E.transpose();
    const LinearMatrix top_left = out.P[static_cast<std::size_t>(i)] - at * pbar * m.A -
                                  LinearMatrix(m.Cz.transpose() * m.Cz);
    const LinearMatrix off = -(at * pbar * m.E + LinearMatrix(m.Cz.transpose() * m.Ez));
    const LinearMatrix bottom = mu - et * pbar * m.E - LinearMatrix(m.Ez.transpose() * m.Ez);
    builder.require_psd(LinearMatrix::blocks({{top_left, off}, {off.transpose(), bottom}}), eps);
  }
  builder.minimize(LinearMatrix::term(out.mu, MatrixXd::Identity(1, 1)));
  out.problem = builder.problem();
  return out;
}

BrlCertificate brl_analysis(const mjls::MjlsModel& closed, const mjls::TransitionPolytope& polytope,
                            const lmi::SolverTolerances& tol) {
  const BrlProblem brl = build_brl_problem(closed, polytope);
  const auto sol = lmi::solve_sdp(brl.problem, tol);
  if (sol.status == lmi::SdpStatus::Infeasible) {
    throw CertificationFailure("brl_analysis: bounded-real LMIs infeasible (phase-I slack " +
                               std::to_string(sol.phase1_slack) + ")");
  }
  if (sol.status != lmi::SdpStatus::Optimal) {
    throw SolverFailure("brl_analysis: solver returned " + std::string(lmi::to_string(sol.status)));
  }
  const double mu = sol.x[static_cast<std::size_t>(brl.mu)];
  if (mu >= 0.1 * tol.variable_bound) {
    throw SolverFailure("brl_analysis: gamma^2 reached the solver variable bound");
  }
  BrlCertificate cert;
  cert.gamma = std::sqrt(std::max(mu, 0.0));
  cert.vertices = polytope.vertices();
  for (const auto& P : brl.P) {
    MatrixXd value = P.value(sol.x);
    cert.P.push_back(0.5 * (value + value.transpose()));
  }
  return cert;
}

BrlCertificate brl_analysis(const mjls::MjlsModel& closed, const mjls::TransitionMatrix& gamma,
                            const lmi::SolverTolerances& tol) {
  return brl_analysis(closed, mjls::TransitionPolytope({gamma}), tol);
}

}  // namespace ncs::hinf
