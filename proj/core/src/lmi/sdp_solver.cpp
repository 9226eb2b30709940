#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ncs/errors.hpp"
#include "ncs/lmi/sdp.hpp"

// Infeasible-start primal-dual path following for
//
//   minimize c^T x   s.t.  S_b = F_b(x) = F_b0 + sum_i x_i F_bi  >= 0
//   maximize -sum_b <F_b0, Z_b>   s.t.  sum_b <F_bi, Z_b> = c_i,  Z_b >= 0
//
// Search direction: HKM (dZ = sym(S^-1 (sigma mu I - S Z - dS Z))) with a
// Mehrotra predictor-corrector choice of sigma.

namespace ncs::lmi {

std::string_view to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal:
      return "Optimal";
    case SdpStatus::Infeasible:
      return "Infeasible";
    case SdpStatus::MaxIterations:
      return "MaxIterations";
    case SdpStatus::NumericalFailure:
      return "NumericalFailure";
  }
  return "Unknown";
}

SdpProblem::SdpProblem(int variable_count)
    : variable_count_(variable_count), objective_(static_cast<std::size_t>(std::max(0, variable_count)), 0.0) {
  if (variable_count < 1) throw InvalidArgument("SdpProblem: needs at least one variable");
}

void SdpProblem::set_objective(std::vector<double> c) {
  if (static_cast<int>(c.size()) != variable_count_) {
    throw DimensionError("SdpProblem: objective length " + std::to_string(c.size()) +
                         " != variable count " + std::to_string(variable_count_));
  }
  objective_ = std::move(c);
}

void SdpProblem::add_constraint(AffineMatrixExpr constraint) {
  if (constraint.max_variable() >= variable_count_) {
    throw DimensionError("SdpProblem: constraint references undeclared variable " +
                         std::to_string(constraint.max_variable()));
  }
  if (constraint.order() < 1) throw DimensionError("SdpProblem: empty constraint");
  constraints_.push_back(std::move(constraint));
}

int SdpProblem::total_order() const {
  int n = 0;
  for (const auto& c : constraints_) n += c.order();
  return n;
}

void SdpProblem::validate() const {
  if (constraints_.empty()) throw InvalidArgument("SdpProblem: no constraints");
  if (static_cast<int>(objective_.size()) != variable_count_) {
    throw DimensionError("SdpProblem: objective length mismatch");
  }
  for (double v : objective_) {
    if (!std::isfinite(v)) throw InvalidArgument("SdpProblem: non-finite objective");
  }
  for (const auto& c : constraints_) {
    if (c.max_variable() >= variable_count_) {
      throw DimensionError("SdpProblem: constraint references undeclared variable");
    }
  }
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Blocks = std::vector<MatrixXd>;

struct Block {
  MatrixXd constant;
  std::vector<std::pair<int, MatrixXd>> terms;
};

struct BlockSystem {
  int m = 0;
  VectorXd c;
  std::vector<Block> blocks;
};

double inner(const MatrixXd& a, const MatrixXd& b) { return a.cwiseProduct(b).sum(); }

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double block_min_eig(const MatrixXd& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

Blocks evaluate(const BlockSystem& sys, const VectorXd& x) {
  Blocks out;
  out.reserve(sys.blocks.size());
  for (const auto& b : sys.blocks) {
    MatrixXd f = b.constant;
    for (const auto& [var, coeff] : b.terms) f += x(var) * coeff;
    out.push_back(std::move(f));
  }
  return out;
}

// Largest alpha with X + alpha * D >= 0, infinity when D does not reduce X.
double max_step(const Blocks& X, const Blocks& D) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < X.size(); ++b) {
    Eigen::LLT<MatrixXd> llt(X[b]);
    if (llt.info() != Eigen::Success) return 0.0;
    MatrixXd w = llt.matrixL().solve(D[b]);
    w = llt.matrixL().solve(w.transpose()).transpose();
    const double lambda = block_min_eig(sym(w));
    if (lambda < 0.0) alpha = std::min(alpha, -1.0 / lambda);
  }
  return alpha;
}

void add_box(BlockSystem& sys, int nvars, double bound) {
  if (!(bound > 0.0) || !std::isfinite(bound)) return;
  Block box;
  box.constant = bound * MatrixXd::Identity(2 * nvars, 2 * nvars);
  for (int i = 0; i < nvars; ++i) {
    MatrixXd coeff = MatrixXd::Zero(2 * nvars, 2 * nvars);
    coeff(2 * i, 2 * i) = -1.0;
    coeff(2 * i + 1, 2 * i + 1) = 1.0;
    box.terms.emplace_back(i, std::move(coeff));
  }
  sys.blocks.push_back(std::move(box));
}

enum class Outcome { Converged, Stopped, MaxIterations, NumericalFailure };

struct IpmResult {
  Outcome outcome = Outcome::NumericalFailure;
  VectorXd x;
  double dual_objective = 0.0;
  int iterations = 0;
};

struct IterateInfo {
  const VectorXd& x;
  double primal_objective;
  double dual_objective;
  bool residuals_small;
};

using Monitor = std::function<bool(const IterateInfo&)>;

class InteriorPoint {
 public:
  InteriorPoint(const BlockSystem& sys, const SolverTolerances& tol, double gap_tol)
      : sys_(sys), tol_(tol), gap_tol_(gap_tol) {}

  IpmResult run(VectorXd x, const Monitor& monitor) {
    IpmResult result;
    initialize(x);
    VectorXd fallback_x;
    double fallback_gap = std::numeric_limits<double>::infinity();
    double fallback_dobj = 0.0;

    double f0_norm = 0.0;
    for (const auto& b : sys_.blocks) f0_norm += b.constant.squaredNorm();
    f0_norm = std::sqrt(f0_norm);
    const double c_norm = sys_.c.norm();
    const double pres_target = std::max(0.1 * tol_.feas, 1e-14 * (1.0 + f0_norm));

    for (int iter = 0; iter <= tol_.max_iterations; ++iter) {
      result.iterations = iter;
      const Blocks fx = evaluate(sys_, x_);
      Blocks rp(fx.size());
      double rp_norm = 0.0, gap = 0.0, dobj = 0.0;
      for (std::size_t b = 0; b < fx.size(); ++b) {
        rp[b] = fx[b] - S_[b];
        rp_norm += rp[b].squaredNorm();
        gap += inner(S_[b], Z_[b]);
        dobj -= inner(sys_.blocks[b].constant, Z_[b]);
      }
      rp_norm = std::sqrt(rp_norm);
      VectorXd rd = sys_.c;
      double rd_scale = 0.0;
      for (std::size_t b = 0; b < sys_.blocks.size(); ++b) {
        for (const auto& [var, coeff] : sys_.blocks[b].terms) {
          const double term = inner(coeff, Z_[b]);
          rd(var) -= term;
          rd_scale = std::max(rd_scale, std::abs(term));
        }
      }
      const double pobj = sys_.c.dot(x_);
      if (!std::isfinite(pobj) || !std::isfinite(dobj) || !std::isfinite(gap)) {
        result.outcome = Outcome::NumericalFailure;
        break;
      }
      const bool residuals_small =
          rp_norm <= pres_target && rd.norm() <= tol_.feas * (1.0 + c_norm);
      const double rel_gap = gap / (1.0 + 0.5 * (std::abs(pobj) + std::abs(dobj)));
      if (!(gap >= 0.0)) {
        result.outcome = Outcome::NumericalFailure;
        break;
      }

      result.x = x_;
      result.dual_objective = dobj;
      // Near the boundary of feasibility the Schur system loses accuracy and
      // the iterates can stall short of the tolerances; keep the best nearly
      // optimal one.
      const double rd_norm = rd.norm();
      if (rp_norm <= pres_target && rel_gap <= 100.0 * gap_tol_ &&
          rd_norm <= std::sqrt(tol_.feas) * (1.0 + c_norm + rd_scale) &&
          rel_gap < fallback_gap) {
        fallback_gap = rel_gap;
        fallback_x = x_;
        fallback_dobj = dobj;
      }
      if (monitor && monitor(IterateInfo{x_, pobj, dobj, residuals_small})) {
        result.outcome = Outcome::Stopped;
        break;
      }
      if (residuals_small && rel_gap <= gap_tol_) {
        result.outcome = Outcome::Converged;
        break;
      }
      if (iter == tol_.max_iterations) {
        result.outcome = Outcome::MaxIterations;
        break;
      }
      if (!step(rp, rd, gap)) {
        result.outcome = Outcome::NumericalFailure;
        break;
      }
    }
    if ((result.outcome == Outcome::NumericalFailure ||
         result.outcome == Outcome::MaxIterations) &&
        fallback_x.size() > 0) {
      result.outcome = Outcome::Converged;
      result.x = fallback_x;
      result.dual_objective = fallback_dobj;
    }
    return result;
  }

 private:
  void initialize(const VectorXd& x0) {
    x_ = x0;
    const Blocks fx = evaluate(sys_, x_);
    S_.clear();
    Z_.clear();
    n_ = 0;
    double zeta_z = 1.0;
    for (std::size_t b = 0; b < sys_.blocks.size(); ++b) {
      for (const auto& [var, coeff] : sys_.blocks[b].terms) {
        zeta_z = std::max(zeta_z, (1.0 + std::abs(sys_.c(var))) / (1.0 + coeff.norm()));
      }
    }
    for (const auto& f : fx) {
      const int order = static_cast<int>(f.rows());
      n_ += order;
      const double scale = 1.0 + f.cwiseAbs().maxCoeff();
      const double lambda = block_min_eig(f);
      MatrixXd s = f;
      if (lambda < 1e-3 * scale) s += (scale - lambda) * MatrixXd::Identity(order, order);
      S_.push_back(std::move(s));
      Z_.push_back(zeta_z * MatrixXd::Identity(order, order));
    }
  }

  // Solves the Newton system for a given centering target and second-order
  // correction; returns (dx, dS, dZ).
  bool direction(const Blocks& rp, const VectorXd& rd, const Blocks& s_inv,
                 const Eigen::LLT<MatrixXd>& schur, double target, const Blocks* corr_s,
                 const Blocks* corr_z, VectorXd& dx, Blocks& dS, Blocks& dZ) const {
    const std::size_t nb = sys_.blocks.size();
    Blocks g(nb);
    VectorXd rhs = -rd;
    for (std::size_t b = 0; b < nb; ++b) {
      const int order = static_cast<int>(S_[b].rows());
      MatrixXd gb = target * s_inv[b] - Z_[b] - s_inv[b] * rp[b] * Z_[b];
      if (corr_s != nullptr) gb -= s_inv[b] * (*corr_s)[b] * (*corr_z)[b];
      g[b] = sym(gb);
      (void)order;
      for (const auto& [var, coeff] : sys_.blocks[b].terms) rhs(var) += inner(coeff, g[b]);
    }
    dx = schur.solve(rhs);
    if (!dx.allFinite()) return false;
    dS.resize(nb);
    dZ.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      MatrixXd ds = rp[b];
      for (const auto& [var, coeff] : sys_.blocks[b].terms) ds += dx(var) * coeff;
      MatrixXd dz = target * s_inv[b] - Z_[b] - s_inv[b] * ds * Z_[b];
      if (corr_s != nullptr) dz -= s_inv[b] * (*corr_s)[b] * (*corr_z)[b];
      dS[b] = sym(ds);
      dZ[b] = sym(dz);
    }
    return true;
  }

  bool step(const Blocks& rp, const VectorXd& rd, double gap) {
    const std::size_t nb = sys_.blocks.size();
    const double mu = gap / n_;

    Blocks s_inv(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      Eigen::LLT<MatrixXd> llt(S_[b]);
      if (llt.info() != Eigen::Success) return false;
      s_inv[b] = sym(llt.solve(MatrixXd::Identity(S_[b].rows(), S_[b].cols())));
    }

    // Schur complement M_ij = sum_b <F_bj, S_b^-1 F_bi Z_b>.
    MatrixXd M = MatrixXd::Zero(sys_.m, sys_.m);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& terms = sys_.blocks[b].terms;
      for (std::size_t ti = 0; ti < terms.size(); ++ti) {
        const MatrixXd t = s_inv[b] * terms[ti].second * Z_[b];
        for (std::size_t tj = ti; tj < terms.size(); ++tj) {
          const double v = inner(terms[tj].second, t);
          const int i = terms[ti].first, j = terms[tj].first;
          M(i, j) += v;
          if (i != j) M(j, i) += v;
        }
      }
    }
    M = sym(M);
    Eigen::LLT<MatrixXd> schur(M);
    double reg = 1e-14 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; schur.info() != Eigen::Success && attempt < 8; ++attempt) {
      schur.compute(M + reg * MatrixXd::Identity(sys_.m, sys_.m));
      reg *= 100.0;
    }
    if (schur.info() != Eigen::Success) return false;

    VectorXd dx;
    Blocks dS, dZ;
    if (!direction(rp, rd, s_inv, schur, 0.0, nullptr, nullptr, dx, dS, dZ)) return false;
    const double ap = std::min(1.0, tol_.step_damping * max_step(S_, dS));
    const double ad = std::min(1.0, tol_.step_damping * max_step(Z_, dZ));
    double gap_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) gap_aff += inner(S_[b] + ap * dS[b], Z_[b] + ad * dZ[b]);
    const double sigma = std::clamp(std::pow(std::max(gap_aff, 0.0) / gap, 3.0), 0.0, 1.0);

    const Blocks corr_s = dS, corr_z = dZ;
    if (!direction(rp, rd, s_inv, schur, sigma * mu, &corr_s, &corr_z, dx, dS, dZ)) return false;
    const double alpha_p = std::min(1.0, tol_.step_damping * max_step(S_, dS));
    const double alpha_d = std::min(1.0, tol_.step_damping * max_step(Z_, dZ));
    if (!(alpha_p > 0.0) || !(alpha_d > 0.0)) return false;

    x_ += alpha_p * dx;
    for (std::size_t b = 0; b < nb; ++b) {
      S_[b] = sym(S_[b] + alpha_p * dS[b]);
      Z_[b] = sym(Z_[b] + alpha_d * dZ[b]);
    }
    return x_.allFinite();
  }

  const BlockSystem& sys_;
  const SolverTolerances& tol_;
  double gap_tol_;
  VectorXd x_;
  Blocks S_, Z_;
  int n_ = 0;
};

Block to_block(const AffineMatrixExpr& expr) {
  Block b;
  b.constant = expr.constant().dense();
  for (const auto& t : expr.terms()) b.terms.emplace_back(t.variable, t.coefficient.dense());
  return b;
}

double worst_violation(const SdpProblem& problem, std::span<const double> x) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& c : problem.constraints()) {
    worst = std::min(worst, min_eigenvalue(c.evaluate(x)));
  }
  return worst;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SolverTolerances& tol) {
  problem.validate();
  const int m = problem.variable_count();

  // Phase I:  min t  s.t.  F_b(x) + t I >= 0,  t >= -1.
  BlockSystem phase1;
  phase1.m = m + 1;
  phase1.c = VectorXd::Zero(m + 1);
  phase1.c(m) = 1.0;
  double start_slack = 0.0;
  for (const auto& c : problem.constraints()) {
    Block b = to_block(c);
    start_slack = std::max(start_slack, -block_min_eig(b.constant));
    b.terms.emplace_back(m, MatrixXd::Identity(c.order(), c.order()));
    phase1.blocks.push_back(std::move(b));
  }
  phase1.blocks.push_back(Block{MatrixXd::Constant(1, 1, 1.0), {{m, MatrixXd::Constant(1, 1, 1.0)}}});
  add_box(phase1, m + 1, tol.variable_bound);

  VectorXd x0 = VectorXd::Zero(m + 1);
  x0(m) = start_slack + 1.0;

  enum class Verdict { Undecided, Feasible, Infeasible } verdict = Verdict::Undecided;
  double certified_slack = 0.0;
  const Monitor phase1_monitor = [&](const IterateInfo& it) {
    const VectorXd xu = it.x.head(m);
    const double lambda = worst_violation(problem, {xu.data(), static_cast<std::size_t>(m)});
    if (lambda > tol.feas) {
      verdict = Verdict::Feasible;
      certified_slack = -lambda;
      return true;
    }
    if (it.residuals_small && it.primal_objective <= tol.feas) {
      verdict = Verdict::Feasible;
      certified_slack = it.primal_objective;
      return true;
    }
    // Weak duality: t* >= dual objective once the dual residual is negligible.
    if (it.residuals_small && it.dual_objective > 10.0 * tol.feas) {
      verdict = Verdict::Infeasible;
      certified_slack = it.dual_objective;
      return true;
    }
    return false;
  };

  // The feasibility verdict compares t* against tol.feas, so phase I is
  // driven to an absolute gap well below that threshold.
  InteriorPoint ipm1(phase1, tol, std::min(tol.gap, 0.01 * tol.feas));
  const IpmResult r1 = ipm1.run(x0, phase1_monitor);

  SdpSolution sol;
  sol.iterations = r1.iterations;
  sol.x.assign(r1.x.data(), r1.x.data() + m);
  sol.phase1_slack = r1.x(m);

  if (r1.outcome == Outcome::NumericalFailure) {
    sol.status = SdpStatus::NumericalFailure;
    return sol;
  }
  if (r1.outcome == Outcome::Stopped) {
    sol.phase1_slack = certified_slack;
  } else if (r1.outcome == Outcome::Converged) {
    verdict = r1.x(m) <= tol.feas ? Verdict::Feasible : Verdict::Infeasible;
  } else {
    sol.status = SdpStatus::MaxIterations;
    return sol;
  }
  if (verdict == Verdict::Infeasible) {
    sol.status = SdpStatus::Infeasible;
    sol.worst_violation = worst_violation(problem, sol.x);
    return sol;
  }

  const bool feasibility_only =
      std::all_of(problem.objective().begin(), problem.objective().end(),
                  [](double v) { return v == 0.0; });
  if (!feasibility_only) {
    BlockSystem phase2;
    phase2.m = m;
    phase2.c = Eigen::Map<const VectorXd>(problem.objective().data(), m);
    for (const auto& c : problem.constraints()) phase2.blocks.push_back(to_block(c));
    add_box(phase2, m, tol.variable_bound);

    InteriorPoint ipm2(phase2, tol, tol.gap);
    const IpmResult r2 = ipm2.run(r1.x.head(m), nullptr);
    sol.iterations += r2.iterations;
    sol.x.assign(r2.x.data(), r2.x.data() + m);
    if (r2.outcome == Outcome::NumericalFailure) {
      sol.status = SdpStatus::NumericalFailure;
      return sol;
    }
    if (r2.outcome == Outcome::MaxIterations) {
      sol.status = SdpStatus::MaxIterations;
      sol.objective = phase2.c.dot(r2.x);
      sol.worst_violation = worst_violation(problem, sol.x);
      return sol;
    }
  }

  double obj = 0.0;
  for (int i = 0; i < m; ++i) obj += problem.objective()[i] * sol.x[i];
  sol.objective = obj;
  sol.worst_violation = worst_violation(problem, sol.x);
  sol.status = sol.worst_violation >= -tol.feas ? SdpStatus::Optimal : SdpStatus::NumericalFailure;
  return sol;
}

}  // namespace ncs::lmi
