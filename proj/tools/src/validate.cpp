#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ncs/hinf/analysis.hpp"
#include "ncs/hinf/monte_carlo.hpp"
#include "ncs/lmi/affine_expr.hpp"
#include "ncs/mjls/stability.hpp"
#include "ncscli/commands.hpp"
#include "ncscli/format.hpp"

namespace ncs::cli {

namespace {

// Allowed excess of the Monte Carlo estimate over the reported gamma.
constexpr double kMcSlack = 1.02;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("missing sweep artifact " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("designs.json: expected a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidArgument("designs.json: ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

struct StoredDesign {
  Eigen::MatrixXd K;
  std::vector<Eigen::MatrixXd> P;
};

std::optional<StoredDesign> design_from(const nlohmann::json& j) {
  if (!j.contains("K") || !j.contains("P")) return std::nullopt;
  StoredDesign d;
  d.K = matrix_from(j["K"]);
  for (const auto& p : j["P"]) d.P.push_back(matrix_from(p));
  return d;
}

class Checker {
 public:
  Checker(const Scenario& s, const mjls::MjlsModel& model, ValidationReport& report)
      : scenario_(s), model_(model), report_(report) {}

  void run(double q, const std::string& which, const StoredDesign& design, double gamma,
           const mjls::TransitionPolytope& certified_over, std::uint64_t seed) {
    std::optional<mjls::MjlsModel> closed;
    try {
      closed = mjls::close_loop(model_, {design.K, which});
    } catch (const Error& e) {
      for (const char* check : {"mss", "mc", "certificate"}) add(q, which, check, kNaN, kNaN, false, e.what());
      return;
    }
    const auto chain = mjls::BernoulliRow::success(q).expand();

    const double rho = mjls::mss_spectral_radius(*closed, chain);
    add(q, which, "mss", rho, 1.0, rho < 1.0, "");

    if (rho < 1.0) {
      auto mc = scenario_.montecarlo;
      mc.seed = seed;
      const double lb = hinf::mc_lower_bound(*closed, chain, mc);
      add(q, which, "mc", lb, kMcSlack * gamma, lb <= kMcSlack * gamma, "");
    } else {
      add(q, which, "mc", kNaN, kMcSlack * gamma, false, "closed loop is not mean-square stable");
    }

    const double tol = 10.0 * scenario_.solver.tolerances.feas;
    try {
      const auto brl = hinf::build_brl_problem(*closed, certified_over);
      const auto x = brl.encode(design.P, gamma);
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& c : brl.problem.constraints()) {
        worst = std::min(worst, lmi::check_feasible(c, x, tol).min_eigenvalue);
      }
      add(q, which, "certificate", worst, -tol, worst >= -tol, "");
    } catch (const Error& e) {
      add(q, which, "certificate", kNaN, -tol, false, e.what());
    }
  }

  void add(double q, const std::string& which, const std::string& check, double value, double limit,
           bool pass, const std::string& note) {
    report_.checks.push_back({q, which, check, value, limit, pass, note});
  }

  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

 private:
  const Scenario& scenario_;
  const mjls::MjlsModel& model_;
  ValidationReport& report_;
};

}  // namespace

bool ValidationReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ValidationReport::csv() const {
  std::string out = "q,design,check,value,limit,result,note\n";
  for (const auto& c : checks) {
    std::string note = c.note;
    for (auto& ch : note)
      if (ch == ',' || ch == '\n') ch = ' ';
    out += format_double(c.q) + ',' + c.design + ',' + c.check + ',' + format_double(c.value) + ',' +
           format_double(c.limit) + ',' + (c.pass ? "pass" : "fail") + ',' + note + '\n';
  }
  return out;
}

ValidationReport validate_sweep(const Scenario& scenario, const std::filesystem::path& dir) {
  const auto rows = parse_sweep_csv(read_file(dir / "sweep.csv"));
  const auto designs = nlohmann::json::parse(read_file(dir / "designs.json"));
  const auto model = build_model(scenario);

  ValidationReport report;
  Checker checker(scenario, model, report);
  const auto& optimal = designs.at("optimal");
  if (optimal.size() != rows.size()) {
    checker.add(Checker::kNaN, "all", "artifacts", static_cast<double>(optimal.size()),
                static_cast<double>(rows.size()), false, "designs.json and sweep.csv disagree on row count");
    return report;
  }

  const auto& robust_json = designs.at("robust");
  const auto robust = design_from(robust_json);
  std::optional<mjls::TransitionPolytope> robust_polytope;
  if (robust) {
    robust_polytope = hinf::success_interval_polytope(robust_json.at("q_lo").get<double>(),
                                                      robust_json.at("q_hi").get<double>());
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.status != "ok") continue;
    const auto& entry = optimal[i];
    const auto design = design_from(entry);
    if (!design || entry.at("q").get<double>() != row.q) {
      checker.add(row.q, "optimal", "artifacts", Checker::kNaN, Checker::kNaN, false, "no stored design for this row");
      continue;
    }
    checker.run(row.q, "optimal", *design, row.gamma_op,
                mjls::TransitionPolytope({mjls::BernoulliRow::success(row.q).expand()}),
                row_seed(scenario.seed, i, false));
    if (std::isfinite(row.gamma_ro)) {
      if (!robust) {
        checker.add(row.q, "robust", "artifacts", Checker::kNaN, Checker::kNaN, false, "no stored robust design");
        continue;
      }
      checker.run(row.q, "robust", *robust, row.gamma_ro, *robust_polytope,
                  row_seed(scenario.seed, i, true));
    }
  }
  return report;
}

}  // namespace ncs::cli
