#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "ncs/hinf/monte_carlo.hpp"
#include "ncs/mjls/stability.hpp"
#include "ncs/random.hpp"
#include "ncscli/commands.hpp"
#include "ncscli/format.hpp"
#include "ncscli/thread_pool.hpp"

namespace ncs::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Design to_design(const hinf::SynthesisResult& r) {
  return {r.gain.K, r.certificate.P, r.certificate.gamma};
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json design_json(const Design& d) {
  nlohmann::json j;
  j["gamma"] = d.gamma;
  j["K"] = matrix_json(d.K);
  j["P"] = nlohmann::json::array();
  for (const auto& p : d.P) j["P"].push_back(matrix_json(p));
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

std::uint64_t row_seed(std::uint64_t master_seed, std::size_t row, bool robust) {
  RandomStream stream(master_seed, 2 * static_cast<std::uint64_t>(row) + (robust ? 1 : 0));
  return stream.next();
}

SweepResult run_sweep(const Scenario& scenario) {
  const auto model = build_model(scenario);
  const auto grid = sweep_grid(scenario.sweep);
  const auto range = robust_interval(scenario);
  const auto options = design_options(scenario);

  SweepResult result;
  result.q_lo = range.q_min;
  result.q_hi = range.q_max;
  result.rows.resize(grid.size());
  result.optimal.resize(grid.size());

  // Tasks 0..n-1 are grid points, task n is the robust design.
  parallel_for(grid.size() + 1, scenario.workers, [&](std::size_t i) {
    if (i == grid.size()) {
      try {
        result.robust = to_design(hinf::robust_design(model, range.q_min, range.q_max, options));
        result.robust_status = "ok";
      } catch (const NotStabilizable& e) {
        result.robust_status = std::string("not_stabilizable: ") + e.what();
      } catch (const Error& e) {
        result.robust_status = std::string("solver_failure: ") + e.what();
      }
      return;
    }
    auto& row = result.rows[i];
    row = {grid[i], kNaN, kNaN, kNaN, kNaN, kNaN, "ok"};
    try {
      const auto design = hinf::optimal_design(model, row.q, options);
      const auto closed = mjls::close_loop(model, design.gain);
      const auto gamma = mjls::BernoulliRow::success(row.q).expand();
      row.gamma_op = design.certificate.gamma;
      row.mss_op = mjls::mss_spectral_radius(closed, gamma);
      if (row.mss_op < 1.0) {
        auto mc = scenario.montecarlo;
        mc.seed = row_seed(scenario.seed, i, false);
        row.mc_lb = hinf::mc_lower_bound(closed, gamma, mc);
      }
      result.optimal[i] = to_design(design);
    } catch (const NotStabilizable&) {
      row.status = "not_stabilizable";
    } catch (const Error&) {
      row.status = "solver_failure";
    }
  });

  double worst_op = -1.0;
  for (auto& row : result.rows) {
    if (!result.robust) continue;
    const mjls::ControllerGain gain{result.robust->K, "robust"};
    row.mss_ro = mjls::mss_spectral_radius(mjls::close_loop(model, gain),
                                           mjls::BernoulliRow::success(row.q).expand());
    if (row.q >= range.q_min && row.q <= range.q_max) {
      row.gamma_ro = result.robust->gamma;
      if (row.status == "ok") worst_op = std::max(worst_op, row.gamma_op);
    }
  }
  result.relative_gap = (result.robust && worst_op >= 0.0)
                            ? (result.robust->gamma - worst_op) / result.robust->gamma
                            : kNaN;
  return result;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows) {
    out += format_double(r.q) + ',' + format_double(r.gamma_op) + ',' + format_double(r.gamma_ro) +
           ',' + format_double(r.mss_op) + ',' + format_double(r.mss_ro) + ',' +
           format_double(r.mc_lb) + ',' + r.status + '\n';
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  const auto lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]) != kSweepHeader) {
    throw InvalidArgument("sweep CSV: header must be exactly " + std::string(kSweepHeader));
  }
  std::vector<SweepRow> rows;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto line = trim(lines[l]);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 7) {
      throw InvalidArgument("sweep CSV line " + std::to_string(l + 1) + ": expected 7 columns");
    }
    SweepRow row;
    double* targets[] = {&row.q, &row.gamma_op, &row.gamma_ro, &row.mss_op, &row.mss_ro, &row.mc_lb};
    for (int c = 0; c < 6; ++c) {
      const auto v = parse_double(cells[static_cast<std::size_t>(c)]);
      if (!v) {
        throw InvalidArgument("sweep CSV line " + std::to_string(l + 1) + ": bad number '" +
                              std::string(cells[static_cast<std::size_t>(c)]) + "'");
      }
      *targets[c] = *v;
    }
    row.status = std::string(trim(cells[6]));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string plot_data(const SweepResult& result) {
  std::string out = "# gamma_op: optimal design at each q\n# q gamma\n";
  for (const auto& r : result.rows)
    if (std::isfinite(r.gamma_op)) out += format_double(r.q) + ' ' + format_double(r.gamma_op) + '\n';
  out += "\n\n# gamma_ro: one robust design over [" + format_double(result.q_lo) + ", " +
         format_double(result.q_hi) + "]\n# q gamma\n";
  for (const auto& r : result.rows)
    if (std::isfinite(r.gamma_ro)) out += format_double(r.q) + ' ' + format_double(r.gamma_ro) + '\n';
  return out;
}

std::string designs_json(const SweepResult& result) {
  nlohmann::json j;
  j["optimal"] = nlohmann::json::array();
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    nlohmann::json entry = result.optimal[i] ? design_json(*result.optimal[i]) : nlohmann::json::object();
    entry["q"] = result.rows[i].q;
    entry["status"] = result.rows[i].status;
    j["optimal"].push_back(entry);
  }
  nlohmann::json robust = result.robust ? design_json(*result.robust) : nlohmann::json::object();
  robust["q_lo"] = result.q_lo;
  robust["q_hi"] = result.q_hi;
  robust["status"] = result.robust_status;
  j["robust"] = robust;
  return j.dump(1) + "\n";
}

void write_sweep(const SweepResult& result, const std::filesystem::path& dir, bool svg) {
  std::filesystem::create_directories(dir);
  write_file(dir / "sweep.csv", sweep_csv(result.rows));
  write_file(dir / "plot.dat", plot_data(result));
  write_file(dir / "designs.json", designs_json(result));
  if (svg) write_file(dir / "plot.svg", plot_svg(result));
}

}  // namespace ncs::cli
