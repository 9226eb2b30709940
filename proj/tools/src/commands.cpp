#include <fstream>

#include "json.hpp"
#include "ncs/hinf/analysis.hpp"
#include "ncs/mjls/stability.hpp"
#include "ncscli/commands.hpp"
#include "ncscli/format.hpp"

namespace ncs::cli {

netproto::CensusSummary run_protocol(const Scenario& scenario, const std::filesystem::path& dir) {
  if (!scenario.network) throw InvalidArgument("the protocol command needs a [network] section");
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "protocol.csv", std::ios::binary);
  if (!csv) throw Error("cannot write " + (dir / "protocol.csv").string());
  csv << "config_id,q\n";
  std::string line;
  const auto summary = netproto::enumerate_configurations(
      network_topology(*scenario.network), network_policy(*scenario.network),
      [&](std::uint64_t id, const netproto::NetworkConfiguration&, double q) {
        line = std::to_string(id);
        line += ',';
        line += format_double(q);
        line += '\n';
        csv << line;
      });
  std::ofstream out(dir / "protocol_summary.csv", std::ios::binary);
  out << "count,q_min,q_max\n"
      << summary.count << ',' << format_double(summary.q_min) << ',' << format_double(summary.q_max)
      << '\n';
  if (!csv || !out) throw Error("write failed in " + dir.string());
  return summary;
}

AnalysisReport run_analyze(const Scenario& scenario, const Eigen::MatrixXd& K, double q_lo, double q_hi) {
  const auto model = build_model(scenario);
  const auto closed = mjls::close_loop(model, {K, "given"});
  const auto cert = hinf::brl_analysis(closed, hinf::success_interval_polytope(q_lo, q_hi),
                                       scenario.solver.tolerances);
  AnalysisReport report;
  report.gamma = cert.gamma;
  report.q_lo = q_lo;
  report.q_hi = q_hi;
  report.mss_lo = mjls::mss_spectral_radius(closed, mjls::BernoulliRow::success(q_lo).expand());
  report.mss_hi = mjls::mss_spectral_radius(closed, mjls::BernoulliRow::success(q_hi).expand());
  return report;
}

hinf::SynthesisResult run_synthesize(const Scenario& scenario, double q_lo, double q_hi) {
  const auto model = build_model(scenario);
  const auto options = design_options(scenario);
  if (q_lo == q_hi) return hinf::optimal_design(model, q_lo, options);
  return hinf::robust_design(model, q_lo, q_hi, options);
}

std::string synthesis_json(const hinf::SynthesisResult& result, double q_lo, double q_hi) {
  auto matrix = [](const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      auto row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::json j;
  j["q_lo"] = q_lo;
  j["q_hi"] = q_hi;
  j["method"] = std::string(hinf::to_string(result.method));
  j["gamma"] = result.certificate.gamma;
  j["gamma_history"] = result.gamma_history;
  j["refinement_iterations"] = result.refinement_iterations;
  j["K"] = matrix(result.gain.K);
  j["P"] = nlohmann::json::array();
  for (const auto& p : result.certificate.P) j["P"].push_back(matrix(p));
  return j.dump(1) + "\n";
}

}  // namespace ncs::cli
