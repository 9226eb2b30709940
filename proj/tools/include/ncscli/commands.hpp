#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ncs/hinf/synthesis.hpp"
#include "ncscli/scenario.hpp"

namespace ncs::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;

inline constexpr const char* kSweepHeader = "q,gamma_op,gamma_ro,mss_op,mss_ro,mc_lb,status";

struct SweepRow {
  double q = 0.0;
  double gamma_op = 0.0;
  double gamma_ro = 0.0;  ///< NaN outside the robust interval
  double mss_op = 0.0;
  double mss_ro = 0.0;
  double mc_lb = 0.0;
  std::string status;     ///< ok | not_stabilizable | solver_failure
};

struct Design {
  Eigen::MatrixXd K;
  std::vector<Eigen::MatrixXd> P;
  double gamma = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;              ///< sorted by q ascending
  std::vector<std::optional<Design>> optimal;  ///< parallel to rows
  std::optional<Design> robust;
  std::string robust_status;               ///< ok or the failure reason
  double q_lo = 0.0;
  double q_hi = 0.0;
  /// (gamma_ro - max gamma_op over the interval) / gamma_ro; NaN if undefined.
  double relative_gap = 0.0;
};

/// Deterministic Monte Carlo seed of one sweep row.
std::uint64_t row_seed(std::uint64_t master_seed, std::size_t row, bool robust);

/// Designs and certifies every grid point on a worker pool.
SweepResult run_sweep(const Scenario& scenario);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);
/// Two series (gamma_op, gamma_ro) of "q gamma" pairs, blank-line separated.
std::string plot_data(const SweepResult& result);
std::string plot_svg(const SweepResult& result);
std::string designs_json(const SweepResult& result);

/// Writes sweep.csv, plot.dat, designs.json (and plot.svg when asked).
void write_sweep(const SweepResult& result, const std::filesystem::path& dir, bool svg);

/// Streams the configuration census to dir/protocol.csv and the summary to
/// dir/protocol_summary.csv.
netproto::CensusSummary run_protocol(const Scenario& scenario, const std::filesystem::path& dir);

struct CheckResult {
  double q = 0.0;
  std::string design;  ///< optimal | robust
  std::string check;   ///< mss | mc | certificate
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
  std::string note;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  std::string csv() const;
};

/// Re-checks a sweep directory against the scenario: closed-loop
/// mean-square stability, Monte Carlo bound below the reported gamma, and the
/// stored Lyapunov certificate evaluated at the reported gamma.
ValidationReport validate_sweep(const Scenario& scenario, const std::filesystem::path& dir);

struct AnalysisReport {
  double gamma = 0.0;
  double q_lo = 0.0;
  double q_hi = 0.0;
  double mss_lo = 0.0;
  double mss_hi = 0.0;
};

/// Certified cost of u = Kx over [q_lo, q_hi].
AnalysisReport run_analyze(const Scenario& scenario, const Eigen::MatrixXd& K, double q_lo, double q_hi);

/// Optimal design at one q, or robust design over [q_lo, q_hi].
hinf::SynthesisResult run_synthesize(const Scenario& scenario, double q_lo, double q_hi);
std::string synthesis_json(const hinf::SynthesisResult& result, double q_lo, double q_hi);

}  // namespace ncs::cli
