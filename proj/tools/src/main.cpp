#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ncs/mjls/markov.hpp"
#include "ncscli/commands.hpp"
#include "ncscli/format.hpp"

using namespace ncs;
using namespace ncs::cli;

namespace {

struct CommonFlags {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  std::optional<double> tol_gap;
  std::optional<double> tol_feas;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--scenario", f.scenario, "scenario file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (overrides run.out)");
  cmd->add_option("--seed", f.seed, "master seed (overrides run.seed)");
  cmd->add_option("--grid", f.grid, "number of q grid points (overrides sweep.count)")
      ->check(CLI::Range(1, 100000));
  cmd->add_option("--tol-gap", f.tol_gap, "relative duality gap")->check(CLI::PositiveNumber);
  cmd->add_option("--tol-feas", f.tol_feas, "feasibility tolerance")->check(CLI::PositiveNumber);
}

Scenario load(const CommonFlags& f) {
  Scenario s = parse_scenario(f.scenario);
  if (!f.out.empty()) s.out = f.out;
  if (f.seed) s.seed = *f.seed;
  if (f.grid) s.sweep.count = *f.grid;
  if (f.tol_gap) s.solver.tolerances.gap = *f.tol_gap;
  if (f.tol_feas) s.solver.tolerances.feas = *f.tol_feas;
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

std::pair<double, double> interval(const Scenario& s, std::optional<double> q,
                                   std::optional<double> q_lo, std::optional<double> q_hi) {
  if (q) return {*q, *q};
  auto range = robust_interval(s);
  return {q_lo.value_or(range.q_min), q_hi.value_or(range.q_max)};
}

int sweep(const Scenario& s, bool svg) {
  const auto result = run_sweep(s);
  write_sweep(result, s.out, svg);
  std::cout << sweep_csv(result.rows);
  std::cout << "robust interval [" << format_double(result.q_lo) << ", " << format_double(result.q_hi)
            << "]: " << result.robust_status << "\n";
  if (result.robust) {
    std::cout << "gamma_ro = " << format_double(result.robust->gamma)
              << ", relative gap to worst gamma_op = " << format_double(result.relative_gap) << "\n";
  }
  std::cout << "wrote " << (std::filesystem::path(s.out) / "sweep.csv").string() << "\n";
  bool solver_trouble = result.robust_status.rfind("solver_failure", 0) == 0;
  for (const auto& r : result.rows) solver_trouble |= r.status == "solver_failure";
  return solver_trouble ? kExitSolver : kExitOk;
}

int protocol(const Scenario& s) {
  const auto summary = run_protocol(s, s.out);
  std::cout << "configurations " << summary.count << ", q_min " << format_double(summary.q_min)
            << ", q_max " << format_double(summary.q_max) << "\n";
  return kExitOk;
}

int validate(const Scenario& s) {
  const auto report = validate_sweep(s, s.out);
  const auto csv = report.csv();
  write_text(std::filesystem::path(s.out) / "validation.csv", csv);
  std::cout << csv;
  std::size_t failed = 0;
  for (const auto& c : report.checks) failed += c.pass ? 0 : 1;
  std::cout << report.checks.size() - failed << " passed, " << failed << " failed\n";
  return report.all_pass() ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"State-feedback design and certification for control loops with Markov packet loss"};
  app.require_subcommand(1);

  CommonFlags flags;
  bool svg = false;
  std::string gain_text;
  std::optional<double> q, q_lo, q_hi;

  auto* sweep_cmd = app.add_subcommand("sweep", "optimal and robust designs over the q grid");
  add_common(sweep_cmd, flags);
  sweep_cmd->add_flag("--svg", svg, "also render plot.svg");

  auto* protocol_cmd = app.add_subcommand("protocol", "enumerate MNTP configurations");
  add_common(protocol_cmd, flags);

  auto* validate_cmd = app.add_subcommand("validate", "re-check the artifacts of a sweep");
  add_common(validate_cmd, flags);

  auto* analyze_cmd = app.add_subcommand("analyze", "certified cost of a given gain");
  add_common(analyze_cmd, flags);
  analyze_cmd->add_option("--gain", gain_text, "gain K as '1 0; 0 1' (default zero)");
  analyze_cmd->add_option("--q", q, "single success probability")->check(CLI::Range(0.0, 1.0));
  analyze_cmd->add_option("--q-lo", q_lo, "interval lower end")->check(CLI::Range(0.0, 1.0));
  analyze_cmd->add_option("--q-hi", q_hi, "interval upper end")->check(CLI::Range(0.0, 1.0));

  auto* synth_cmd = app.add_subcommand("synthesize", "design one gain");
  add_common(synth_cmd, flags);
  synth_cmd->add_option("--q", q, "optimal design at this q (default: robust interval)")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--q-lo", q_lo, "interval lower end")->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--q-hi", q_hi, "interval upper end")->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Scenario s;
  try {
    s = load(flags);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*sweep_cmd) return sweep(s, svg);
    if (*protocol_cmd) return protocol(s);
    if (*validate_cmd) return validate(s);

    const auto [lo, hi] = interval(s, q, q_lo, q_hi);
    if (!(lo > 0.0 && lo <= hi && hi <= 1.0)) {
      std::cerr << "need 0 < q_lo <= q_hi <= 1\n";
      return kExitUsage;
    }
    const auto model = build_model(s);
    if (*analyze_cmd) {
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(model.nu(), model.nx());
      if (!gain_text.empty()) {
        auto parsed = parse_matrix(gain_text);
        if (!parsed || parsed->rows() != model.nu() || parsed->cols() != model.nx()) {
          std::cerr << "--gain must be a " << model.nu() << "x" << model.nx() << " matrix\n";
          return kExitUsage;
        }
        K = *parsed;
      }
      const auto r = run_analyze(s, K, lo, hi);
      std::cout << "gamma " << format_double(r.gamma) << "\nmss_radius_at_q_lo "
                << format_double(r.mss_lo) << "\nmss_radius_at_q_hi " << format_double(r.mss_hi) << "\n";
      return kExitOk;
    }
    const auto result = run_synthesize(s, lo, hi);
    const auto json = synthesis_json(result, lo, hi);
    write_text(std::filesystem::path(s.out) / "synthesis.json", json);
    std::cout << json;
    return kExitOk;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}
