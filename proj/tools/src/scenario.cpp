#include "ncscli/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ncscli/format.hpp"

namespace ncs::cli {

namespace {

std::string describe(const std::vector<ScenarioIssue>& issues) {
  std::string msg = "invalid scenario:";
  for (const auto& issue : issues) {
    msg += "\n  ";
    if (issue.line > 0) msg += "line " + std::to_string(issue.line) + ": ";
    if (!issue.key.empty()) msg += issue.key + ": ";
    msg += issue.reason;
  }
  return msg;
}

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  int line = 0;
  std::vector<Entry> entries;
};

const std::vector<std::string> kSectionOrder = {"plant",  "network", "sweep", "robust",
                                                "solver", "montecarlo", "run"};

template <typename Int>
std::optional<Int> parse_int(std::string_view text) {
  text = trim(text);
  Int v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::optional<std::vector<int>> parse_int_list(std::string_view text) {
  std::vector<int> out;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    auto v = parse_int<int>(token);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k > 0) out += ' ';
    out += std::to_string(v[k]);
  }
  return out;
}

// Collects issues for one section; handlers return an error reason or "".
class SectionReader {
 public:
  SectionReader(const std::string& name, const Section& section, std::vector<ScenarioIssue>& issues)
      : name_(name), section_(section), issues_(issues) {}

  using Handler = std::function<std::string(std::string_view)>;

  void on(const std::string& key, Handler handler) { handlers_[key] = std::move(handler); }

  void real(const std::string& key, double& target, std::function<std::string(double)> check) {
    on(key, [&target, check](std::string_view v) -> std::string {
      const auto parsed = parse_double(v);
      if (!parsed || !std::isfinite(*parsed)) return "expected a finite number, got '" + std::string(v) + "'";
      if (auto err = check(*parsed); !err.empty()) return err;
      target = *parsed;
      return {};
    });
  }

  void integer(const std::string& key, int& target, int lo, int hi) {
    on(key, [&target, lo, hi](std::string_view v) -> std::string {
      const auto parsed = parse_int<int>(v);
      if (!parsed) return "expected an integer, got '" + std::string(v) + "'";
      if (*parsed < lo || *parsed > hi) {
        return "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
      }
      target = *parsed;
      return {};
    });
  }

  /// Applies handlers; reports unknown keys.
  void run(const std::set<std::string>& forbidden = {}, const std::string& forbidden_reason = {}) {
    for (const auto& e : section_.entries) {
      if (forbidden.count(e.key)) {
        issues_.push_back({e.line, name_ + "." + e.key, forbidden_reason});
        continue;
      }
      const auto it = handlers_.find(e.key);
      if (it == handlers_.end()) {
        issues_.push_back({e.line, name_ + "." + e.key, "unknown key"});
        continue;
      }
      if (auto err = it->second(e.value); !err.empty()) {
        issues_.push_back({e.line, name_ + "." + e.key, err});
      }
    }
  }

  bool has(const std::string& key) const { return line_of(key) > 0; }

  int line_of(const std::string& key) const {
    for (const auto& e : section_.entries)
      if (e.key == key) return e.line;
    return 0;
  }

  void issue(const std::string& key, const std::string& reason) {
    const int line = line_of(key);
    issues_.push_back({line > 0 ? line : section_.line, name_ + "." + key, reason});
  }

 private:
  std::string name_;
  const Section& section_;
  std::vector<ScenarioIssue>& issues_;
  std::map<std::string, Handler> handlers_;
};

std::string positive(double v) { return v > 0.0 ? "" : "must be positive"; }
std::string nonnegative(double v) { return v >= 0.0 ? "" : "must be nonnegative"; }
std::string probability(double v) { return (v > 0.0 && v <= 1.0) ? "" : "must lie in (0, 1]"; }
std::string unit_interval(double v) { return (v >= 0.0 && v <= 1.0) ? "" : "must lie in [0, 1]"; }

std::string tank_list(std::string_view v, std::vector<int>& target) {
  auto list = parse_int_list(v);
  if (!list) return "expected a list of tank indices";
  std::set<int> seen;
  for (int t : *list) {
    if (t != 1 && t != 2) return "tank index must be 1 or 2";
    if (!seen.insert(t).second) return "duplicate tank index";
  }
  target = *list;
  return {};
}

void read_plant(const Section& sec, PlantSection& plant, std::vector<ScenarioIssue>& issues) {
  SectionReader r("plant", sec, issues);
  std::string kind = "two_tank";
  for (const auto& e : sec.entries)
    if (e.key == "kind") kind = e.value;
  if (kind != "two_tank" && kind != "state_space") {
    r.issue("kind", "expected two_tank or state_space, got '" + kind + "'");
    return;
  }
  r.on("kind", [](std::string_view) { return std::string(); });
  const std::set<std::string> tank_keys = {"area1",    "area2",         "coupling",
                                           "outlet",   "gravity",       "inflow1",
                                           "inflow2",  "sample_time",   "control_tanks",
                                           "disturbance_tanks", "level_weight1", "level_weight2",
                                           "control_weight"};
  const std::set<std::string> ss_keys = {"A", "B", "E", "Cz", "Dz", "Ez"};

  if (kind == "two_tank") {
    plant.kind = PlantKind::TwoTank;
    auto& t = plant.tank;
    auto& ch = plant.channels;
    r.real("area1", t.area1, positive);
    r.real("area2", t.area2, positive);
    r.real("coupling", t.coupling, positive);
    r.real("outlet", t.outlet, positive);
    r.real("gravity", t.gravity, positive);
    r.real("inflow1", t.inflow1, nonnegative);
    r.real("inflow2", t.inflow2, nonnegative);
    r.real("sample_time", t.sample_time, positive);
    r.on("control_tanks", [&ch](std::string_view v) { return tank_list(v, ch.control_tanks); });
    r.on("disturbance_tanks", [&ch](std::string_view v) { return tank_list(v, ch.disturbance_tanks); });
    r.real("level_weight1", ch.level_weight1, nonnegative);
    r.real("level_weight2", ch.level_weight2, nonnegative);
    r.real("control_weight", ch.control_weight, nonnegative);
    r.run(ss_keys, "not used when kind = two_tank");
    for (const char* key : {"area1", "area2", "coupling", "outlet", "gravity", "inflow1", "inflow2",
                            "sample_time"}) {
      if (!r.has(key)) r.issue(key, "required for kind = two_tank");
    }
    return;
  }

  plant.kind = PlantKind::StateSpace;
  auto& ss = plant.state_space;
  std::map<std::string, Eigen::MatrixXd*> slots = {{"A", &ss.Ad},  {"B", &ss.Bd},  {"E", &ss.Ed},
                                                   {"Cz", &ss.Cz}, {"Dz", &ss.Dz}, {"Ez", &ss.Ez}};
  for (auto& [key, slot] : slots) {
    r.on(key, [slot](std::string_view v) -> std::string {
      auto m = parse_matrix(v);
      if (!m) return "expected a matrix such as '1 0; 0 1'";
      *slot = *m;
      return {};
    });
  }
  r.run(tank_keys, "not used when kind = state_space");
  bool complete = true;
  for (const char* key : {"A", "B", "E", "Cz"}) {
    if (!r.has(key)) {
      r.issue(key, "required for kind = state_space");
      complete = false;
    }
  }
  if (!complete || ss.Ad.size() == 0 || ss.Bd.size() == 0 || ss.Ed.size() == 0 || ss.Cz.size() == 0) {
    return;
  }
  const auto n = ss.Ad.rows();
  if (ss.Ad.cols() != n) r.issue("A", "must be square");
  if (ss.Bd.rows() != n) r.issue("B", "row count must match A");
  if (ss.Ed.rows() != n) r.issue("E", "row count must match A");
  if (ss.Cz.cols() != n) r.issue("Cz", "column count must match A");
  if (!r.has("Dz")) ss.Dz = Eigen::MatrixXd::Zero(ss.Cz.rows(), ss.Bd.cols());
  if (!r.has("Ez")) ss.Ez = Eigen::MatrixXd::Zero(ss.Cz.rows(), ss.Ed.cols());
  if (ss.Dz.rows() != ss.Cz.rows() || ss.Dz.cols() != ss.Bd.cols()) {
    r.issue("Dz", "must be rows(Cz) x cols(B)");
  }
  if (ss.Ez.rows() != ss.Cz.rows() || ss.Ez.cols() != ss.Ed.cols()) {
    r.issue("Ez", "must be rows(Cz) x cols(E)");
  }
}

void read_network(const Section& sec, NetworkSection& net, std::vector<ScenarioIssue>& issues) {
  SectionReader r("network", sec, issues);
  r.integer("nodes", net.nodes, 1, 1 << 24);
  r.real("p_link", net.p_link, probability);
  r.on("levels", [&net](std::string_view v) -> std::string {
    auto list = parse_int_list(v);
    if (!list) return "expected a list of positive integers";
    for (std::size_t k = 0; k < list->size(); ++k) {
      if ((*list)[k] < 1) return "MNTP levels must be >= 1";
      if (k > 0 && (*list)[k] <= (*list)[k - 1]) return "levels must be strictly increasing";
    }
    net.levels = *list;
    return {};
  });
  r.real("threshold", net.threshold, unit_interval);
  r.run();
  const double log_count = net.nodes * std::log2(static_cast<double>(net.levels.size()));
  if (log_count > 24.0 + 1e-9) {
    r.issue(r.has("nodes") ? "nodes" : "levels", "more than 2^24 configurations");
  }
}

void read_sweep(const Section& sec, SweepSection& sweep, std::vector<ScenarioIssue>& issues) {
  SectionReader r("sweep", sec, issues);
  r.integer("count", sweep.count, 1, 100000);
  r.real("q_min", sweep.q_min, probability);
  r.real("q_max", sweep.q_max, probability);
  r.run();
  if (sweep.q_min > sweep.q_max) r.issue("q_min", "must not exceed q_max");
}

void read_robust(const Section* sec, const SweepSection& sweep, bool have_network,
                 RobustSection& robust, std::vector<ScenarioIssue>& issues) {
  robust.q_lo = sweep.q_min;
  robust.q_hi = sweep.q_max;
  if (!sec) return;
  SectionReader r("robust", *sec, issues);
  r.on("source", [&robust](std::string_view v) -> std::string {
    if (v == "explicit") robust.source = RobustSource::Explicit;
    else if (v == "protocol") robust.source = RobustSource::Protocol;
    else return "expected explicit or protocol, got '" + std::string(v) + "'";
    return {};
  });
  r.real("q_lo", robust.q_lo, probability);
  r.real("q_hi", robust.q_hi, probability);
  r.run();
  if (robust.source == RobustSource::Protocol) {
    for (const char* key : {"q_lo", "q_hi"})
      if (r.has(key)) r.issue(key, "not used when source = protocol");
    if (!have_network) r.issue("source", "source = protocol needs a [network] section");
    return;
  }
  if (robust.q_lo > robust.q_hi) r.issue("q_lo", "must not exceed q_hi");
  if (robust.q_lo < sweep.q_min || robust.q_hi > sweep.q_max) {
    r.issue(r.has("q_lo") ? "q_lo" : "q_hi", "robust interval must lie inside the sweep range");
  }
}

void read_solver(const Section& sec, SolverSection& s, std::vector<ScenarioIssue>& issues) {
  SectionReader r("solver", sec, issues);
  r.real("gap", s.tolerances.gap, positive);
  r.real("feas", s.tolerances.feas, positive);
  r.integer("max_iterations", s.tolerances.max_iterations, 1, 100000);
  r.integer("max_refine_iterations", s.max_refine_iterations, 0, 10000);
  r.real("refine_tolerance", s.refine_tolerance, nonnegative);
  r.run();
}

void read_montecarlo(const Section& sec, hinf::MonteCarloOptions& mc, std::vector<ScenarioIssue>& issues) {
  SectionReader r("montecarlo", sec, issues);
  r.integer("trials", mc.trials, 1, 10000000);
  r.integer("horizon", mc.horizon, 1, 10000000);
  r.integer("power_iters", mc.power_iters, 1, 100000);
  r.integer("restarts", mc.restarts, 1, 100000);
  r.run();
}

void read_run(const Section& sec, Scenario& s, std::vector<ScenarioIssue>& issues) {
  SectionReader r("run", sec, issues);
  r.on("seed", [&s](std::string_view v) -> std::string {
    auto parsed = parse_int<std::uint64_t>(v);
    if (!parsed) return "expected an unsigned 64-bit integer";
    s.seed = *parsed;
    return {};
  });
  r.on("out", [&s](std::string_view v) -> std::string {
    if (v.empty()) return "must not be empty";
    s.out = std::string(v);
    return {};
  });
  r.integer("workers", s.workers, 0, 4096);
  r.run();
}

}  // namespace

ScenarioError::ScenarioError(std::vector<ScenarioIssue> issues)
    : Error(describe(issues)), issues_(std::move(issues)) {}

Scenario parse_scenario_text(std::string_view text) {
  std::vector<ScenarioIssue> issues;
  std::map<std::string, Section> sections;
  std::string current;
  int line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.push_back({line_no, "", "malformed section header"});
        current.clear();
        continue;
      }
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (std::find(kSectionOrder.begin(), kSectionOrder.end(), current) == kSectionOrder.end()) {
        issues.push_back({line_no, "[" + current + "]", "unknown section"});
        current.clear();
        continue;
      }
      if (sections.count(current)) {
        issues.push_back({line_no, "[" + current + "]", "duplicate section"});
        current.clear();
        continue;
      }
      sections[current].line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      issues.push_back({line_no, "", "expected 'key = value'"});
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (current.empty()) {
      // Either before any section or inside a rejected one.
      if (sections.empty()) issues.push_back({line_no, key, "key outside of a section"});
      continue;
    }
    auto& sec = sections[current];
    for (const auto& e : sec.entries) {
      if (e.key == key) {
        issues.push_back({line_no, current + "." + key, "duplicate key (first on line " +
                                                            std::to_string(e.line) + ")"});
      }
    }
    sec.entries.push_back({key, value, line_no});
  }

  Scenario s;
  for (const char* required : {"plant", "sweep"}) {
    if (!sections.count(required)) {
      issues.push_back({0, std::string("[") + required + "]", "missing section"});
    }
  }
  if (sections.count("plant")) read_plant(sections["plant"], s.plant, issues);
  if (sections.count("network")) {
    s.network.emplace();
    read_network(sections["network"], *s.network, issues);
  }
  if (sections.count("sweep")) read_sweep(sections["sweep"], s.sweep, issues);
  read_robust(sections.count("robust") ? &sections["robust"] : nullptr, s.sweep,
              s.network.has_value(), s.robust, issues);
  if (sections.count("solver")) read_solver(sections["solver"], s.solver, issues);
  if (sections.count("montecarlo")) read_montecarlo(sections["montecarlo"], s.montecarlo, issues);
  if (sections.count("run")) read_run(sections["run"], s, issues);

  if (!issues.empty()) {
    std::stable_sort(issues.begin(), issues.end(),
                     [](const ScenarioIssue& a, const ScenarioIssue& b) { return a.line < b.line; });
    throw ScenarioError(std::move(issues));
  }
  return s;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError({{0, path, "cannot open scenario file"}});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  auto kv = [&out](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  auto num = [&kv](const char* key, double v) { kv(key, format_double(v)); };

  out << "[plant]\n";
  if (s.plant.kind == PlantKind::TwoTank) {
    const auto& t = s.plant.tank;
    const auto& ch = s.plant.channels;
    kv("kind", "two_tank");
    num("area1", t.area1);
    num("area2", t.area2);
    num("coupling", t.coupling);
    num("outlet", t.outlet);
    num("gravity", t.gravity);
    num("inflow1", t.inflow1);
    num("inflow2", t.inflow2);
    num("sample_time", t.sample_time);
    kv("control_tanks", format_int_list(ch.control_tanks));
    kv("disturbance_tanks", format_int_list(ch.disturbance_tanks));
    num("level_weight1", ch.level_weight1);
    num("level_weight2", ch.level_weight2);
    num("control_weight", ch.control_weight);
  } else {
    const auto& ss = s.plant.state_space;
    kv("kind", "state_space");
    kv("A", format_matrix(ss.Ad));
    kv("B", format_matrix(ss.Bd));
    kv("E", format_matrix(ss.Ed));
    kv("Cz", format_matrix(ss.Cz));
    kv("Dz", format_matrix(ss.Dz));
    kv("Ez", format_matrix(ss.Ez));
  }

  if (s.network) {
    out << "\n[network]\n";
    kv("nodes", std::to_string(s.network->nodes));
    num("p_link", s.network->p_link);
    kv("levels", format_int_list(s.network->levels));
    num("threshold", s.network->threshold);
  }

  out << "\n[sweep]\n";
  kv("count", std::to_string(s.sweep.count));
  num("q_min", s.sweep.q_min);
  num("q_max", s.sweep.q_max);

  out << "\n[robust]\n";
  if (s.robust.source == RobustSource::Protocol) {
    kv("source", "protocol");
  } else {
    kv("source", "explicit");
    num("q_lo", s.robust.q_lo);
    num("q_hi", s.robust.q_hi);
  }

  out << "\n[solver]\n";
  num("gap", s.solver.tolerances.gap);
  num("feas", s.solver.tolerances.feas);
  kv("max_iterations", std::to_string(s.solver.tolerances.max_iterations));
  kv("max_refine_iterations", std::to_string(s.solver.max_refine_iterations));
  num("refine_tolerance", s.solver.refine_tolerance);

  out << "\n[montecarlo]\n";
  kv("trials", std::to_string(s.montecarlo.trials));
  kv("horizon", std::to_string(s.montecarlo.horizon));
  kv("power_iters", std::to_string(s.montecarlo.power_iters));
  kv("restarts", std::to_string(s.montecarlo.restarts));

  out << "\n[run]\n";
  kv("seed", std::to_string(s.seed));
  kv("out", s.out);
  kv("workers", std::to_string(s.workers));
  return out.str();
}

plant::DiscretePlant discrete_plant(const Scenario& s) {
  if (s.plant.kind == PlantKind::StateSpace) return s.plant.state_space;
  return plant::build_two_tank(s.plant.tank, s.plant.channels).discrete;
}

mjls::MjlsModel build_model(const Scenario& s) { return plant::to_mjls(discrete_plant(s)); }

std::vector<double> sweep_grid(const SweepSection& sweep) {
  if (sweep.count == 1) return {sweep.q_max};
  std::vector<double> grid(static_cast<std::size_t>(sweep.count));
  for (int k = 0; k < sweep.count; ++k) {
    grid[static_cast<std::size_t>(k)] =
        sweep.q_min + (sweep.q_max - sweep.q_min) * k / (sweep.count - 1);
  }
  grid.back() = sweep.q_max;
  return grid;
}

std::vector<netproto::HopLink> network_topology(const NetworkSection& net) {
  return netproto::uniform_chain(net.nodes, net.p_link);
}

netproto::MntpPolicy network_policy(const NetworkSection& net) {
  return netproto::MntpPolicy::uniform(net.nodes, net.levels, net.threshold);
}

netproto::ProbabilityRange robust_interval(const Scenario& s) {
  netproto::ProbabilityRange range{s.robust.q_lo, s.robust.q_hi};
  if (s.robust.source == RobustSource::Protocol) {
    if (!s.network) throw InvalidArgument("robust source = protocol needs a [network] section");
    const auto census =
        netproto::enumerate_configurations(network_topology(*s.network), network_policy(*s.network), {});
    range = {census.q_min, census.q_max};
    if (range.q_min < s.sweep.q_min || range.q_max > s.sweep.q_max) {
      throw InvalidArgument("protocol interval [" + format_double(range.q_min) + ", " +
                            format_double(range.q_max) + "] is not covered by the sweep range");
    }
  }
  range.validate();
  return range;
}

hinf::DesignOptions design_options(const Scenario& s) {
  hinf::DesignOptions opts;
  opts.solver = s.solver.tolerances;
  opts.max_refine_iterations = s.solver.max_refine_iterations;
  opts.refine_tolerance = s.solver.refine_tolerance;
  return opts;
}

}  // namespace ncs::cli
