// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "sliceq/gateway.hpp"
#include "sliceq/sarsa_agent.hpp"
#include "sliceq/scenario.hpp"
#include "sliceq/slice_model.hpp"

namespace {

namespace fs = std::filesystem;
using namespace sliceq;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void sarsa_oracle() {
  const auto start = Clock::now();
  Rng gen(20240601);
  QTable table(3);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    for (std::size_t s = 0; s < table.states(); ++s) {
      for (std::size_t a = 0; a < table.actions(); ++a) table.at(s, a) = 200.0 * gen.uniform() - 100.0;
    }
    const std::size_t s = gen.uniform_index(8), a = gen.uniform_index(7);
    const std::size_t s2 = gen.uniform_index(8), a2 = gen.uniform_index(7);
    const double r = 2.0 * gen.uniform() - 1.0;
    const double alpha = std::nextafter(0.0, 1.0) + gen.uniform();
    const double gamma = 0.999999 * gen.uniform();
    const double q = table.at(s, a), q_next = table.at(s2, a2);
    const double direct = q + alpha * (r + gamma * q_next - q);
    sarsa_update(table, s, a, r, s2, a2, alpha, gamma);
    worst = std::max(worst, std::abs(table.at(s, a) - direct));
  }
  const double elapsed = seconds_since(start);
  report(1, "SARSA update oracle", worst <= 1e-12 && elapsed < 1.0,
         "max |error| " + fmt(worst) + " over 10^4 updates (limit 1e-12), " + fmt(elapsed) + " s (limit 1 s)");
}

void epsilon_statistics() {
  QTable table(3);
  const std::size_t state = 3;
  table.at(state, 4) = 1.0;
  Rng rng(8);
  const GlobalState s = GlobalState::from_index(state, 3);
  const int draws = 100000;
  int non_greedy = 0;
  for (int i = 0; i < draws; ++i) non_greedy += select_action(table, s, 0.08, rng).index() != 4;
  const double freq = static_cast<double>(non_greedy) / draws;
  const double expected = 0.08 * 6.0 / 7.0;
  report(2, "epsilon-greedy statistics", std::abs(freq - expected) <= 0.01,
         "non-greedy frequency " + fmt(freq) + ", expected " + fmt(expected) + " +/- 0.01");
}

void conservation() {
  const auto start = Clock::now();
  GatewaySizing sizing;
  sizing.capacity = 200;
  Gateway gateway(sizing);
  Rng rng(99), pick(100);
  const double link = gateway.link_capacity();
  const double floor = gateway.min_rate();
  std::vector<double> lambda(3);
  std::vector<std::int64_t> prev(3, 0);
  double worst_budget = 0.0, lowest_rate = link;
  long balance_errors = 0;
  for (long i = 0; i < 1'000'000; ++i) {
    const auto action = Action::from_index(pick.uniform_index(action_count(3)));
    const auto base = (i & 1) ? AdjustBase::LinkCapacity : AdjustBase::CurrentRate;
    gateway.set_flush_rates(apply_action(gateway, action, 0.1, base));
    const auto rates = gateway.flush_rates();
    worst_budget = std::max(worst_budget, std::abs(std::accumulate(rates.begin(), rates.end(), 0.0) - link) / link);
    lowest_rate = std::min(lowest_rate, *std::min_element(rates.begin(), rates.end()));
    if (i % 100 == 0) {
      for (auto& l : lambda) l = 250.0 * pick.uniform();
    }
    const auto step = gateway.step(0.1, lambda, rng);
    for (std::size_t q = 0; q < 3; ++q) {
      const auto& r = step.queues[q];
      if (r.occupancy != prev[q] + r.arrivals - r.departures - r.drops || r.occupancy < 0 ||
          r.occupancy > sizing.capacity) {
        ++balance_errors;
      }
      prev[q] = r.occupancy;
    }
  }
  const double elapsed = seconds_since(start);
  report(3, "conservation over 10^6 agent actions",
         worst_budget <= 1e-9 && lowest_rate >= floor && balance_errors == 0 && elapsed < 30.0,
         "max relative budget error " + fmt(worst_budget) + " (limit 1e-9), lowest rate " + fmt(lowest_rate) +
             " (floor " + fmt(floor) + "), balance violations " + std::to_string(balance_errors) + ", " +
             fmt(elapsed) + " s (limit 30 s)");
}

struct PhaseView {
  std::size_t begin = 0;  // first row of the phase
  std::size_t end = 0;    // one past the last row
};

std::vector<PhaseView> phases_of(const RunResult& r) {
  std::vector<PhaseView> out(r.spec.schedule.phases.size());
  std::vector<bool> seen(out.size(), false);
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    const auto k = r.spec.phase_at(static_cast<double>(i) * r.spec.dt);
    if (!k) continue;
    if (!seen[*k]) {
      out[*k].begin = i;
      seen[*k] = true;
    }
    out[*k].end = i + 1;
  }
  return out;
}

void scenario_one() {
  const auto start = Clock::now();
  const ScenarioSpec spec = ScenarioSpec::standard(1);
  const RunResult r = run_scenario(spec);
  const double elapsed = seconds_since(start);
  const auto phases = phases_of(r);
  const std::size_t hot = spec.overloaded_queues.front();
  const std::size_t n = spec.gateway.queue_count;

  // (a) rate held by each queue over each phase.
  std::vector<std::vector<double>> mean_rate(phases.size(), std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < phases.size(); ++k) {
    for (std::size_t i = phases[k].begin; i < phases[k].end; ++i) {
      for (std::size_t q = 0; q < n; ++q) mean_rate[k][q] += r.series[i].flush_rate[q];
    }
    for (auto& v : mean_rate[k]) v /= static_cast<double>(phases[k].end - phases[k].begin);
  }
  bool staircase = true;
  std::string rates_text;
  for (std::size_t k = 0; k < phases.size(); ++k) {
    rates_text += (k ? " | " : "") + std::string("(");
    for (std::size_t q = 0; q < n; ++q) rates_text += (q ? "," : "") + fmt(mean_rate[k][q]);
    rates_text += ")";
    if (k == 0) continue;
    for (std::size_t q = 0; q < n; ++q) {
      const bool up = mean_rate[k][q] > mean_rate[k - 1][q];
      const bool down = mean_rate[k][q] < mean_rate[k - 1][q];
      if ((q == hot && !up) || (q != hot && !down)) staircase = false;
    }
  }
  report(4, "scenario 1 (a) overloaded queue gains rate each phase, others lose", staircase,
         "phase-mean rates " + rates_text);

  // (b) AT fraction of the overloaded queue after the first convergence in each phase.
  bool held = true;
  std::string held_text;
  for (std::size_t k = 0; k < phases.size(); ++k) {
    std::optional<std::size_t> first_end;
    for (const auto& ep : r.episodes) {
      const std::size_t last = ep.start_step + ep.attempts - 1;
      if (ep.converged && last >= phases[k].begin && last < phases[k].end) {
        first_end = last;
        break;
      }
    }
    held_text += (k ? ", " : "") + std::string("phase ") + std::to_string(k + 1) + " ";
    if (!first_end) {
      held = false;
      held_text += "no convergence";
      continue;
    }
    std::size_t above = 0, rows = 0;
    for (std::size_t i = *first_end + 1; i < phases[k].end; ++i, ++rows) {
      above += r.series[i].occupancy[hot] > r.thresholds[hot];
    }
    const double frac = rows ? static_cast<double>(above) / static_cast<double>(rows) : 0.0;
    if (!(frac < 0.2)) held = false;
    held_text += fmt(frac, 3);
  }
  report(4, "scenario 1 (b) overloaded queue AT fraction after first convergence < 0.2", held, held_text);
  report(4, "scenario 1 (c) wall clock < 60 s", elapsed < 60.0, fmt(elapsed) + " s");
}

struct RunChecks {
  std::size_t max_attempts = 0;
  bool conserved = true;
  std::optional<double> convergence;
  std::size_t episodes = 0;
};

RunChecks check_run(const RunResult& r) {
  RunChecks c;
  c.episodes = r.episodes.size();
  for (const auto& ep : r.episodes) c.max_attempts = std::max(c.max_attempts, ep.attempts);
  const double link = r.spec.gateway.link_capacity;
  const double floor = r.spec.gateway.min_rate();
  std::vector<std::int64_t> prev(r.spec.gateway.queue_count, 0);
  for (const auto& row : r.series) {
    const double total = std::accumulate(row.flush_rate.begin(), row.flush_rate.end(), 0.0);
    if (std::abs(total - link) > 1e-9 * link) c.conserved = false;
    for (std::size_t q = 0; q < prev.size(); ++q) {
      if (row.flush_rate[q] < floor) c.conserved = false;
      if (row.occupancy[q] != prev[q] + row.arrivals[q] - row.departures[q] - row.drops[q]) c.conserved = false;
      prev[q] = row.occupancy[q];
    }
  }
  c.convergence = r.summary.convergence_rate;
  return c;
}

void scenarios_two_and_three() {
  const auto two = check_run(run_scenario(ScenarioSpec::standard(2)));
  const auto three = check_run(run_scenario(ScenarioSpec::standard(3)));
  auto rate = [](const RunChecks& c) { return c.convergence ? fmt(*c.convergence, 3) : std::string("n/a"); };
  report(5, "scenario 2 every episode within 500 attempts", two.max_attempts <= 500,
         std::to_string(two.episodes) + " episodes, longest " + std::to_string(two.max_attempts));
  report(5, "scenario 2 convergence rate >= 0.5", two.convergence && *two.convergence >= 0.5,
         "convergence rate " + rate(two));
  report(5, "scenario 3 attempt bound and conservation", three.max_attempts <= 500 && three.conserved,
         std::to_string(three.episodes) + " episodes, longest " + std::to_string(three.max_attempts) +
             ", conservation " + (three.conserved ? "held" : "broken") + ", convergence rate " + rate(three) +
             " (recorded)");
}

void process_cycle(const fs::path& scratch) {
  bool accepted_ok = true;
  std::string text;
  for (int id : {1, 2, 3}) {
    const auto spec = ScenarioSpec::standard(id);
    const double expected = spec.expected_packets_per_queue();
    accepted_ok &= expected >= 1e4;
    text += "scenario " + std::to_string(id) + " expects " + fmt(expected, 6) + " pkt/queue; ";
  }
  std::ostringstream out, err;
  ConfigOverrides o;
  o.phase_duration = 20.0;
  o.out_dir = (scratch / "undersized").string();
  const int run_code = cli::cmd_run("", o, out, err);
  const int validate_code = cli::cmd_validate("", o, out, err);
  const bool named = err.str().find("process cycle too short") != std::string::npos;
  const bool nothing_written = !fs::exists(scratch / "undersized" / "scenario1_seed42.csv");
  report(6, "process-cycle floor", accepted_ok && run_code == 2 && validate_code == 2 && named && nothing_written,
         text + "undersized run exit " + std::to_string(run_code) + ", validate exit " +
             std::to_string(validate_code));
}

void determinism(const fs::path& scratch) {
  bool identical = true;
  std::string text;
  for (int id : {1, 2, 3}) {
    std::vector<fs::path> dirs{scratch / ("a" + std::to_string(id)), scratch / ("b" + std::to_string(id))};
    for (const auto& d : dirs) {
      std::ostringstream out, err;
      ConfigOverrides o;
      o.scenario = id;
      o.seed = 42;
      o.out_dir = d.string();
      if (cli::cmd_run("", o, out, err) != cli::kOk) identical = false;
    }
    const std::string stem = "scenario" + std::to_string(id) + "_seed42";
    for (const char* ext : {".csv", ".json"}) {
      const auto a = slurp(dirs[0] / (stem + ext));
      const auto b = slurp(dirs[1] / (stem + ext));
      const bool same = !a.empty() && a == b;
      identical &= same;
      text += stem + ext + (same ? " identical" : " DIFFERS") + " (" + std::to_string(a.size()) + " bytes); ";
    }
  }
  report(7, "determinism", identical, text);
}

void model_validation() {
  const std::string dir = SLICEQ_FIXTURE_DIR;
  const auto dup = validate_model(load_slice_model(dir + "/duplicate_link.json")).violations;
  const auto dangling = validate_model(load_slice_model(dir + "/dangling_member.json")).violations;
  const std::vector<Violation> want_dup{{"duplicate interdomain link", "D1|D2"}};
  const std::vector<Violation> want_dangling{{"unresolved member", "R9"}};
  auto show = [](const std::vector<Violation>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].kind + " '" + v[i].subject + "'";
    return s + "]";
  };
  report(8, "model validation fixtures", dup == want_dup && dangling == want_dangling,
         "duplicate link -> " + show(dup) + ", dangling resource -> " + show(dangling));
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "sliceq_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  try {
    sarsa_oracle();
    epsilon_statistics();
    conservation();
    scenario_one();
    scenarios_two_and_three();
    process_cycle(scratch);
    determinism(scratch);
    model_validation();
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
    ++failures;
  }
  fs::remove_all(scratch);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " check(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
