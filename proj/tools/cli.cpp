#include "cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "sliceq/error.hpp"
#include "sliceq/slice_model.hpp"

namespace sliceq::cli {

namespace fs = std::filesystem;

std::filesystem::path resolve_output_dir(const RunConfig& config) {
  if (config.output_dir) {
    return *config.output_dir;
  }
  if (const char* env = std::getenv("SLICEQ_OUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return ".";
}

namespace {

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write '" + path.string() + "'");
  }
  out << bytes;
  if (!out) {
    throw Error("failed writing '" + path.string() + "'");
  }
}

void print_violations(const ConfigError& e, std::ostream& err) {
  err << "invalid configuration:\n";
  for (const auto& v : e.violations()) {
    err << "  " << v << "\n";
  }
}

std::string stem_for(const ScenarioSpec& spec) {
  return "scenario" + std::to_string(spec.id) + "_seed" + std::to_string(spec.seed);
}

struct Stat {
  std::vector<double> values;

  void add(double v) { values.push_back(v); }

  nlohmann::json to_json() const {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean = values.empty() ? 0.0 : mean / n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double stddev = values.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return {{"mean", mean}, {"stddev", stddev}, {"samples", values.size()}};
  }
};

}  // namespace

std::vector<fs::path> write_outputs(const RunResult& result, const RunConfig& config, const fs::path& dir,
                                    const std::string& stem) {
  fs::create_directories(dir);
  const fs::path csv = dir / (stem + ".csv");
  const fs::path json = dir / (stem + ".json");
  write_file(csv, export_csv(result.series, result.spec.gateway.queue_count));
  write_file(json, export_json(result.series, result.summary, to_json(config)));
  return {csv, json};
}

std::string format_summary(const RunResult& result) {
  std::ostringstream os;
  const auto& s = result.summary;
  os << "scenario " << result.spec.id << ", seed " << result.seed << ", " << result.series.size()
     << " steps of " << result.spec.dt << " s\n";
  os << std::fixed << std::setprecision(3);
  for (std::size_t q = 0; q < s.queues.size(); ++q) {
    const auto& qs = s.queues[q];
    os << "  queue " << q << (result.spec.is_overloaded(q) ? " (overloaded)" : "")
       << ": AT fraction " << qs.at_fraction << ", drops " << qs.total_drops << ", bandwidth "
       << qs.measured.bandwidth << " pkt/s, loss " << qs.measured.loss << ", delay ";
    if (qs.measured.delay) {
      os << *qs.measured.delay << " s\n";
    } else {
      os << "n/a\n";
    }
  }
  os << "  agent: " << s.invocations << " invocations, mean attempts " << s.mean_attempts
     << ", convergence rate ";
  if (s.convergence_rate) {
    os << *s.convergence_rate << "\n";
  } else {
    os << "n/a\n";
  }
  return os.str();
}

nlohmann::json aggregate(std::span<const RunSummary> summaries) {
  std::size_t n = 0;
  for (const auto& s : summaries) n = std::max(n, s.queues.size());
  std::vector<std::map<std::string, Stat>> queues(n);
  std::map<std::string, Stat> global;
  for (const auto& s : summaries) {
    for (std::size_t q = 0; q < s.queues.size(); ++q) {
      const auto& qs = s.queues[q];
      queues[q]["at_fraction"].add(qs.at_fraction);
      queues[q]["total_drops"].add(static_cast<double>(qs.total_drops));
      queues[q]["bandwidth"].add(qs.measured.bandwidth);
      queues[q]["loss"].add(qs.measured.loss);
      if (qs.measured.delay) queues[q]["delay"].add(*qs.measured.delay);
    }
    global["agent_invocations"].add(static_cast<double>(s.invocations));
    global["mean_attempts"].add(s.mean_attempts);
    if (s.convergence_rate) global["convergence_rate"].add(*s.convergence_rate);
  }
  nlohmann::json out = {{"runs", summaries.size()}, {"queues", nlohmann::json::array()}};
  for (const auto& stats : queues) {
    nlohmann::json q = nlohmann::json::object();
    for (const auto& [name, stat] : stats) q[name] = stat.to_json();
    out["queues"].push_back(q);
  }
  for (const auto& [name, stat] : global) out[name] = stat.to_json();
  return out;
}

int cmd_run(const std::string& config_path, const ConfigOverrides& overrides, std::ostream& out,
            std::ostream& err) {
  RunConfig config;
  try {
    config = load_run_config(config_path, overrides);
  } catch (const ConfigError& e) {
    print_violations(e, err);
    return kConfigInvalid;
  }
  try {
    const RunResult result = run_scenario(config.scenario);
    const auto files = write_outputs(result, config, resolve_output_dir(config), stem_for(config.scenario));
    out << format_summary(result);
    for (const auto& f : files) out << "wrote " << f.string() << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    print_violations(e, err);
    return kConfigInvalid;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << "\n";
    return kRunFailure;
  }
}

int cmd_sweep(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
              const ConfigOverrides& overrides, unsigned jobs, std::ostream& out, std::ostream& err) {
  RunConfig base;
  try {
    base = load_run_config(config_path, overrides);
  } catch (const ConfigError& e) {
    print_violations(e, err);
    return kConfigInvalid;
  }
  if (seeds.empty()) {
    err << "sweep: no seeds given\n";
    return kConfigInvalid;
  }

  const fs::path dir = resolve_output_dir(base);
  std::vector<std::optional<RunResult>> results(seeds.size());
  std::vector<std::string> failures(seeds.size());
  std::atomic<std::size_t> next{0};

  // Runs share nothing but the result slots they own.
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      RunConfig config = base;
      config.scenario.seed = seeds[i];
      try {
        RunResult result = run_scenario(config.scenario);
        write_outputs(result, config, dir,
                      "scenario" + std::to_string(config.scenario.id) + "_run" + std::to_string(i) +
                          "_seed" + std::to_string(seeds[i]));
        results[i] = std::move(result);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const unsigned threads = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(seeds.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<RunSummary> summaries;
  bool failed = false;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (results[i]) {
      out << "run " << i << ": " << format_summary(*results[i]);
      summaries.push_back(results[i]->summary);
    } else {
      failed = true;
      err << "run " << i << " (seed " << seeds[i] << ") failed: " << failures[i] << "\n";
    }
  }
  nlohmann::json doc = {{"config", to_json(base)}, {"seeds", seeds}, {"aggregate", aggregate(summaries)}};
  doc["config"].erase("seed");
  try {
    fs::create_directories(dir);
    const fs::path path = dir / ("scenario" + std::to_string(base.scenario.id) + "_sweep.json");
    write_file(path, doc.dump(1) + "\n");
    out << "aggregate over " << summaries.size() << " runs written to " << path.string() << "\n";
  } catch (const std::exception& e) {
    err << "sweep: " << e.what() << "\n";
    return kRunFailure;
  }
  return failed ? kRunFailure : kOk;
}

int cmd_validate(const std::string& config_path, const ConfigOverrides& overrides, std::ostream& out,
                 std::ostream& err) {
  try {
    const RunConfig config = load_run_config(config_path, overrides);
    out << "configuration valid: scenario " << config.scenario.id << ", "
        << config.scenario.gateway.queue_count << " queues, " << config.scenario.step_count()
        << " steps, " << config.scenario.expected_packets_per_queue()
        << " expected packets per queue\n";
    return kOk;
  } catch (const ConfigError& e) {
    print_violations(e, err);
    return kConfigInvalid;
  }
}

int cmd_check_model(const std::string& model_path, std::ostream& out, std::ostream& err) {
  SliceModel model;
  try {
    model = load_slice_model(model_path);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kConfigInvalid;
  }
  const ValidationReport report = validate_model(model);
  if (report.ok()) {
    out << "model valid: " << model.domains.size() << " domains, " << model.communication_slices.size()
        << " communication slices, " << model.svns.size() << " SVNs\n";
    for (const auto& domain : model.domains) {
      if (domain.resources.empty()) continue;
      const GatewayPlan plan = build_gateway_plan(domain);
      out << "  " << domain.id << ": " << plan.queue_count() << " gateway queue(s), classes";
      for (const auto& q : plan.queues) out << " " << q.constraint_class;
      out << "\n";
    }
    return kOk;
  }
  for (const auto& v : report.violations) {
    err << v.kind << ": " << v.subject << "\n";
  }
  return kConfigInvalid;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Interdomain slice gateway simulator with a SARSA bandwidth controller"};
  app.require_subcommand(1);

  std::string config_path;
  ConfigOverrides overrides;
  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file (defaults when omitted)");
    cmd->add_option("--scenario", overrides.scenario, "Scenario 1, 2 or 3");
    cmd->add_option("--seed", overrides.seed, "Random seed");
    cmd->add_option("--out-dir", overrides.out_dir, "Output directory");
    cmd->add_option("--phase-duration", overrides.phase_duration, "Seconds per overload phase");
    cmd->add_option("--epsilon", overrides.epsilon, "Exploration probability");
    cmd->add_option("--alpha", overrides.alpha, "Learning rate");
    cmd->add_option("--gamma", overrides.gamma, "Discount factor");
  };

  auto* run = app.add_subcommand("run", "Run one scenario and write CSV + JSON");
  add_run_flags(run);

  auto* sweep = app.add_subcommand("sweep", "Run one scenario over several seeds");
  add_run_flags(sweep);
  std::vector<std::uint64_t> seeds;
  unsigned jobs = std::max(1U, std::thread::hardware_concurrency());
  sweep->add_option("--seeds", seeds, "Seeds, comma separated")->delimiter(',')->required();
  sweep->add_option("--jobs", jobs, "Parallel runs");

  auto* validate = app.add_subcommand("validate", "Check a configuration without running");
  add_run_flags(validate);

  std::string model_path;
  auto* check_model = app.add_subcommand("check-model", "Validate a slice model document");
  check_model->add_option("model", model_path, "Slice model JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigInvalid;
  }

  if (*run) return cmd_run(config_path, overrides, std::cout, std::cerr);
  if (*sweep) return cmd_sweep(config_path, seeds, overrides, jobs, std::cout, std::cerr);
  if (*validate) return cmd_validate(config_path, overrides, std::cout, std::cerr);
  if (*check_model) return cmd_check_model(model_path, std::cout, std::cerr);
  return kConfigInvalid;
}

}  // namespace sliceq::cli
