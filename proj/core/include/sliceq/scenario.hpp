#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sliceq/gateway.hpp"
#include "sliceq/metrics.hpp"
#include "sliceq/sarsa_agent.hpp"

namespace sliceq {

/// Expected packets each queue must produce for a run to be accepted.
inline constexpr double kMinPacketsPerQueue = 1e4;

struct Phase {
  double multiplier = 1.0;  // offered load relative to nominal
  double duration = 0.0;    // seconds

  friend bool operator==(const Phase&, const Phase&) = default;
};

/// Phased overload applied to the overloaded queues.
struct OverloadSchedule {
  std::vector<Phase> phases;

  /// 30%, 50%, 80% and 100% above nominal, each lasting phase_duration.
  static OverloadSchedule standard(double phase_duration);

  double total_duration() const;
  std::vector<std::string> validate() const;

  friend bool operator==(const OverloadSchedule&, const OverloadSchedule&) = default;
};

/// Everything needed to reproduce one run.
struct ScenarioSpec {
  int id = 1;
  std::vector<std::size_t> overloaded_queues{0};
  OverloadSchedule schedule = OverloadSchedule::standard(60.0);
  double nominal_rate = 90.0;  // packets/s offered by every queue outside overload
  double lead_in = 0.0;        // seconds at nominal load before the first phase
  double tail = 0.0;           // seconds at nominal load after the last phase
  double dt = 0.1;
  GatewaySizing gateway;
  AgentConfig agent;
  std::uint64_t seed = 42;

  /// Scenario k overloads queues {0, ..., k-1}.
  static ScenarioSpec standard(int id);

  double duration() const { return lead_in + schedule.total_duration() + tail; }
  std::size_t step_count() const;
  double phase_start(std::size_t phase) const;
  /// Phase active at time t, right-continuous at phase starts.
  std::optional<std::size_t> phase_at(double t) const;
  bool is_overloaded(std::size_t queue) const;
  double expected_packets_per_queue() const { return nominal_rate * duration(); }

  /// Every invariant of the spec, gateway and agent, as "<field>: reason".
  std::vector<std::string> validate() const;
};

/// Offered load of one queue at time t (seconds from run start). Throws
/// sliceq::Error when t lies outside [0, duration].
double arrival_rate_at(const ScenarioSpec& spec, std::size_t queue, double t);
std::vector<double> arrival_rates_at(const ScenarioSpec& spec, double t);

struct EpisodeRecord {
  std::size_t start_step = 0;  // index of the first row of the episode
  std::size_t attempts = 0;
  bool converged = false;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct RunResult {
  ScenarioSpec spec;
  std::vector<TimeSeriesRow> series;
  std::vector<EpisodeRecord> episodes;
  RunSummary summary;
  std::vector<std::int64_t> thresholds;
  std::uint64_t seed = 0;
};

/// Steps the gateway over the whole schedule. Whenever a step leaves any
/// queue above threshold and no episode is running, a control episode starts
/// on the next step; episode steps are part of the series. Throws ConfigError
/// for an invalid spec, including "process cycle too short" when a queue would
/// produce fewer than kMinPacketsPerQueue packets.
RunResult run_scenario(const ScenarioSpec& spec);

}  // namespace sliceq
