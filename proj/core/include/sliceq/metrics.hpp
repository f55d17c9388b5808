#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sliceq/gateway.hpp"

namespace sliceq {

/// One simulation step of a run.
///
/// arrivals and departures are not part of the CSV columns; they travel in
/// the JSON export so the measured slice parameters can be recomputed.
struct TimeSeriesRow {
  double t = 0.0;  // end of the step, seconds
  std::vector<std::int64_t> occupancy;
  std::vector<double> flush_rate;
  std::vector<std::int64_t> drops;  // this step
  bool agent_active = false;
  std::int64_t attempts = 0;  // attempts of the current episode so far, 0 when idle
  std::vector<std::int64_t> arrivals;
  std::vector<std::int64_t> departures;

  friend bool operator==(const TimeSeriesRow&, const TimeSeriesRow&) = default;
};

struct QueueSummary {
  double at_fraction = 0.0;
  std::int64_t total_drops = 0;
  MeasuredParams measured;

  friend bool operator==(const QueueSummary&, const QueueSummary&) = default;
};

struct RunSummary {
  std::vector<QueueSummary> queues;
  std::size_t invocations = 0;
  double mean_attempts = 0.0;
  std::optional<double> convergence_rate;  // empty when the agent never ran

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

/// Statistics of a run. Rows are consecutive, evenly spaced steps. An episode
/// starts at each active row with attempts == 1 and has converged when its
/// last row has every queue at or below threshold. Throws sliceq::Error for
/// an empty series.
RunSummary summarize(std::span<const TimeSeriesRow> series, std::span<const std::int64_t> thresholds);

/// "t,q0_occ,q0_rate,q0_drops,...,agent_active,attempts" with LF line ends
/// and shortest round-trip number formatting.
std::string export_csv(std::span<const TimeSeriesRow> series, std::size_t queue_count);

/// Inverse of export_csv for the CSV columns. Throws sliceq::Error on
/// malformed input.
std::vector<TimeSeriesRow> parse_csv(std::string_view text);

nlohmann::json to_json(const RunSummary& summary);
RunSummary summary_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TimeSeriesRow& row);
TimeSeriesRow row_from_json(const nlohmann::json& j);

/// Single document {"config", "series", "summary"} with sorted keys.
std::string export_json(std::span<const TimeSeriesRow> series, const RunSummary& summary,
                        const nlohmann::json& config);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

}  // namespace sliceq
