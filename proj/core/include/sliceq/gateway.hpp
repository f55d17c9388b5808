#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sliceq/rng.hpp"

namespace sliceq {

/// Occupancy label of a queue: below or above its threshold.
enum class Label { BT, AT };

/// One performance-class output queue of the gateway.
struct GatewayQueue {
  std::size_t index = 0;
  std::int64_t capacity = 0;
  std::int64_t occupancy = 0;
  std::int64_t threshold = 0;
  double flush_rate = 0.0;  // packets/s
  int priority = 1;         // 1 = highest
  std::int64_t drops = 0;   // cumulative
  double service_credit = 0.0;  // fractional service carried between steps
};

/// BT iff occupancy <= threshold. A queue sitting exactly at its threshold is BT.
Label queue_label(const GatewayQueue& queue);

/// Sizing of a gateway. Defaults give three 1000-packet queues at 50%
/// threshold sharing a 300 packets/s link.
struct GatewaySizing {
  std::size_t queue_count = 3;
  std::int64_t capacity = 1000;
  double threshold_fraction = 0.5;
  double link_capacity = 300.0;
  double min_rate_fraction = 0.01;  // per-queue floor, fraction of link_capacity
  std::vector<int> priorities;      // empty: queue i gets priority i + 1

  /// Violations as "gateway.<field>: reason"; empty if the sizing is usable.
  std::vector<std::string> validate() const;
  std::int64_t threshold() const;
  double min_rate() const { return min_rate_fraction * link_capacity; }
};

struct QueueStep {
  std::int64_t arrivals = 0;
  std::int64_t departures = 0;
  std::int64_t drops = 0;
  std::int64_t occupancy = 0;  // after the step

  friend bool operator==(const QueueStep&, const QueueStep&) = default;
};

struct StepReport {
  double dt = 0.0;
  double clock = 0.0;  // gateway clock after the step
  std::vector<QueueStep> queues;

  friend bool operator==(const StepReport&, const StepReport&) = default;
};

/// The shared-link gateway. Flush rates always sum to link_capacity.
///
/// Each step serves every queue first, then admits the Poisson arrivals of
/// the step, then tail-drops whatever exceeds capacity, so that
///   occupancy' = occupancy + arrivals - departures - drops.
/// Service is real-valued: flush_rate * dt accumulates in a per-queue credit
/// and whole packets leave when the credit allows, so long-run departures
/// per second equal the flush rate whenever the queue is backlogged.
class Gateway {
 public:
  explicit Gateway(const GatewaySizing& sizing);

  std::size_t size() const { return queues_.size(); }
  std::span<const GatewayQueue> queues() const { return queues_; }
  const GatewayQueue& queue(std::size_t i) const { return queues_.at(i); }

  double link_capacity() const { return link_capacity_; }
  double min_rate() const { return min_rate_; }
  double clock() const { return clock_; }

  std::vector<double> flush_rates() const;
  std::vector<Label> labels() const;
  bool all_below_threshold() const;

  /// Replaces all flush rates at once. Throws sliceq::Error with
  /// "bandwidth budget violated" if the rates do not sum to link_capacity
  /// (1e-9 relative) and "starvation floor violated" if any rate is below
  /// min_rate. On error the gateway is unchanged.
  void set_flush_rates(std::span<const double> rates);

  /// Overrides a queue's occupancy, e.g. to start a run from a backlog.
  void set_occupancy(std::size_t index, std::int64_t occupancy);

  StepReport step(double dt, std::span<const double> arrival_rates, Rng& rng);

 private:
  std::vector<GatewayQueue> queues_;
  double link_capacity_ = 0.0;
  double min_rate_ = 0.0;
  double clock_ = 0.0;
};

/// Relative tolerance of the bandwidth budget.
inline constexpr double kBudgetTolerance = 1e-9;

/// Slice parameters measured for one queue over a window.
struct MeasuredParams {
  double bandwidth = 0.0;       // departures per second
  double loss = 0.0;            // drops / arrivals, 0 without arrivals
  std::optional<double> delay;  // mean occupancy / bandwidth; empty without departures

  friend bool operator==(const MeasuredParams&, const MeasuredParams&) = default;
};

/// Window totals of one queue; occupancy_seconds is the time integral of the
/// post-step occupancy.
struct QueueTotals {
  std::int64_t arrivals = 0;
  std::int64_t departures = 0;
  std::int64_t drops = 0;
  double occupancy_seconds = 0.0;
};

MeasuredParams measure(const QueueTotals& totals, double duration);

/// Per-queue parameters over a window of steps. Throws sliceq::Error if the
/// window is empty.
std::vector<MeasuredParams> measured_params(std::span<const StepReport> window);

}  // namespace sliceq
