#include "sliceq/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sliceq/error.hpp"

namespace sliceq {

namespace {

// Absorbs representation error in credit sums such as 3 * (30 * 0.1).
constexpr double kCreditSlack = 1e-9;

}  // namespace

Label queue_label(const GatewayQueue& queue) {
  return queue.occupancy <= queue.threshold ? Label::BT : Label::AT;
}

std::int64_t GatewaySizing::threshold() const {
  return static_cast<std::int64_t>(std::llround(threshold_fraction * static_cast<double>(capacity)));
}

std::vector<std::string> GatewaySizing::validate() const {
  std::vector<std::string> errors;
  if (queue_count < 1 || queue_count > 16) {
    errors.push_back("gateway.queue_count: must be in [1, 16], got " + std::to_string(queue_count));
  }
  if (capacity < 1) {
    errors.push_back("gateway.capacity: must be >= 1 packet, got " + std::to_string(capacity));
  }
  if (!(threshold_fraction > 0.0 && threshold_fraction <= 1.0)) {
    errors.push_back("gateway.threshold_fraction: must be in (0, 1], got " +
                     std::to_string(threshold_fraction));
  } else if (capacity >= 1 && threshold() < 1) {
    errors.push_back("gateway.threshold_fraction: threshold rounds to 0 packets");
  }
  if (!(link_capacity > 0.0) || !std::isfinite(link_capacity)) {
    errors.push_back("gateway.link_capacity: must be a positive rate, got " +
                     std::to_string(link_capacity));
  }
  if (!(min_rate_fraction >= 0.0) ||
      min_rate_fraction * static_cast<double>(queue_count) > 1.0) {
    errors.push_back("gateway.min_rate_fraction: must be >= 0 with queue_count * fraction <= 1, got " +
                     std::to_string(min_rate_fraction));
  }
  if (!priorities.empty()) {
    if (priorities.size() != queue_count) {
      errors.push_back("gateway.priorities: expected " + std::to_string(queue_count) +
                       " entries, got " + std::to_string(priorities.size()));
    }
    for (int p : priorities) {
      if (p < 1) {
        errors.push_back("gateway.priorities: ranks must be positive, got " + std::to_string(p));
        break;
      }
    }
  }
  return errors;
}

Gateway::Gateway(const GatewaySizing& sizing)
    : link_capacity_(sizing.link_capacity), min_rate_(sizing.min_rate()) {
  if (auto errors = sizing.validate(); !errors.empty()) {
    throw ConfigError(std::move(errors));
  }
  const double share = link_capacity_ / static_cast<double>(sizing.queue_count);
  queues_.resize(sizing.queue_count);
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    auto& q = queues_[i];
    q.index = i;
    q.capacity = sizing.capacity;
    q.threshold = sizing.threshold();
    q.flush_rate = share;
    q.priority = sizing.priorities.empty() ? static_cast<int>(i) + 1 : sizing.priorities[i];
  }
}

std::vector<double> Gateway::flush_rates() const {
  std::vector<double> rates(queues_.size());
  std::transform(queues_.begin(), queues_.end(), rates.begin(),
                 [](const GatewayQueue& q) { return q.flush_rate; });
  return rates;
}

std::vector<Label> Gateway::labels() const {
  std::vector<Label> out(queues_.size());
  std::transform(queues_.begin(), queues_.end(), out.begin(), queue_label);
  return out;
}

bool Gateway::all_below_threshold() const {
  return std::all_of(queues_.begin(), queues_.end(),
                     [](const GatewayQueue& q) { return queue_label(q) == Label::BT; });
}

void Gateway::set_flush_rates(std::span<const double> rates) {
  if (rates.size() != queues_.size()) {
    throw Error("bandwidth budget violated: expected " + std::to_string(queues_.size()) +
                " rates, got " + std::to_string(rates.size()));
  }
  for (double r : rates) {
    if (!(r >= min_rate_)) {
      throw Error("starvation floor violated: rate " + std::to_string(r) + " below " +
                  std::to_string(min_rate_));
    }
  }
  const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
  if (!(std::abs(total - link_capacity_) <= kBudgetTolerance * link_capacity_)) {
    throw Error("bandwidth budget violated: rates sum to " + std::to_string(total) +
                ", link capacity is " + std::to_string(link_capacity_));
  }
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    queues_[i].flush_rate = rates[i];
  }
}

void Gateway::set_occupancy(std::size_t index, std::int64_t occupancy) {
  auto& q = queues_.at(index);
  if (occupancy < 0 || occupancy > q.capacity) {
    throw Error("occupancy " + std::to_string(occupancy) + " outside [0, " +
                std::to_string(q.capacity) + "]");
  }
  q.occupancy = occupancy;
}

StepReport Gateway::step(double dt, std::span<const double> arrival_rates, Rng& rng) {
  if (arrival_rates.size() != queues_.size()) {
    throw Error("step: expected " + std::to_string(queues_.size()) + " arrival rates, got " +
                std::to_string(arrival_rates.size()));
  }
  StepReport report;
  report.dt = dt;
  report.queues.resize(queues_.size());
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    auto& q = queues_[i];
    auto& out = report.queues[i];

    q.service_credit += q.flush_rate * dt;
    const auto budget = static_cast<std::int64_t>(std::floor(q.service_credit + kCreditSlack));
    out.arrivals = rng.poisson(arrival_rates[i] * dt);
    out.departures = std::min(q.occupancy + out.arrivals, budget);
    q.service_credit -= static_cast<double>(out.departures);
    if (out.departures < budget) {
      // Idle capacity is lost; only the fractional part carries over.
      q.service_credit -= std::floor(q.service_credit + kCreditSlack);
    }
    q.service_credit = std::max(q.service_credit, 0.0);

    out.drops = std::max<std::int64_t>(0, q.occupancy + out.arrivals - out.departures - q.capacity);
    q.occupancy += out.arrivals - out.departures - out.drops;
    q.drops += out.drops;
    out.occupancy = q.occupancy;
  }
  clock_ += dt;
  report.clock = clock_;
  return report;
}

MeasuredParams measure(const QueueTotals& totals, double duration) {
  MeasuredParams p;
  p.bandwidth = duration > 0.0 ? static_cast<double>(totals.departures) / duration : 0.0;
  p.loss = totals.arrivals > 0
               ? static_cast<double>(totals.drops) / static_cast<double>(totals.arrivals)
               : 0.0;
  p.loss = std::clamp(p.loss, 0.0, 1.0);
  if (totals.departures > 0 && duration > 0.0) {
    p.delay = (totals.occupancy_seconds / duration) / p.bandwidth;
  }
  return p;
}

std::vector<MeasuredParams> measured_params(std::span<const StepReport> window) {
  if (window.empty()) {
    throw Error("measured_params: empty window");
  }
  const std::size_t n = window.front().queues.size();
  std::vector<QueueTotals> totals(n);
  double duration = 0.0;
  for (const auto& report : window) {
    duration += report.dt;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& q = report.queues.at(i);
      totals[i].arrivals += q.arrivals;
      totals[i].departures += q.departures;
      totals[i].drops += q.drops;
      totals[i].occupancy_seconds += static_cast<double>(q.occupancy) * report.dt;
    }
  }
  std::vector<MeasuredParams> out;
  out.reserve(n);
  for (const auto& t : totals) {
    out.push_back(measure(t, duration));
  }
  return out;
}

}  // namespace sliceq
