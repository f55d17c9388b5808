#include "sliceq/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sliceq/error.hpp"

namespace sliceq {

namespace {

// Phase lookups tolerate the representation error of i * dt.
bool at_or_after(double t, double start) {
  return t >= start - 1e-12 * std::max(1.0, std::abs(start));
}

}  // namespace

OverloadSchedule OverloadSchedule::standard(double phase_duration) {
  return {{{1.3, phase_duration}, {1.5, phase_duration}, {1.8, phase_duration}, {2.0, phase_duration}}};
}

double OverloadSchedule::total_duration() const {
  return std::accumulate(phases.begin(), phases.end(), 0.0,
                         [](double acc, const Phase& p) { return acc + p.duration; });
}

std::vector<std::string> OverloadSchedule::validate() const {
  std::vector<std::string> errors;
  if (phases.empty()) {
    errors.push_back("schedule: needs at least one phase");
  }
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const auto& p = phases[k];
    const std::string where = "schedule[" + std::to_string(k) + "]";
    if (!(p.multiplier > 1.0) || !std::isfinite(p.multiplier)) {
      errors.push_back(where + ".multiplier: must be > 1, got " + std::to_string(p.multiplier));
    }
    if (!(p.duration > 0.0) || !std::isfinite(p.duration)) {
      errors.push_back(where + ".duration: must be > 0, got " + std::to_string(p.duration));
    }
    if (k > 0 && !(p.multiplier > phases[k - 1].multiplier)) {
      errors.push_back("schedule: multipliers must strictly increase, phase " + std::to_string(k) +
                       " has " + std::to_string(p.multiplier) + " after " +
                       std::to_string(phases[k - 1].multiplier));
    }
  }
  return errors;
}

ScenarioSpec ScenarioSpec::standard(int id) {
  ScenarioSpec spec;
  spec.id = id;
  spec.overloaded_queues.clear();
  for (int q = 0; q < id; ++q) {
    spec.overloaded_queues.push_back(static_cast<std::size_t>(q));
  }
  return spec;
}

std::size_t ScenarioSpec::step_count() const {
  return static_cast<std::size_t>(std::llround(duration() / dt));
}

double ScenarioSpec::phase_start(std::size_t phase) const {
  double start = lead_in;
  for (std::size_t k = 0; k < phase && k < schedule.phases.size(); ++k) {
    start += schedule.phases[k].duration;
  }
  return start;
}

std::optional<std::size_t> ScenarioSpec::phase_at(double t) const {
  double start = lead_in;
  if (!at_or_after(t, start)) {
    return std::nullopt;
  }
  for (std::size_t k = 0; k < schedule.phases.size(); ++k) {
    const double end = start + schedule.phases[k].duration;
    if (!at_or_after(t, end)) {
      return k;
    }
    start = end;
  }
  return std::nullopt;
}

bool ScenarioSpec::is_overloaded(std::size_t queue) const {
  return std::find(overloaded_queues.begin(), overloaded_queues.end(), queue) !=
         overloaded_queues.end();
}

std::vector<std::string> ScenarioSpec::validate() const {
  std::vector<std::string> errors = gateway.validate();
  auto append = [&errors](std::vector<std::string> more) {
    errors.insert(errors.end(), more.begin(), more.end());
  };
  append(agent.validate(gateway.queue_count));
  append(schedule.validate());

  if (id < 1 || id > 3) {
    errors.push_back("scenario.id: must be 1, 2 or 3, got " + std::to_string(id));
  }
  std::vector<std::size_t> sorted = overloaded_queues;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    errors.push_back("scenario.overloaded_queues: duplicate queue index");
  }
  for (std::size_t q : sorted) {
    if (q >= gateway.queue_count) {
      errors.push_back("scenario.overloaded_queues: queue " + std::to_string(q) +
                       " does not exist (queue_count " + std::to_string(gateway.queue_count) + ")");
    }
  }
  if (static_cast<int>(overloaded_queues.size()) != id) {
    errors.push_back("scenario.overloaded_queues: scenario " + std::to_string(id) +
                     " overloads exactly " + std::to_string(id) + " queue(s), got " +
                     std::to_string(overloaded_queues.size()));
  }
  if (!(nominal_rate >= 0.0) || !std::isfinite(nominal_rate)) {
    errors.push_back("scenario.nominal_rate: must be >= 0, got " + std::to_string(nominal_rate));
  }
  if (!(lead_in >= 0.0)) {
    errors.push_back("scenario.lead_in: must be >= 0, got " + std::to_string(lead_in));
  }
  if (!(tail >= 0.0)) {
    errors.push_back("scenario.tail: must be >= 0, got " + std::to_string(tail));
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    errors.push_back("gateway.dt: must be > 0, got " + std::to_string(dt));
  }
  if (std::isfinite(expected_packets_per_queue()) &&
      expected_packets_per_queue() < kMinPacketsPerQueue) {
    errors.push_back("scenario.phase_duration: process cycle too short, expected " +
                     std::to_string(expected_packets_per_queue()) +
                     " packets per queue, need at least 10000");
  }
  return errors;
}

double arrival_rate_at(const ScenarioSpec& spec, std::size_t queue, double t) {
  const double end = spec.duration();
  if (!(t >= 0.0) || t > end * (1.0 + 1e-12)) {
    throw Error("arrival_rate_at: t = " + std::to_string(t) + " outside [0, " +
                std::to_string(end) + "]");
  }
  if (!spec.is_overloaded(queue)) {
    return spec.nominal_rate;
  }
  const auto phase = spec.phase_at(t);
  return phase ? spec.nominal_rate * spec.schedule.phases[*phase].multiplier : spec.nominal_rate;
}

std::vector<double> arrival_rates_at(const ScenarioSpec& spec, double t) {
  std::vector<double> rates(spec.gateway.queue_count);
  for (std::size_t q = 0; q < rates.size(); ++q) {
    rates[q] = arrival_rate_at(spec, q, t);
  }
  return rates;
}

RunResult run_scenario(const ScenarioSpec& spec) {
  if (auto errors = spec.validate(); !errors.empty()) {
    throw ConfigError(std::move(errors));
  }

  Gateway gateway(spec.gateway);
  SarsaAgent agent(spec.agent, gateway.size());
  Rng rng(spec.seed);

  RunResult result;
  result.spec = spec;
  result.seed = spec.seed;
  for (const auto& q : gateway.queues()) {
    result.thresholds.push_back(q.threshold);
  }

  const std::size_t steps = spec.step_count();
  result.series.reserve(steps);
  std::size_t step = 0;

  auto record = [&](const StepReport& report, bool active, std::size_t attempts) {
    TimeSeriesRow row;
    row.t = static_cast<double>(step + 1) * spec.dt;
    for (std::size_t q = 0; q < gateway.size(); ++q) {
      const auto& qs = report.queues[q];
      row.occupancy.push_back(qs.occupancy);
      row.flush_rate.push_back(gateway.queue(q).flush_rate);
      row.drops.push_back(qs.drops);
      row.arrivals.push_back(qs.arrivals);
      row.departures.push_back(qs.departures);
    }
    row.agent_active = active;
    row.attempts = static_cast<std::int64_t>(attempts);
    result.series.push_back(std::move(row));
    ++step;
  };

  EpisodeHooks hooks;
  hooks.arrival_rates = [&] { return arrival_rates_at(spec, static_cast<double>(step) * spec.dt); };
  hooks.on_step = [&](const StepReport& report, std::size_t attempt) { record(report, true, attempt); };

  while (step < steps) {
    if (!gateway.all_below_threshold()) {
      hooks.step_limit = steps - step;
      const std::size_t start = step;
      const EpisodeOutcome outcome = agent.control_episode(gateway, hooks, spec.dt, rng);
      result.episodes.push_back({start, outcome.attempts, outcome.converged});
      continue;
    }
    const auto load = arrival_rates_at(spec, static_cast<double>(step) * spec.dt);
    record(gateway.step(spec.dt, load, rng), false, 0);
  }

  result.summary = summarize(result.series, result.thresholds);
  return result;
}

}  // namespace sliceq
