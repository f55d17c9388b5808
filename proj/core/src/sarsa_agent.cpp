#include "sliceq/sarsa_agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sliceq/error.hpp"

namespace sliceq {

std::size_t GlobalState::index() const {
  std::size_t out = 0;
  for (std::size_t q = 0; q < labels.size(); ++q) {
    if (labels[q] == Label::AT) {
      out |= std::size_t{1} << q;
    }
  }
  return out;
}

bool GlobalState::all_below_threshold() const {
  return std::all_of(labels.begin(), labels.end(), [](Label l) { return l == Label::BT; });
}

GlobalState GlobalState::from_index(std::size_t index, std::size_t queue_count) {
  GlobalState s;
  s.labels.resize(queue_count);
  for (std::size_t q = 0; q < queue_count; ++q) {
    s.labels[q] = ((index >> q) & 1U) != 0 ? Label::AT : Label::BT;
  }
  return s;
}

GlobalState GlobalState::observe(const Gateway& gateway) { return {gateway.labels()}; }

Action Action::from_index(std::size_t index) {
  if (index == 0) {
    return hold();
  }
  const std::size_t q = (index - 1) / 2;
  return (index - 1) % 2 == 0 ? increase(q) : decrease(q);
}

std::size_t Action::index() const {
  switch (kind) {
    case Kind::Hold:
      return 0;
    case Kind::Increase:
      return 1 + 2 * queue;
    case Kind::Decrease:
      return 2 + 2 * queue;
  }
  return 0;
}

std::string Action::to_string() const {
  switch (kind) {
    case Kind::Hold:
      return "hold";
    case Kind::Increase:
      return "increase(" + std::to_string(queue) + ")";
    case Kind::Decrease:
      return "decrease(" + std::to_string(queue) + ")";
  }
  return "?";
}

QTable::QTable(std::size_t queue_count)
    : queue_count_(queue_count),
      states_(state_count(queue_count)),
      actions_(action_count(queue_count)),
      values_(states_ * actions_, 0.0) {}

bool QTable::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::vector<std::string> AgentConfig::validate(std::size_t queue_count) const {
  std::vector<std::string> errors;
  auto bad = [&](const std::string& field, const std::string& rule, double value) {
    errors.push_back("agent." + field + ": must be in " + rule + ", got " + std::to_string(value));
  };
  if (!(epsilon > 0.0 && epsilon <= 1.0)) bad("epsilon", "(0, 1]", epsilon);
  if (!(alpha > 0.0 && alpha <= 1.0)) bad("alpha", "(0, 1]", alpha);
  if (!(gamma >= 0.0 && gamma < 1.0)) bad("gamma", "[0, 1)", gamma);
  if (!(adjust_fraction > 0.0 && adjust_fraction < 1.0)) {
    bad("adjust_fraction", "(0, 1)", adjust_fraction);
  }
  if (max_attempts < 1) {
    errors.push_back("agent.max_attempts: must be >= 1");
  }
  if (!(step_cost >= 0.0) || !std::isfinite(step_cost)) {
    bad("step_cost", "[0, inf)", step_cost);
  }
  if (priority_weights.size() != queue_count) {
    errors.push_back("agent.priority_weights: expected " + std::to_string(queue_count) +
                     " weights, got " + std::to_string(priority_weights.size()));
  }
  for (double w : priority_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      errors.push_back("agent.priority_weights: weights must be positive, got " +
                       std::to_string(w));
      break;
    }
  }
  return errors;
}

std::size_t greedy_action(const QTable& table, std::size_t state) {
  const auto row = table.row(state);
  // max_element returns the first maximum, which is the canonical tie-break.
  return static_cast<std::size_t>(std::distance(row.begin(), std::max_element(row.begin(), row.end())));
}

Action select_action(const QTable& table, const GlobalState& state, double epsilon, Rng& rng) {
  if (rng.uniform() < epsilon) {
    return Action::from_index(rng.uniform_index(table.actions()));
  }
  return Action::from_index(greedy_action(table, state.index()));
}

namespace {

// Pins the sum to the link capacity by letting the largest rate absorb the
// rounding residue; the largest rate is far above the floor whenever N > 1.
void rebalance(std::vector<double>& rates, double link_capacity) {
  const auto largest = std::max_element(rates.begin(), rates.end());
  double others = 0.0;
  for (auto it = rates.begin(); it != rates.end(); ++it) {
    if (it != largest) {
      others += *it;
    }
  }
  *largest = link_capacity - others;
}

}  // namespace

std::vector<double> apply_action(std::span<const double> rates, const RateBudget& budget,
                                 Action action, double adjust_fraction, AdjustBase base) {
  std::vector<double> out(rates.begin(), rates.end());
  const std::size_t n = out.size();
  if (action.kind == Action::Kind::Hold || n < 2 || action.queue >= n) {
    return out;
  }
  const std::size_t target = action.queue;
  const double step_base = base == AdjustBase::CurrentRate ? out[target] : budget.link_capacity;
  const double step = adjust_fraction * step_base;

  double others_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != target) others_total += out[i];
  }

  if (action.kind == Action::Kind::Increase) {
    if (!(others_total > 0.0)) {
      return out;
    }
    double gained = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == target) continue;
      const double headroom = std::max(0.0, out[i] - budget.min_rate);
      const double wanted = step * out[i] / others_total;
      if (wanted >= headroom) {
        gained += headroom;
        out[i] = std::min(out[i], budget.min_rate);
      } else {
        gained += wanted;
        out[i] -= wanted;
      }
    }
    if (gained == 0.0) {
      return std::vector<double>(rates.begin(), rates.end());
    }
    out[target] += gained;
  } else {
    const double freed = std::min(step, std::max(0.0, out[target] - budget.min_rate));
    if (freed == 0.0) {
      return out;
    }
    out[target] = std::max(budget.min_rate, out[target] - freed);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == target) continue;
      out[i] += others_total > 0.0 ? freed * out[i] / others_total
                                   : freed / static_cast<double>(n - 1);
    }
  }
  rebalance(out, budget.link_capacity);
  return out;
}

std::vector<double> apply_action(const Gateway& gateway, Action action, double adjust_fraction,
                                 AdjustBase base) {
  return apply_action(gateway.flush_rates(), {gateway.link_capacity(), gateway.min_rate()}, action,
                      adjust_fraction, base);
}

double reward(const GlobalState& next_state, std::span<const double> priority_weights) {
  double score = 0.0;
  double total = 0.0;
  for (std::size_t q = 0; q < next_state.labels.size(); ++q) {
    const double w = priority_weights[q];
    score += next_state.labels[q] == Label::BT ? w : -w;
    total += w;
  }
  return score / total;
}

double action_reward(const GlobalState& state, Action action, std::span<const double> priority_weights) {
  if (action.kind == Action::Kind::Hold || action.queue >= state.labels.size()) {
    return 0.0;
  }
  double total = 0.0;
  for (std::size_t q = 0; q < state.labels.size(); ++q) total += priority_weights[q];
  const double share = priority_weights[action.queue] / total;
  const bool above = state.labels[action.queue] == Label::AT;
  if (action.kind == Action::Kind::Increase) {
    return above ? share : -share;
  }
  return above ? -share : 0.0;
}

void sarsa_update(QTable& table, std::size_t state, std::size_t action, double r,
                  std::size_t next_state, std::size_t next_action, double alpha, double gamma) {
  double& q = table.at(state, action);
  const double target = r + gamma * table.at(next_state, next_action);
  q += alpha * (target - q);
}

SarsaAgent::SarsaAgent(AgentConfig config, std::size_t queue_count)
    : config_(std::move(config)), table_(queue_count) {
  if (auto errors = config_.validate(queue_count); !errors.empty()) {
    throw ConfigError(std::move(errors));
  }
}

EpisodeOutcome SarsaAgent::control_episode(Gateway& gateway, const EpisodeHooks& hooks, double dt,
                                           Rng& rng) {
  EpisodeOutcome outcome;
  GlobalState state = GlobalState::observe(gateway);
  if (state.all_below_threshold()) {
    outcome.final_state = std::move(state);
    outcome.converged = true;
    return outcome;
  }

  const std::size_t budget = std::min(config_.max_attempts, hooks.step_limit);
  Action action = select_action(table_, state, config_.epsilon, rng);
  while (outcome.attempts < budget) {
    ++outcome.attempts;
    gateway.set_flush_rates(
        apply_action(gateway, action, config_.adjust_fraction, config_.adjust_base));
    const std::vector<double> load = hooks.arrival_rates();
    const StepReport report = gateway.step(dt, load, rng);
    if (hooks.on_step) {
      hooks.on_step(report, outcome.attempts);
    }

    GlobalState next = GlobalState::observe(gateway);
    double r = reward(next, config_.priority_weights);
    if (config_.reward_mode == RewardMode::StateAction) {
      r += action_reward(state, action, config_.priority_weights);
    }
    r -= config_.step_cost;
    const Action next_action = select_action(table_, next, config_.epsilon, rng);
    sarsa_update(table_, state.index(), action.index(), r, next.index(), next_action.index(),
                 config_.alpha, config_.gamma);

    state = std::move(next);
    action = next_action;
    if (state.all_below_threshold()) {
      outcome.converged = true;
      break;
    }
  }
  outcome.final_state = std::move(state);
  return outcome;
}

EpisodeOutcome SarsaAgent::control_episode(Gateway& gateway, std::span<const double> arrival_rates,
                                           double dt, Rng& rng) {
  const std::vector<double> load(arrival_rates.begin(), arrival_rates.end());
  EpisodeHooks hooks;
  hooks.arrival_rates = [&load] { return load; };
  return control_episode(gateway, hooks, dt, rng);
}

}  // namespace sliceq
