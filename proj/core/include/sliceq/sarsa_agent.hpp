#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sliceq/gateway.hpp"
#include "sliceq/rng.hpp"

namespace sliceq {

/// Joint BT/AT labelling of all queues; the agent's state.
struct GlobalState {
  std::vector<Label> labels;

  /// Dense index in [0, 2^N): bit q is set when queue q is AT.
  std::size_t index() const;
  bool all_below_threshold() const;
  static GlobalState from_index(std::size_t index, std::size_t queue_count);
  static GlobalState observe(const Gateway& gateway);

  friend bool operator==(const GlobalState&, const GlobalState&) = default;
};

/// Hold, or raise/lower the flush rate of one queue.
///
/// Canonical order: Hold, (0,Increase), (0,Decrease), (1,Increase), ...
struct Action {
  enum class Kind { Hold, Increase, Decrease };

  Kind kind = Kind::Hold;
  std::size_t queue = 0;

  static Action hold() { return {}; }
  static Action increase(std::size_t q) { return {Kind::Increase, q}; }
  static Action decrease(std::size_t q) { return {Kind::Decrease, q}; }
  static Action from_index(std::size_t index);

  std::size_t index() const;
  std::string to_string() const;

  friend bool operator==(const Action&, const Action&) = default;
};

constexpr std::size_t action_count(std::size_t queue_count) { return 2 * queue_count + 1; }
constexpr std::size_t state_count(std::size_t queue_count) { return std::size_t{1} << queue_count; }

/// Dense zero-initialised table of Q(state, action).
class QTable {
 public:
  explicit QTable(std::size_t queue_count);

  std::size_t queue_count() const { return queue_count_; }
  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }

  double& at(std::size_t state, std::size_t action) { return values_.at(state * actions_ + action); }
  double at(std::size_t state, std::size_t action) const {
    return values_.at(state * actions_ + action);
  }
  std::span<const double> row(std::size_t state) const {
    return std::span<const double>(values_).subspan(state * actions_, actions_);
  }
  std::span<const double> values() const { return values_; }
  bool all_finite() const;

 private:
  std::size_t queue_count_;
  std::size_t states_;
  std::size_t actions_;
  std::vector<double> values_;
};

/// What a rate adjustment is a fraction of.
enum class AdjustBase { CurrentRate, LinkCapacity };

/// Learning signal used in the Q update.
///
/// State scores only the labels reached. StateAction adds action_reward for
/// the action taken, so that raising an AT queue's rate is credited when it is
/// taken rather than only when the queue finally drops below threshold.
enum class RewardMode { State, StateAction };

struct AgentConfig {
  double epsilon = 0.08;
  double alpha = 0.20;
  double gamma = 0.80;
  double adjust_fraction = 0.10;
  AdjustBase adjust_base = AdjustBase::CurrentRate;
  std::size_t max_attempts = 500;
  std::vector<double> priority_weights{3.0, 2.0, 1.0};
  RewardMode reward_mode = RewardMode::StateAction;
  double step_cost = 1.0;

  /// Violations as "agent.<field>: reason".
  std::vector<std::string> validate(std::size_t queue_count) const;
};

/// Index of the greedy action; ties go to the lowest canonical index.
std::size_t greedy_action(const QTable& table, std::size_t state);

/// Epsilon-greedy choice: a uniformly random action with probability epsilon,
/// otherwise the greedy one.
Action select_action(const QTable& table, const GlobalState& state, double epsilon, Rng& rng);

struct RateBudget {
  double link_capacity = 0.0;
  double min_rate = 0.0;
};

/// New rate vector after applying an action.
///
/// Increase grows the target by adjust_fraction of its base and takes the
/// amount from the other queues in proportion to their rates, each donor
/// capped at its min_rate floor; any shortfall shrinks the increase. Decrease
/// lowers the target by the same amount (not below the floor) and hands the
/// freed bandwidth to the others in proportion to their rates. The result
/// always sums to link_capacity and respects the floor; an infeasible
/// adjustment degrades to a smaller one or to a no-op.
std::vector<double> apply_action(std::span<const double> rates, const RateBudget& budget,
                                 Action action, double adjust_fraction,
                                 AdjustBase base = AdjustBase::CurrentRate);
std::vector<double> apply_action(const Gateway& gateway, Action action, double adjust_fraction,
                                 AdjustBase base = AdjustBase::CurrentRate);

/// Priority-weighted label score in [-1, 1]: sum(w_q * s_q) / sum(w_q) with
/// s_q = +1 for BT and -1 for AT.
double reward(const GlobalState& next_state, std::span<const double> priority_weights);

/// Priority-weighted score of acting on a queue in a given state:
/// +w_q / sum(w) for raising an AT queue, -w_q / sum(w) for lowering an AT
/// queue or raising a BT queue, and 0 for Hold or lowering a BT queue.
double action_reward(const GlobalState& state, Action action, std::span<const double> priority_weights);

/// Q(s,a) += alpha * (r + gamma * Q(s',a') - Q(s,a)). Only (s,a) changes.
void sarsa_update(QTable& table, std::size_t state, std::size_t action, double r,
                  std::size_t next_state, std::size_t next_action, double alpha, double gamma);

struct EpisodeOutcome {
  std::size_t attempts = 0;
  GlobalState final_state;
  bool converged = false;
};

/// Environment callbacks for an episode on a live gateway.
struct EpisodeHooks {
  /// Offered load for the next step; called once per attempt.
  std::function<std::vector<double>()> arrival_rates;
  /// Called after every gateway step with the 1-based attempt number.
  std::function<void(const StepReport&, std::size_t)> on_step;
  /// Hard cap on gateway steps, e.g. the time left in a run.
  std::size_t step_limit = std::numeric_limits<std::size_t>::max();
};

/// Tabular SARSA controller. The Q-table lives as long as the agent, so it
/// keeps learning across control episodes.
class SarsaAgent {
 public:
  SarsaAgent(AgentConfig config, std::size_t queue_count);

  const AgentConfig& config() const { return config_; }
  const QTable& qtable() const { return table_; }
  QTable& qtable() { return table_; }

  /// Runs one control episode against the gateway: each attempt observes the
  /// state, applies the chosen action, advances the gateway by dt, rewards
  /// the resulting state and updates Q with the next action actually chosen.
  /// Stops as soon as every queue is BT or after max_attempts attempts.
  EpisodeOutcome control_episode(Gateway& gateway, const EpisodeHooks& hooks, double dt, Rng& rng);
  EpisodeOutcome control_episode(Gateway& gateway, std::span<const double> arrival_rates,
                                 double dt, Rng& rng);

 private:
  AgentConfig config_;
  QTable table_;
};

}  // namespace sliceq
