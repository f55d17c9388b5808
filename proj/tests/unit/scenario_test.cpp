#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "sliceq/error.hpp"
#include "sliceq/scenario.hpp"

namespace {

using namespace sliceq;

bool mentions(const std::vector<std::string>& errors, const std::string& what) {
  for (const auto& e : errors) {
    if (e.find(what) != std::string::npos) return true;
  }
  return false;
}

TEST(OverloadSchedule, StandardPhases) {
  const auto s = OverloadSchedule::standard(60.0);
  ASSERT_EQ(s.phases.size(), 4u);
  EXPECT_EQ(s.phases[0], (Phase{1.3, 60.0}));
  EXPECT_EQ(s.phases[1], (Phase{1.5, 60.0}));
  EXPECT_EQ(s.phases[2], (Phase{1.8, 60.0}));
  EXPECT_EQ(s.phases[3], (Phase{2.0, 60.0}));
  EXPECT_DOUBLE_EQ(s.total_duration(), 240.0);
  EXPECT_TRUE(s.validate().empty());
}

TEST(OverloadSchedule, RejectsUnorderedOrBadPhases) {
  EXPECT_TRUE(mentions(OverloadSchedule{{{1.5, 10}, {1.3, 10}}}.validate(), "schedule"));
  EXPECT_TRUE(mentions(OverloadSchedule{{{1.5, 10}, {1.5, 10}}}.validate(), "strictly increase"));
  EXPECT_FALSE((OverloadSchedule{{{0.9, 10}}}.validate().empty()));
  EXPECT_FALSE((OverloadSchedule{{{1.2, 0}}}.validate().empty()));
  EXPECT_FALSE(OverloadSchedule{}.validate().empty());
}

TEST(ScenarioSpec, StandardOverloadSets) {
  EXPECT_EQ(ScenarioSpec::standard(1).overloaded_queues, (std::vector<std::size_t>{0}));
  EXPECT_EQ(ScenarioSpec::standard(2).overloaded_queues, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(ScenarioSpec::standard(3).overloaded_queues, (std::vector<std::size_t>{0, 1, 2}));
  const auto s = ScenarioSpec::standard(1);
  EXPECT_TRUE(s.validate().empty());
  EXPECT_EQ(s.step_count(), 2400u);
  EXPECT_EQ(s.seed, 42u);
  EXPECT_DOUBLE_EQ(s.nominal_rate, 90.0);
  EXPECT_DOUBLE_EQ(s.dt, 0.1);
}

TEST(ScenarioSpec, ValidationNamesFields) {
  auto s = ScenarioSpec::standard(2);
  s.overloaded_queues = {0};
  EXPECT_TRUE(mentions(s.validate(), "scenario.overloaded_queues"));
  s = ScenarioSpec::standard(1);
  s.overloaded_queues = {5};
  EXPECT_TRUE(mentions(s.validate(), "does not exist"));
  s = ScenarioSpec::standard(1);
  s.id = 4;
  EXPECT_TRUE(mentions(s.validate(), "scenario.id"));
  s = ScenarioSpec::standard(1);
  s.agent.epsilon = 1.5;
  EXPECT_TRUE(mentions(s.validate(), "epsilon"));
  s = ScenarioSpec::standard(1);
  s.dt = 0.0;
  EXPECT_TRUE(mentions(s.validate(), "gateway.dt"));
}

TEST(ArrivalRate, NonOverloadedQueueIsNominal) {
  const auto s = ScenarioSpec::standard(1);
  for (double t : {0.0, 30.0, 60.0, 119.9, 200.0, 240.0}) {
    EXPECT_EQ(arrival_rate_at(s, 1, t), 90.0);
    EXPECT_EQ(arrival_rate_at(s, 2, t), 90.0);
  }
}

TEST(ArrivalRate, PhasesScaleTheOverloadedQueue) {
  const auto s = ScenarioSpec::standard(1);
  EXPECT_DOUBLE_EQ(arrival_rate_at(s, 0, 10.0), 1.3 * 90.0);
  EXPECT_DOUBLE_EQ(arrival_rate_at(s, 0, 90.0), 1.5 * 90.0);
  EXPECT_DOUBLE_EQ(arrival_rate_at(s, 0, 150.0), 1.8 * 90.0);
  EXPECT_DOUBLE_EQ(arrival_rate_at(s, 0, 230.0), 2.0 * 90.0);
}

TEST(ArrivalRate, RightContinuousAtPhaseStarts) {
  const auto s = ScenarioSpec::standard(1);
  const double mult[] = {1.3, 1.5, 1.8, 2.0};
  for (std::size_t k = 1; k < 4; ++k) {
    const double start = s.phase_start(k);
    EXPECT_DOUBLE_EQ(arrival_rate_at(s, 0, start), mult[k] * 90.0);
    EXPECT_DOUBLE_EQ(arrival_rate_at(s, 0, std::nextafter(start, 0.0) - 1e-9), mult[k - 1] * 90.0);
  }
  // Step times accumulate as i * dt; 600 * 0.1 lands just below or on 60.
  EXPECT_DOUBLE_EQ(arrival_rate_at(s, 0, 600 * 0.1), 1.5 * 90.0);
  EXPECT_DOUBLE_EQ(arrival_rate_at(s, 0, 599 * 0.1), 1.3 * 90.0);
}

TEST(ArrivalRate, NominalOutsideTheSchedule) {
  auto s = ScenarioSpec::standard(1);
  s.lead_in = 10.0;
  s.tail = 5.0;
  EXPECT_DOUBLE_EQ(s.duration(), 255.0);
  EXPECT_EQ(arrival_rate_at(s, 0, 5.0), 90.0);
  EXPECT_DOUBLE_EQ(arrival_rate_at(s, 0, 10.0), 1.3 * 90.0);
  EXPECT_EQ(arrival_rate_at(s, 0, 252.0), 90.0);
}

TEST(ArrivalRate, OutOfRangeThrows) {
  const auto s = ScenarioSpec::standard(1);
  EXPECT_THROW(arrival_rate_at(s, 0, -0.1), Error);
  EXPECT_THROW(arrival_rate_at(s, 0, 240.5), Error);
}

TEST(ArrivalRate, ScenarioThreeOverloadsEveryQueue) {
  const auto s = ScenarioSpec::standard(3);
  const auto rates = arrival_rates_at(s, 200.0);
  for (double r : rates) EXPECT_DOUBLE_EQ(r, 2.0 * 90.0);
}

TEST(ProcessCycle, RunLengthArithmetic) {
  auto s = ScenarioSpec::standard(1);
  s.schedule = OverloadSchedule::standard(28.0);  // 112 s
  EXPECT_DOUBLE_EQ(s.expected_packets_per_queue(), 90.0 * 112.0);
  EXPECT_GE(90.0 * 112.0, 1e4);
  EXPECT_TRUE(s.validate().empty());

  s.schedule = OverloadSchedule::standard(27.5);  // 110 s, 9900 packets
  const auto errors = s.validate();
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_NE(errors[0].find("process cycle too short"), std::string::npos);
  try {
    run_scenario(s);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("process cycle too short"), std::string::npos);
  }
}

class ScenarioRun : public ::testing::TestWithParam<int> {
 protected:
  static const RunResult& result(int id) {
    static std::map<int, RunResult> cache;
    auto it = cache.find(id);
    if (it == cache.end()) it = cache.emplace(id, run_scenario(ScenarioSpec::standard(id))).first;
    return it->second;
  }
};

TEST_P(ScenarioRun, SeriesShape) {
  const auto& r = result(GetParam());
  ASSERT_EQ(r.series.size(), r.spec.step_count());
  EXPECT_EQ(r.seed, 42u);
  EXPECT_EQ(r.thresholds, (std::vector<std::int64_t>{500, 500, 500}));
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    EXPECT_NEAR(r.series[i].t, static_cast<double>(i + 1) * 0.1, 1e-9);
    if (i > 0) ASSERT_GT(r.series[i].t, r.series[i - 1].t);
  }
}

TEST_P(ScenarioRun, ConservationAndBudgetEveryRow) {
  const auto& r = result(GetParam());
  std::vector<std::int64_t> prev(3, 0);
  for (const auto& row : r.series) {
    const double total = std::accumulate(row.flush_rate.begin(), row.flush_rate.end(), 0.0);
    ASSERT_LE(std::abs(total - 300.0), 1e-9 * 300.0);
    for (std::size_t q = 0; q < 3; ++q) {
      ASSERT_GE(row.flush_rate[q], 3.0);
      ASSERT_EQ(row.occupancy[q], prev[q] + row.arrivals[q] - row.departures[q] - row.drops[q]);
      ASSERT_GE(row.occupancy[q], 0);
      ASSERT_LE(row.occupancy[q], 1000);
      prev[q] = row.occupancy[q];
    }
  }
}

TEST_P(ScenarioRun, AgentStartsOnlyAfterAThresholdCrossing) {
  const auto& r = result(GetParam());
  ASSERT_FALSE(r.episodes.empty());
  for (const auto& ep : r.episodes) {
    ASSERT_GT(ep.start_step, 0u);
    const auto& before = r.series[ep.start_step - 1];
    bool any_above = false;
    for (std::size_t q = 0; q < 3; ++q) any_above |= before.occupancy[q] > r.thresholds[q];
    EXPECT_TRUE(any_above) << "episode at step " << ep.start_step;
    EXPECT_GE(ep.attempts, 1u);
    EXPECT_LE(ep.attempts, 500u);
  }
}

TEST_P(ScenarioRun, EpisodesAreContiguousAndDoNotOverlap) {
  const auto& r = result(GetParam());
  std::int64_t expected = 0;
  std::size_t episode = 0;
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    const auto& row = r.series[i];
    if (!row.agent_active) {
      EXPECT_EQ(row.attempts, 0);
      expected = 0;
      continue;
    }
    if (row.attempts == 1) {
      ASSERT_LT(episode, r.episodes.size());
      EXPECT_EQ(r.episodes[episode].start_step, i);
      ++episode;
      expected = 1;
    } else {
      EXPECT_EQ(row.attempts, ++expected);
    }
  }
  EXPECT_EQ(episode, r.episodes.size());
}

TEST_P(ScenarioRun, DeliveredLoadIdentifiesTheScenario) {
  const auto& r = result(GetParam());
  const double duration = r.spec.duration();
  int overloaded = 0;
  for (std::size_t q = 0; q < 3; ++q) {
    std::int64_t arrivals = 0;
    for (const auto& row : r.series) arrivals += row.arrivals[q];
    const double rate = static_cast<double>(arrivals) / duration;
    double expected = 0.0;
    for (std::size_t i = 0; i < r.series.size(); ++i) {
      expected += arrival_rate_at(r.spec, q, static_cast<double>(i) * r.spec.dt) * r.spec.dt;
    }
    const double sigma = std::sqrt(expected) / duration;
    EXPECT_NEAR(rate, expected / duration, 3.0 * sigma);
    if (rate >= 1.2 * r.spec.nominal_rate + 3.0 * sigma) ++overloaded;
  }
  EXPECT_EQ(overloaded, GetParam());
}

TEST_P(ScenarioRun, SummaryCountsEpisodes) {
  const auto& r = result(GetParam());
  EXPECT_EQ(r.summary.invocations, r.episodes.size());
  std::size_t converged = 0, attempts = 0;
  for (const auto& e : r.episodes) {
    converged += e.converged;
    attempts += e.attempts;
  }
  ASSERT_TRUE(r.summary.convergence_rate.has_value());
  EXPECT_DOUBLE_EQ(*r.summary.convergence_rate,
                   static_cast<double>(converged) / static_cast<double>(r.episodes.size()));
  EXPECT_DOUBLE_EQ(r.summary.mean_attempts,
                   static_cast<double>(attempts) / static_cast<double>(r.episodes.size()));
}

TEST_P(ScenarioRun, SameSeedSameResult) {
  const auto again = run_scenario(ScenarioSpec::standard(GetParam()));
  const auto& r = result(GetParam());
  EXPECT_EQ(again.series, r.series);
  EXPECT_EQ(again.episodes, r.episodes);
  EXPECT_EQ(again.summary, r.summary);
}

INSTANTIATE_TEST_SUITE_P(Scenarios, ScenarioRun, ::testing::Values(1, 2, 3));

TEST(RunScenario, DifferentSeedsDiffer) {
  auto a = ScenarioSpec::standard(1);
  auto b = a;
  b.seed = 43;
  EXPECT_NE(run_scenario(a).series, run_scenario(b).series);
}

TEST(RunScenario, InvalidSpecThrowsConfigError) {
  auto s = ScenarioSpec::standard(1);
  s.gateway.link_capacity = -1.0;
  EXPECT_THROW(run_scenario(s), ConfigError);
}

}  // namespace
