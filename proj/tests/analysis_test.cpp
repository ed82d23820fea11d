#include <doctest.h>

#include <cmath>
#include <sstream>

#include "detour/agent.hpp"
#include "detour/analysis.hpp"
#include "detour/trial_log.hpp"
#include "test_support.hpp"

using namespace detour;
using detour::testing::walk;

namespace {

double exact_tail(int n, int m) {
  // Binomial(n, 1/2) upper tail by summing exact integer coefficients.
  double coeff = 1.0, total = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (k >= m) total += coeff;
    coeff = coeff * (n - k) / (k + 1);
  }
  return total / std::pow(2.0, n);
}

std::vector<TrialRecord> always_optimal(const ExperimentConfig& cfg, int subjects) {
  std::vector<TrialRecord> logs;
  const Path b_from_3 = cfg.named_paths.at("B");
  const Path c_from_3 = {3, 7, 8, 8, 7, 6, 5, 9, 13, 17, 21, 22, 23, 27};
  for (int s = 0; s < subjects; ++s) {
    const std::string who = "opt" + std::to_string(s);
    for (int i = 0; i < 20; ++i) logs.push_back(walk(cfg, b_from_3, Phase::Pretest, false, {}, who));
    for (int i = 0; i < 40; ++i) {
      const bool blocked = i % 3 == 0 && i < 39;
      logs.push_back(blocked ? walk(cfg, c_from_3, Phase::Test, true, {Action::Right}, who)
                             : walk(cfg, b_from_3, Phase::Test, false, {}, who));
    }
  }
  return logs;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("binomial thresholds") {
    CHECK(binomial_threshold(20, 0.5, 0.05) == 15);
    CHECK(binomial_threshold(13, 0.5, 0.05) == 10);
    CHECK_FALSE(binomial_threshold(1, 0.5, 0.05));
    CHECK(binomial_upper_tail(20, 0.5, 15) == doctest::Approx(0.020694732666015625).epsilon(1e-12));
    CHECK(binomial_upper_tail(20, 0.5, 14) == doctest::Approx(0.057659149169921875).epsilon(1e-12));
    for (int n = 1; n <= 60; ++n) {
      for (int m = 0; m <= n; ++m) CHECK(binomial_upper_tail(n, 0.5, m) == doctest::Approx(exact_tail(n, m)).epsilon(1e-10));
    }
  }

  TEST_CASE("loop erasure") {
    CHECK(loop_erase({3, 7, 8, 7, 6}) == Path{3, 7, 6});
    CHECK(loop_erase({1, 2, 3}) == Path{1, 2, 3});
    CHECK(loop_erase({5, 6, 5, 6, 7}) == Path{5, 6, 7});
  }

  TEST_CASE("path classification") {
    const auto e1 = build_experiment(1);
    const auto planned = classify_trial_path(walk(e1, e1.named_paths.at("B"), Phase::Pretest), e1);
    CHECK(planned.cls == PathClass::Optimal);
    CHECK(planned.rank == 1);

    const auto replanned = classify_trial_path(
        walk(e1, {3, 7, 8, 8, 7, 6, 5, 9, 13, 17, 21, 22, 23, 27}, Phase::Test, true, {Action::Right}), e1);
    CHECK(replanned.cls == PathClass::SecondOptimal);
    CHECK(replanned.rank == 2);

    const auto e2 = build_experiment(2);
    const auto third = classify_trial_path(
        walk(e2, {3, 7, 8, 8, 7, 6, 5, 9, 13, 17, 21, 22, 23, 27}, Phase::Test, true, {Action::Right}), e2);
    CHECK(third.cls == PathClass::Other);
    CHECK(third.rank == 3);
    const auto second = classify_trial_path(
        walk(e2, {3, 7, 8, 8, 7, 6, 5, 9, 13, 14, 15, 19, 23, 27}, Phase::Test, true, {Action::Right}), e2);
    CHECK(second.cls == PathClass::SecondOptimal);

    TrialRecord lost = walk(e1, {3, 7, 6, 5});
    lost.goal = 27;
    lost.outcome = Outcome::BudgetExhausted;
    CHECK(classify_trial_path(lost, e1).cls == PathClass::Other);
  }

  TEST_CASE("classification partitions every completed trial") {
    const auto cfg = build_experiment(3);
    ModelSpec s;
    s.model = 3;
    const auto logs = simulate_participant(cfg, s, 4, "p");
    PathRanker ranker(cfg);
    int counts[3] = {0, 0, 0};
    for (const auto& t : logs) ++counts[static_cast<int>(classify_trial_path(t, cfg, &ranker).cls)];
    CHECK(counts[0] + counts[1] + counts[2] == static_cast<int>(logs.size()));
    CHECK(counts[0] > 0);
  }

  TEST_CASE("optimality report on an always-optimal cohort") {
    const auto cfg = build_experiment(1);
    const auto rep = optimality_report(always_optimal(cfg, 3), cfg);
    REQUIRE(rep.participants.size() == 3);
    for (const auto& p : rep.participants) {
      CHECK(p.pretest_n == 20);
      CHECK(p.pretest_optimal == 20);
      CHECK(p.pretest_threshold == 15);
      CHECK(p.pretest_pass);
      CHECK(p.replan_n == 13);
      CHECK(p.replan_threshold == 10);
      CHECK(p.replan_pass);
    }
  }

  TEST_CASE("heatmaps") {
    const auto cfg = build_experiment(2);
    const Path b = cfg.named_paths.at("B");
    std::vector<TrialRecord> logs;
    for (int s = 0; s < 36; ++s) {
      for (int i = 0; i < 27; ++i) logs.push_back(walk(cfg, b, Phase::Test, false, {}, "s" + std::to_string(s)));
    }
    const Heatmap h = occupancy_heatmap(logs, cfg.grid, [](const TrialRecord& t) { return !t.blocked; });
    for (std::size_t i = 1; i < b.size(); ++i) CHECK(h.cells(b[i] - 1) == 972);
    CHECK(h.total() == 972 * static_cast<int>(b.size() - 1));
    CHECK(occupancy_heatmap(logs, cfg.grid, [](const TrialRecord&) { return false; }).total() == 0);

    const Heatmap one = occupancy_heatmap({logs.front()}, cfg.grid);
    for (std::size_t i = 1; i < b.size(); ++i) CHECK(one.cells(b[i] - 1) == 1);

    ModelSpec s;
    s.model = 1;
    const auto random = simulate_participant(cfg, s, 2, "r");
    std::size_t transitions = 0;
    for (const auto& t : random) transitions += t.transitions.size();
    CHECK(occupancy_heatmap(random, cfg.grid).total() == static_cast<int>(transitions));
  }

  TEST_CASE("learning curves") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman({1, 2, 3, 4, 5}, {1, 3, 2, 5, 4}) == doctest::Approx(0.8));
    CHECK(std::isnan(spearman({1, 2, 3}, {5, 5, 5})));

    const auto cfg = build_experiment(2);
    TrialRecord t = walk(cfg, cfg.named_paths.at("B"));
    const auto single = learning_curve({t});
    REQUIRE(single.blocks.size() == 1);
    CHECK(single.blocks[0].mean_score == t.score);

    ModelSpec mb;
    mb.model = 3;
    mb[Param::Beta] = 1.5;
    const auto curve = learning_curve(simulate_cohort(cfg, mb, 3, 10),
                                      [](const TrialRecord& r) { return r.phase == Phase::Learning; });
    CHECK(curve.blocks.size() == 6);
    CHECK(curve.spearman_rho > 0.0);
  }

  TEST_CASE("salient loss rates") {
    const auto cfg = build_experiment(3);
    const Path avoid = {7, 8, 12, 16, 20, 19, 23, 27};
    std::vector<TrialRecord> logs = {walk(cfg, avoid), walk(cfg, avoid, Phase::Test)};
    const auto none = salient_loss_rate(logs, cfg, 11);
    REQUIRE(none.size() == 1);
    CHECK(mean_loss_rate(none, Phase::Learning) == 0.0);
    CHECK(mean_loss_rate(none, Phase::Test) == 0.0);
    CHECK_THROWS(salient_loss_rate(logs, cfg, 6));

    ModelSpec mb;
    mb.model = 3;
    mb[Param::Beta] = 1.5;
    const auto rates = salient_loss_rate(simulate_cohort(cfg, mb, 8, 10), cfg, 11);
    CHECK(mean_loss_rate(rates, Phase::Learning) > mean_loss_rate(rates, Phase::Test));
  }

  TEST_CASE("round trip through JSONL keeps the statistics") {
    const auto cfg = build_experiment(1);
    ModelSpec mb;
    mb.model = 3;
    const auto logs = simulate_cohort(cfg, mb, 10, 3);
    std::stringstream io;
    write_jsonl(io, logs);
    const auto back = read_jsonl(io);
    const auto a = optimality_report(logs, cfg), b = optimality_report(back, cfg);
    REQUIRE(a.participants.size() == b.participants.size());
    for (std::size_t i = 0; i < a.participants.size(); ++i) {
      CHECK(a.participants[i].pretest_optimal == b.participants[i].pretest_optimal);
      CHECK(a.participants[i].replan_second_optimal == b.participants[i].replan_second_optimal);
    }
    CHECK(occupancy_heatmap(logs, cfg.grid).cells == occupancy_heatmap(back, cfg.grid).cells);
  }
}
