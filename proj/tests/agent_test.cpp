#include <doctest.h>

#include <cmath>

#include "detour/agent.hpp"
#include "detour/reward.hpp"
#include "test_support.hpp"

using namespace detour;
using detour::testing::walk;

namespace {

TrialRecord single_entry(const ExperimentConfig& cfg, Cell from, Cell cell, int reward, Cell goal) {
  TrialRecord t = walk(cfg, {from, cell});
  t.goal = goal;
  t.transitions[0].reward = reward;
  return t;
}

void feed(Agent& agent, const TrialRecord& t) {
  agent.begin_trial(t.start, t.goal);
  for (const auto& tr : t.transitions) {
    agent.policy(tr.state);
    agent.observe(tr);
  }
  agent.end_trial();
}

ModelSpec spec_for(int model) {
  ModelSpec s;
  s.model = model;
  s[Param::Beta] = 1.5;
  s[Param::Gamma] = 0.9;
  return s;
}

}  // namespace

TEST_SUITE("reward") {
  TEST_CASE("linear filter") {
    CHECK(reward_filter_update(-1.0, -75, 0.8, std::nullopt) == doctest::Approx(-15.8));
    CHECK(reward_filter_update(-15.8, -1, 0.8, std::nullopt) == -15.8);
    CHECK(reward_filter_update(-15.8, -75, 0.0, std::nullopt) == -75.0);
    CHECK(reward_filter_update(-15.8, -1, 0.8, 0.5) == doctest::Approx(-7.9));
  }

  TEST_CASE("estimates by saliency class") {
    const auto cfg = build_experiment(2);
    FilterRates rates{0.5, 0.7, 0.9, std::nullopt};
    RewardEstimate est(cfg, RewardRule::LinearFilter, rates);
    CHECK(est.values().isApprox(Eigen::VectorXd::Constant(28, -1.0)));
    CHECK(est.observe(11, -75, 27));
    CHECK(est(11) == doctest::Approx(0.5 * -1 + 0.5 * -75));
    CHECK(est.observe(9, -20, 27));
    CHECK(est(9) == doctest::Approx(0.7 * -1 + 0.3 * -20));
    CHECK(est.observe(19, -5, 27));
    CHECK(est(19) == doctest::Approx(0.9 * -1 + 0.1 * -5));
    CHECK_FALSE(est.observe(6, -1, 27));
    CHECK_FALSE(est.observe(11, -1, 27));
    CHECK_FALSE(est.observe(27, 100, 27));
    CHECK(est(27) == -1.0);
    CHECK(est.for_goal(27)(26) == 100.0);
    CHECK(est.for_goal(27)(10) == est(11));
  }

  TEST_CASE("heuristic estimates") {
    const auto cfg = build_experiment(2);
    std::vector<TrialRecord> none;
    CHECK(heuristic_reward(cfg, RewardRule::AvoidSalient, none).values().isApprox(Eigen::VectorXd::Constant(28, -1.0)));

    const std::vector<TrialRecord> history = {single_entry(cfg, 7, 11, -75, 27), single_entry(cfg, 5, 9, -20, 27),
                                              single_entry(cfg, 5, 9, -1, 27), single_entry(cfg, 7, 11, -1, 27)};
    const auto avoid = heuristic_reward(cfg, RewardRule::AvoidSalient, history);
    CHECK(avoid(11) == -75.0);
    CHECK(avoid(9) == -1.0);

    const auto last = heuristic_reward(cfg, RewardRule::LastReward, history);
    CHECK(last(9) == -1.0);
    CHECK(last(11) == -1.0);
    CHECK(cfg.losses.expected_entry(9) == doctest::Approx(-16.2));

    const auto shortest = heuristic_reward(cfg, RewardRule::ShortestPath, history);
    CHECK(shortest.values().isApprox(Eigen::VectorXd::Constant(28, -1.0)));
    CHECK(shortest.for_goal(13)(12) == 100.0);
  }
}

TEST_SUITE("agent") {
  TEST_CASE("model 1 is uniform everywhere") {
    const auto cfg = build_experiment(1);
    Agent agent(cfg, spec_for(1));
    agent.begin_trial(3, 27);
    for (Cell c : cfg.open_cells()) CHECK(agent.policy(c).isApprox(Eigen::Vector4d::Constant(0.25)));
  }

  TEST_CASE("every model emits proper distributions") {
    const auto cfg = build_experiment(3);
    for (int m = 1; m <= kModelCount; ++m) {
      const ModelSpec spec = spec_for(m);
      const auto logs = simulate_participant(cfg, spec, 17 + m, "p");
      Agent agent(cfg, spec);
      int decisions = 0;
      for (const auto& t : logs) {
        agent.begin_trial(t.start, t.goal);
        for (const auto& tr : t.transitions) {
          const auto p = agent.policy(tr.state);
          CHECK(p.minCoeff() >= 0.0);
          CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
          CHECK(agent.log_policy(tr.state).array().exp().matrix().isApprox(p, 1e-9));
          agent.observe(tr);
          ++decisions;
        }
        agent.end_trial();
      }
      CHECK(decisions > 100);
    }
  }

  TEST_CASE("model 2 with zero learning rate keeps its values") {
    const auto cfg = build_experiment(1);
    ModelSpec s = spec_for(2);
    s[Param::AlphaC] = 0.0;
    s[Param::QRight0] = 2.0;
    Agent agent(cfg, s);
    const auto before = agent.q_table();
    feed(agent, walk(cfg, cfg.named_paths.at("B")));
    CHECK(agent.q_table() == before);

    ModelSpec learn = spec_for(2);
    learn[Param::AlphaC] = 0.5;
    Agent moving(cfg, learn);
    moving.begin_trial(3, 27);
    moving.observe({3, Action::Right, -1, 7, false});
    CHECK(moving.last_td_error() == doctest::Approx(-1.0));
    CHECK(moving.q_table()(2, index_of(Action::Right)) == doctest::Approx(-0.5));
  }

  TEST_CASE("model 3 re-plans through 7 after the blockage") {
    const auto cfg = build_experiment(1);
    Agent agent(cfg, spec_for(3));
    for (int i = 0; i < 20; ++i) {
      feed(agent, single_entry(cfg, 11, 15, -75, 27));
      feed(agent, single_entry(cfg, 12, 16, -3, 27));
      feed(agent, single_entry(cfg, 17, 21, -45, 27));
    }
    agent.begin_trial(3, 27);
    agent.observe({3, Action::Right, -1, 7, false});
    agent.observe({7, Action::Down, -1, 8, false});
    agent.observe({8, Action::Right, -1, 8, true});
    CHECK(agent.transitions()(7, index_of(Action::Right)) == 7);

    Path route{8};
    Cell c = 8;
    for (int k = 0; k < 12 && c != 27; ++k) {
      Eigen::Index a;
      agent.q_values(c).maxCoeff(&a);
      c = agent.transitions()(c - 1, a) + 1;
      route.push_back(c);
    }
    CHECK(route == Path{8, 7, 6, 5, 9, 13, 17, 21, 22, 23, 27});

    const auto p = agent.policy(8);
    CHECK(p(index_of(Action::Right)) == doctest::Approx(p.minCoeff()));
    CHECK(p(index_of(Action::Right)) < p(index_of(Action::Up)));
  }

  TEST_CASE("blockage overrides do not leak across trials") {
    const auto cfg = build_experiment(1);
    for (Knowledge k : {Knowledge::Oracle, Knowledge::LearnOnExperience}) {
      AgentOptions opts{k, std::nullopt};
      Agent with(cfg, spec_for(3), opts), without(cfg, spec_for(3), opts);
      const TrialRecord route = walk(cfg, cfg.named_paths.at("B"));
      feed(with, route);
      feed(without, route);
      const TrialRecord detour =
          walk(cfg, {3, 7, 8, 8, 7, 6, 5, 9, 13, 17, 21, 22, 23, 27}, Phase::Test, true, {Action::Right});
      TrialRecord plain = detour;
      plain.transitions.erase(plain.transitions.begin() + 2);
      feed(with, detour);
      feed(without, plain);
      CHECK(with.transitions() == without.transitions());
      CHECK(with.reward().values() == without.reward().values());
      with.begin_trial(3, 27);
      without.begin_trial(3, 27);
      for (Cell c : cfg.open_cells()) CHECK(with.policy(c).isApprox(without.policy(c), 1e-12));
    }
  }

  TEST_CASE("learning transitions from wall hits") {
    const auto cfg = build_experiment(1);
    Agent agent(cfg, spec_for(3), {Knowledge::LearnOnExperience, std::nullopt});
    CHECK(agent.transitions()(10, index_of(Action::Up)) == 9);  // 11 -> 10 believed open
    agent.begin_trial(11, 27);
    agent.observe({11, Action::Up, -1, 11, true});
    agent.end_trial();
    CHECK(agent.transitions()(10, index_of(Action::Up)) == 10);

    Agent oracle(cfg, spec_for(3));
    CHECK(oracle.transitions() == oracle_successors(cfg));
  }

  TEST_CASE("hybrid mixes the MB and SR policies of the same history") {
    const auto cfg = build_experiment(2);
    ModelSpec hybrid = spec_for(12);
    hybrid[Param::OmegaHybrid] = 0.3;
    hybrid[Param::AlphaL] = 0.4;
    ModelSpec mb = spec_for(3), sr = spec_for(8);
    sr[Param::AlphaL] = 0.4;
    const auto logs = simulate_participant(cfg, spec_for(3), 5, "p");
    Agent h(cfg, hybrid), a(cfg, mb), b(cfg, sr);
    int checked = 0;
    for (const auto& t : logs) {
      if (t.block > 3) break;
      h.begin_trial(t.start, t.goal);
      a.begin_trial(t.start, t.goal);
      b.begin_trial(t.start, t.goal);
      for (const auto& tr : t.transitions) {
        const Eigen::Vector4d want = 0.3 * a.policy(tr.state) + 0.7 * b.policy(tr.state);
        CHECK(h.policy(tr.state).isApprox(want, 1e-12));
        ++checked;
        h.observe(tr);
        a.observe(tr);
        b.observe(tr);
      }
      h.end_trial();
      a.end_trial();
      b.end_trial();
    }
    CHECK(checked > 50);
  }

  TEST_CASE("SR values follow the learned occupancy") {
    const auto cfg = build_experiment(1);
    ModelSpec s = spec_for(8);
    s[Param::AlphaL] = 0.5;
    Agent agent(cfg, s);
    for (int i = 0; i < 30; ++i) feed(agent, walk(cfg, cfg.named_paths.at("B")));
    agent.begin_trial(3, 27);
    const auto p = agent.policy(3);
    Eigen::Index best;
    p.maxCoeff(&best);
    CHECK(best == index_of(Action::Right));
    // Row (23, right) -> 27 converges to a single terminal entry.
    CHECK(agent.sr_matrix()((23 - 1) * kActionCount + index_of(Action::Right), 26) == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("cohort seeding is prefix-stable") {
    const auto cfg = build_experiment(2);
    const auto small = simulate_cohort(cfg, spec_for(3), 9, 2);
    const auto large = simulate_cohort(cfg, spec_for(3), 9, 3);
    REQUIRE(large.size() > small.size());
    CHECK(std::equal(small.begin(), small.end(), large.begin()));
    CHECK(small.front().participant == "sim001");
  }

  TEST_CASE("action sampling uses the cumulative distribution") {
    Rng rng(4);
    const Eigen::Vector4d p(0.0, 0.2, 0.0, 0.8);
    int counts[4] = {0, 0, 0, 0};
    for (int i = 0; i < 20000; ++i) ++counts[sample_action(p, rng)];
    CHECK(counts[0] == 0);
    CHECK(counts[2] == 0);
    CHECK(std::abs(counts[1] / 20000.0 - 0.2) < 0.02);
  }
}
