// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 5        run only the listed criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "detour/agent.hpp"
#include "detour/analysis.hpp"
#include "detour/paths.hpp"
#include "detour/recovery.hpp"
#include "detour/selection.hpp"
#include "detour/tabular.hpp"

#ifndef DETOUR_CLI_PATH
#define DETOUR_CLI_PATH "detour"
#endif

using namespace detour;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------

Verdict path_ev_anchors() {
  const auto e1 = build_experiment(1);
  const auto e2 = build_experiment(2);
  struct Check {
    const char* what;
    double got;
    double want;
  };
  const std::vector<Check> checks = {
      {"B from 5", path_expected_value(e1, {5, 6, 7, 8, 12, 16, 20, 19, 23, 27}), 90.4},
      {"C from 5", path_expected_value(e1, {5, 9, 13, 17, 21, 22, 23, 27}), 50.0},
      {"C from 7", path_expected_value(e1, {7, 6, 5, 9, 13, 17, 21, 22, 23, 27}), 48.0},
      {"EL(11)", e2.losses.expected_entry(11), -60.2},
      {"EL(16)", e2.losses.expected_entry(16), -2.6},
      {"EL(5-9-13)", path_expected_loss(e2, {5, 9, 13}), -17.2},
  };
  Verdict o{true, ""};
  for (const auto& c : checks) {
    const bool ok = std::abs(c.got - c.want) <= 1e-9;
    o.pass = o.pass && ok;
    o.detail += fmt("%s=%.10g%s ", c.what, c.got, ok ? "" : "(!)");
  }
  return o;
}

// 2 -------------------------------------------------------------------------

// Exact upper tail from Pascal's triangle in long double.
std::optional<int> threshold_oracle(int n, long double p, long double alpha) {
  std::vector<long double> pmf{1.0L};
  for (int i = 0; i < n; ++i) {
    std::vector<long double> next(pmf.size() + 1, 0.0L);
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      next[k] += pmf[k] * (1.0L - p);
      next[k + 1] += pmf[k] * p;
    }
    pmf.swap(next);
  }
  long double tail = 0.0L;
  std::optional<int> best;
  for (int m = n; m >= 0; --m) {
    tail += pmf[static_cast<std::size_t>(m)];
    if (tail <= alpha) best = m;
    else break;
  }
  return best;
}

Verdict binomial_thresholds() {
  const auto t20 = binomial_threshold(20, 0.5, 0.05);
  const auto t13 = binomial_threshold(13, 0.5, 0.05);
  bool ok = t20 == 15 && t13 == 10;
  int mismatches = 0;
  for (double p : {0.2, 1.0 / 3.0, 0.5}) {
    for (int n = 1; n <= 60; ++n) {
      if (binomial_threshold(n, p, 0.05) != threshold_oracle(n, p, 0.05L)) ++mismatches;
    }
  }
  ok = ok && mismatches == 0;
  return {ok, fmt("n=20 -> %d, n=13 -> %d, oracle mismatches %d/180", t20.value_or(-1), t13.value_or(-1), mismatches)};
}

// 3 -------------------------------------------------------------------------

Verdict oracle_planner_equivalence() {
  int pairs = 0, failures = 0;
  std::string first_failure;
  for (int id : {1, 2, 3}) {
    const auto cfg = build_experiment(id);
    const SuccessorTable next = oracle_successors(cfg);
    for (const CellPair& pair : cfg.valid_pairs()) {
      ++pairs;
      Eigen::VectorXd r(cfg.grid.cell_count());
      for (Cell c = 1; c <= cfg.grid.cell_count(); ++c) r(c - 1) = cfg.losses.expected_entry(c);
      r(pair.goal - 1) = cfg.losses.goal_reward;
      const auto vi = value_iteration<double>(next, r, pair.goal - 1, 1.0);
      const Path rollout = greedy_rollout(next, vi.q, pair.start, pair.goal, cfg.grid.cell_count());
      const RankedPaths ranked = rank_paths(cfg, pair.start, pair.goal);
      bool ok = vi.converged && rollout.back() == pair.goal && !ranked.paths.empty();
      if (ok) {
        ok = false;
        for (std::size_t i = 0; i < ranked.paths.size() && ranked.level[i] == 1; ++i) ok = ok || ranked.paths[i] == rollout;
      }
      if (!ok) {
        ++failures;
        if (first_failure.empty()) first_failure = fmt(" first: exp%d (%d,%d)", id, pair.start, pair.goal);
      }
    }
  }
  return {failures == 0, fmt("%d pairs over 3 experiments, %d mismatches%s", pairs, failures, first_failure.c_str())};
}

// 4 -------------------------------------------------------------------------

Verdict corridor_ranking() {
  const auto cfg = build_experiment(2);
  const std::vector<std::string> stated = {"B", "C1C2", "C1A2", "A1A2", "A1C2"};
  std::vector<double> ev;
  std::string detail;
  for (const auto& name : stated) {
    ev.push_back(path_expected_value(cfg, cfg.named_paths.at(name)));
    detail += fmt("%s=%.1f ", name.c_str(), ev.back());
  }
  bool ok = true;
  for (std::size_t i = 1; i < ev.size(); ++i) ok = ok && ev[i - 1] > ev[i];
  return {ok, detail + "(stated order B > C1C2 > C1A2 > A1A2 > A1C2)"};
}

// 5 -------------------------------------------------------------------------

// Average policy at cell 8 right after the blockage at (8, right) is hit on
// the way 3 -> 7 -> 8, probed before every blocked test trial of a model-3
// cohort on experiment 1.
Eigen::Vector4d probe_cell8(const ExperimentConfig& cfg, const ModelSpec& spec,
                            const std::vector<std::vector<TrialRecord>>& cohort) {
  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  int probes = 0;
  for (const auto& trials : cohort) {
    Agent agent(cfg, spec);
    for (const auto& t : trials) {
      if (t.phase == Phase::Test && t.blocked) {
        Agent probe = agent;
        probe.begin_trial(3, 27);
        probe.observe({3, Action::Right, -1, 7, false});
        probe.observe({7, Action::Down, -1, 8, false});
        probe.observe({8, Action::Right, -1, 8, true});
        sum += probe.policy(8);
        ++probes;
      }
      agent.begin_trial(t.start, t.goal);
      for (const auto& tr : t.transitions) {
        agent.policy(tr.state);
        agent.observe(tr);
      }
      agent.end_trial();
    }
  }
  return sum / probes;
}

Verdict replanning_mechanism() {
  const auto cfg = build_experiment(1);
  ModelSpec mb;
  mb.model = 3;
  mb[Param::Beta] = 1.5;
  mb[Param::Gamma] = 0.9;
  ModelSpec sr = mb;
  sr.model = 8;
  sr[Param::AlphaL] = 0.3;
  const auto cohort = group_by_participant(simulate_cohort(cfg, mb, 2024, 10));
  const Eigen::Vector4d p_mb = probe_cell8(cfg, mb, cohort);
  const Eigen::Vector4d p_sr = probe_cell8(cfg, sr, cohort);
  const int right = index_of(Action::Right);
  const int up = index_of(Action::Up);
  const bool mb_min = p_mb(right) <= p_mb.minCoeff() + 1e-12 && p_mb(right) < p_mb(up);
  bool sr_max = true;
  for (int a = 0; a < kActionCount; ++a) sr_max = sr_max && (a == right || p_sr(right) > p_sr(a));
  return {mb_min && sr_max, fmt("P(up,right,down,left) at 8: MB (%.3f %.3f %.3f %.3f), SR (%.3f %.3f %.3f %.3f)",
                                p_mb(0), p_mb(1), p_mb(2), p_mb(3), p_sr(0), p_sr(1), p_sr(2), p_sr(3))};
}

// 6 -------------------------------------------------------------------------

Verdict simulation_optimality() {
  const auto cfg = build_experiment(1);
  ModelSpec spec;
  spec.model = 3;
  spec[Param::Beta] = 1.5;
  spec[Param::Gamma] = 0.9;
  spec[Param::Alpha1High] = spec[Param::Alpha1Medium] = spec[Param::Alpha1Low] = 0.8;
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto rep = optimality_report(simulate_cohort(cfg, spec, seed, 20), cfg);
    int pass = 0, second = 0, blocked = 0;
    for (const auto& p : rep.participants) {
      pass += p.pretest_pass;
      second += p.replan_second_optimal;
      blocked += p.replan_n;
    }
    const double pass_rate = pass / 20.0;
    const double second_rate = static_cast<double>(second) / blocked;
    ok = ok && pass_rate >= 0.8 && second_rate >= 0.6;
    detail += fmt("seed%d %.0f%%/%.0f%% ", static_cast<int>(seed), 100 * pass_rate, 100 * second_rate);
  }
  return {ok, detail + "(pretest pass / second-optimal on blocked)"};
}

// 7 -------------------------------------------------------------------------

Verdict model_recovery() {
  const auto cfg = build_experiment(2);
  const std::vector<int> candidates = {1, 2, 3, 8};
  FitOptions opts;
  opts.restarts = 3;
  bool ok = true;
  std::string detail;
  for (int generator : candidates) {
    ModelSpec truth;
    truth.model = generator;
    truth[Param::Beta] = 0.5;
    truth[Param::Gamma] = 0.9;
    truth[Param::AlphaC] = 0.3;
    truth[Param::AlphaL] = 0.3;
    const auto rep = recovery_study(cfg, truth, 30, candidates, 7000 + generator, opts, 1, 1000000);
    const bool won = rep.best_mean_bic == generator && rep.generator_ep_bic > 0.9;
    ok = ok && won;
    detail += fmt("gen%d->best %d EP %.3f; ", generator, rep.best_mean_bic, rep.generator_ep_bic);
  }
  return {ok, detail};
}

// 8 -------------------------------------------------------------------------

Verdict sr_analytics() {
  double worst_learned = 0.0, worst_q = 0.0;
  Rng rng(88);
  for (int length = 2; length <= 6; ++length) {
    const double gamma = 0.3 + 0.6 * rng.uniform();
    // Deterministic chain 0 -> 1 -> ... -> length, one action per state.
    const int states = length + 1;
    SuccessorMatrix<double> m = SuccessorMatrix<double>::Zero(states * kActionCount, states);
    for (int update = 0; update < 10000;) {
      for (int s = 0; s < length && update < 10000; ++s, ++update) {
        const std::optional<int> a_next = s + 1 < length ? std::optional<int>(0) : std::nullopt;
        sr_td_update(m, s, 0, s + 1, a_next, 0.1, gamma);
      }
    }
    for (int s = 0; s < length; ++s) {
      for (int u = 0; u < states; ++u) {
        const double analytic = u > s ? std::pow(gamma, u - s - 1) : 0.0;
        worst_learned = std::max(worst_learned, std::abs(m(s * kActionCount, u) - analytic));
      }
    }
  }

  // Stochastic fixed policy on a 5-cell corridor with absorbing ends.
  const int n = 5;
  const double gamma = 0.8;
  const int sa = n * kActionCount;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(sa, n);   // (s,a) -> next cell
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, sa);  // cell -> (s,a), zero at absorbing cells
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < kActionCount; ++a) {
      const int d = a == 1 ? std::min(s + 1, n - 1) : a == 3 ? std::max(s - 1, 0) : s;
      p(s * kActionCount + a, d) = 1.0;
    }
    if (s == 0 || s == n - 1) continue;
    const Eigen::Vector4d w(0.1, 0.5, 0.1, 0.3);
    for (int a = 0; a < kActionCount; ++a) pi(s, s * kActionCount + a) = w(a);
  }
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(sa, sa);
  const SuccessorMatrix<double> m = (eye - gamma * p * pi).partialPivLu().solve(p);
  Eigen::VectorXd r(n);
  r << 10.0, -1.0, -3.0, -1.0, 100.0;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(sa);
  for (int sweep = 0; sweep < 2000; ++sweep) q = p * r + gamma * p * (pi * q);
  const ActionValueTable<double> q_sr = sr_q(m, r);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < kActionCount; ++a) worst_q = std::max(worst_q, std::abs(q_sr(s, a) - q(s * kActionCount + a)));
  }
  return {worst_learned <= 1e-3 && worst_q <= 1e-6,
          fmt("learned vs analytic max err %.2e, sr_q vs policy evaluation max err %.2e", worst_learned, worst_q)};
}

// 9 -------------------------------------------------------------------------

Verdict selection_identities() {
  Rng rng(99);
  const int n = 25, k = 4;
  Eigen::MatrixXd ev(n, k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) ev(i, j) = -200.0 + 20.0 * rng.normal();
  }
  const auto post = vb_dirichlet(ev, 1.0);
  const double sum_err = std::abs(post.alpha.sum() - (k * 1.0 + n));

  Eigen::MatrixXd sym(n, 2);
  for (int i = 0; i < n; ++i) sym(i, 0) = sym(i, 1) = -150.0 + 10.0 * rng.normal();
  Rng ep_rng(derive_seed(99, 1, 0));
  const Eigen::VectorXd ep_sym = exceedance_prob(vb_dirichlet(sym), 1000000, ep_rng);

  Eigen::MatrixXd shifted = ev;
  for (int i = 0; i < n; ++i) shifted.row(i).array() += 1000.0 * rng.normal();
  const auto post_shift = vb_dirichlet(shifted, 1.0);
  Rng a_rng(derive_seed(99, 2, 0)), b_rng(derive_seed(99, 3, 0));
  const Eigen::VectorXd ep_a = exceedance_prob(post, 1000000, a_rng);
  const Eigen::VectorXd ep_b = exceedance_prob(post_shift, 1000000, b_rng);
  const double alpha_shift = (post.alpha - post_shift.alpha).cwiseAbs().maxCoeff();
  const double ep_shift = (ep_a - ep_b).cwiseAbs().maxCoeff();

  const bool ok = sum_err <= 1e-8 && std::abs(ep_sym(0) - 0.5) <= 0.01 && alpha_shift <= 1e-6 && ep_shift <= 0.005;
  return {ok, fmt("|sum(alpha) - (K a0 + N)| = %.1e; symmetric EP = %.4f; row shift: max |d alpha| = %.1e, "
                  "max |d EP| = %.4f",
                  sum_err, ep_sym(0), alpha_shift, ep_shift)};
}

// 10 ------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string without_created(const std::filesystem::path& manifest) {
  std::istringstream in(slurp(manifest));
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.find("\"created\"") == std::string::npos) out += line + "\n";
  }
  return out;
}

Verdict determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / fmt("detour_accept_%d", static_cast<int>(::getpid()));
  fs::create_directories(dir);
  const std::string cli = DETOUR_CLI_PATH;
  const std::string base = dir.string();
  const std::vector<std::string> files = {"logs.jsonl", "fits.csv", "logs.jsonl.manifest.json",
                                          "fits.csv.manifest.json"};
  std::vector<std::vector<std::string>> runs;
  for (int run : {1, 2}) {
    const std::string sim = cli + " simulate --experiment 2 --model 3 --params '{\"beta\":1.5,\"gamma\":0.9}' "
                                  "--subjects 3 --seed 11 --out " + base + "/logs.jsonl 2>/dev/null";
    // Thread count differs between runs; it must not change the fit table.
    const std::string fit = cli + " fit --logs " + base + "/logs.jsonl --models 1,3,8 --restarts 2 --seed 5 --split test"
                                  " --jobs " + std::to_string(run * 2) + " --out " + base + "/fits.csv 2>/dev/null";
    if (std::system(sim.c_str()) != 0 || std::system(fit.c_str()) != 0) {
      fs::remove_all(dir);
      return {false, "CLI invocation failed (" + cli + ")"};
    }
    std::vector<std::string> contents;
    for (const auto& f : files) {
      contents.push_back(f.ends_with(".manifest.json") ? without_created(dir / f) : slurp(dir / f));
    }
    runs.push_back(contents);
  }
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const bool same = !runs[0][i].empty() && runs[0][i] == runs[1][i];
    ok = ok && same;
    detail += fmt("%s %s; ", files[i].c_str(), same ? "identical" : "DIFFER");
  }
  fs::remove_all(dir);
  return {ok, detail + "(manifests compared without their creation stamp)"};
}

struct AcceptanceItem {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<AcceptanceItem> all = {
      {1, "path-EV anchors", 1, path_ev_anchors},
      {2, "binomial thresholds", 1, binomial_thresholds},
      {3, "oracle-planner equivalence", 30, oracle_planner_equivalence},
      {4, "exp-2 corridor ranking from cell 7", 1, corridor_ranking},
      {5, "re-planning mechanism at cell 8", 10, replanning_mechanism},
      {6, "simulation optimality", 300, simulation_optimality},
      {7, "model recovery", 1800, model_recovery},
      {8, "SR analytics", 10, sr_analytics},
      {9, "model-selection identities", 30, selection_identities},
      {10, "determinism", 60, determinism},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt(" [over time budget %.0f s]", c.budget_seconds);
    }
    failed += !o.pass;
    std::printf("%s criterion %d: %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
