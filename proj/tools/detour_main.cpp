// Command-line entry point: simulate, fit, compare, analyze, serve, config.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "detour/agent.hpp"
#include "detour/analysis.hpp"
#include "detour/fitting.hpp"
#include "detour/manifest.hpp"
#include "detour/selection.hpp"
#include "detour/server.hpp"
#include "detour/trial_log.hpp"

using namespace detour;
using nlohmann::json;

namespace {

std::string default_data_dir() {
  if (const char* env = std::getenv("DETOUR_DATA_DIR"); env && *env) return env;
  return "data";
}

ExperimentConfig resolve_config(int experiment, const std::string& config_path,
                                const std::vector<TrialRecord>* logs = nullptr) {
  if (!config_path.empty()) return load_config(config_path);
  if (experiment == 0 && logs && !logs->empty()) experiment = logs->front().experiment;
  if (experiment == 0) throw std::invalid_argument("pass --experiment or --config");
  return build_experiment(experiment);
}

std::vector<int> parse_models(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item == "all") {
      for (int m = 1; m <= kModelCount; ++m) out.push_back(m);
      continue;
    }
    const int m = std::stoi(item);
    model_info(m);
    out.push_back(m);
  }
  if (out.empty()) throw std::invalid_argument("no models given");
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Knowledge parse_knowledge(const std::string& s) {
  if (s == "oracle") return Knowledge::Oracle;
  if (s == "learn") return Knowledge::LearnOnExperience;
  throw std::invalid_argument("knowledge must be oracle or learn");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detour-task simulator, model fitting and model comparison"};
  app.require_subcommand(1);

  int experiment = 0;
  std::string config_path;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--experiment", experiment, "Canonical experiment 1, 2 or 3")->check(CLI::Range(1, 3));
    cmd->add_option("--config", config_path, "Experiment configuration JSON")->check(CLI::ExistingFile);
  };

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a cohort and write a JSONL trial log");
  add_config(sim);
  int sim_model = 1, subjects = 1;
  std::uint64_t seed = 1;
  std::string params_json, param_file, out_path, knowledge = "oracle";
  sim->add_option("--model", sim_model, "Model id 1..12")->check(CLI::Range(1, kModelCount));
  sim->add_option("--params", params_json, "Parameters as a JSON object");
  sim->add_option("--param-file", param_file, "File holding the parameter JSON object")->check(CLI::ExistingFile);
  sim->add_option("--subjects", subjects, "Cohort size")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "Master seed");
  sim->add_option("--knowledge", knowledge, "Transition knowledge: oracle or learn");
  sim->add_option("--out", out_path, "Output JSONL path")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit models to trial logs by maximum likelihood");
  add_config(fit);
  std::string logs_path, models = "1,2,3", split = "train";
  int restarts = 10, jobs = 1;
  fit->add_option("--logs", logs_path, "JSONL trial log")->required()->check(CLI::ExistingFile);
  fit->add_option("--models", models, "Comma-separated model ids or 'all'");
  fit->add_option("--split", split, "train, or test to add frozen-parameter test rows")
      ->check(CLI::IsMember({"train", "test"}));
  fit->add_option("--restarts", restarts, "Starts per fit")->check(CLI::PositiveNumber);
  fit->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  fit->add_option("--seed", seed, "Seed for restart points");
  fit->add_option("--knowledge", knowledge, "Transition knowledge: oracle or learn");
  fit->add_option("--out", out_path, "Output .csv or .json")->required();

  // compare
  auto* cmp = app.add_subcommand("compare", "Random-effects model selection over fitted evidences");
  std::string fits_path, ic = "bic";
  std::int64_t samples = 1000000;
  cmp->add_option("--fits", fits_path, "Fit table (.csv or .json)")->required()->check(CLI::ExistingFile);
  cmp->add_option("--ic", ic, "Criterion used to rank the printed table")->check(CLI::IsMember({"bic", "aic"}));
  cmp->add_option("--split", split, "Which split's fits to compare")->check(CLI::IsMember({"train", "test"}));
  cmp->add_option("--samples", samples, "Dirichlet draws for exceedance probabilities")
      ->check(CLI::Range(std::int64_t{100000}, std::int64_t{1000000000}));
  cmp->add_option("--seed", seed, "Sampling seed");
  cmp->add_option("--out", out_path, "Output .csv or .json (stdout when omitted)");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Behavioural reports from trial logs");
  add_config(ana);
  std::string report = "optimality", phase = "all", blocked = "any";
  double chance = 0.5, alpha = 0.05;
  int cell = 0;
  ana->add_option("--logs", logs_path, "JSONL trial log")->required()->check(CLI::ExistingFile);
  ana->add_option("--report", report, "optimality | pairs | heatmap | curve | loss-rate")
      ->check(CLI::IsMember({"optimality", "pairs", "heatmap", "curve", "loss-rate"}));
  ana->add_option("--chance", chance, "Chance probability for the binomial test");
  ana->add_option("--alpha", alpha, "Significance level for the binomial test");
  ana->add_option("--phase", phase, "Heatmap/curve filter: all, learning, pretest, test");
  ana->add_option("--blocked", blocked, "Heatmap/curve filter: any, yes, no");
  ana->add_option("--cell", cell, "Cell for loss-rate (default: the high-saliency cell)");
  ana->add_option("--out", out_path, "Output CSV (stdout when omitted)");

  // serve
  auto* srv = app.add_subcommand("serve", "HTTP service for the participant task");
  add_config(srv);
  int port = 8080;
  std::string host = "127.0.0.1", data_dir = default_data_dir() + "/sessions";
  srv->add_option("--port", port, "TCP port");
  srv->add_option("--host", host, "Bind address");
  srv->add_option("--data-dir", data_dir, "Where completed sessions are written");
  srv->add_option("--seed", seed, "Session seed");

  // config
  auto* cfg_cmd = app.add_subcommand("config", "Print an experiment configuration as JSON");
  add_config(cfg_cmd);
  cfg_cmd->add_option("--out", out_path, "Output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const ExperimentConfig cfg = resolve_config(experiment, config_path);
      json pj = json::object();
      if (!params_json.empty()) pj = json::parse(params_json);
      if (!param_file.empty()) {
        std::ifstream in(param_file);
        pj = json::parse(in);
      }
      const ModelSpec spec = params_from_json(sim_model, pj);
      AgentOptions opts;
      opts.knowledge = parse_knowledge(knowledge);
      const auto logs = simulate_cohort(cfg, spec, seed, subjects, opts);
      write_jsonl(out_path, logs);
      write_manifest(out_path, {"simulate",
                                config_hash(cfg),
                                seed,
                                {{"experiment", cfg.id}, {"model", sim_model}, {"params", params_to_json(spec)},
                                 {"subjects", subjects}, {"knowledge", knowledge}},
                                {},
                                {out_path}});
      std::cerr << "wrote " << logs.size() << " trials to " << out_path << '\n';
      return 0;
    }

    if (*fit) {
      const auto logs = read_jsonl(logs_path);
      const ExperimentConfig cfg = resolve_config(experiment, config_path, &logs);
      FitOptions opts;
      opts.restarts = restarts;
      opts.seed = seed;
      opts.agent.knowledge = parse_knowledge(knowledge);
      const auto fits = fit_all(cfg, logs, parse_models(models), opts, jobs, split == "test");
      auto out = open_out(out_path);
      if (ends_with(out_path, ".json")) write_fits_json(out, fits);
      else write_fits_csv(out, fits);
      write_manifest(out_path, {"fit",
                                config_hash(cfg),
                                seed,
                                {{"models", models}, {"split", split}, {"restarts", restarts}, {"knowledge", knowledge}},
                                {logs_path},
                                {out_path}});
      int failed = 0;
      for (const auto& f : fits) failed += f.failed;
      std::cerr << "wrote " << fits.size() << " fit rows to " << out_path << '\n';
      if (failed) {
        std::cerr << failed << " fits failed (non-finite likelihood)\n";
        return 2;
      }
      return 0;
    }

    if (*cmp) {
      const auto fits = read_fits(fits_path);
      auto rows = compare_models(fits, parse_split(split), samples, seed);
      const bool by_bic = ic == "bic";
      std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
        return by_bic ? a.ep_bic > b.ep_bic : a.ep_aic > b.ep_aic;
      });
      std::ostringstream text;
      if (ends_with(out_path, ".json")) text << comparison_json(rows) << '\n';
      else write_comparison_csv(text, rows);
      if (out_path.empty()) {
        std::cout << text.str();
      } else {
        open_out(out_path) << text.str();
        write_manifest(out_path, {"compare", "", seed, {{"ic", ic}, {"split", split}, {"samples", samples}},
                                  {fits_path}, {out_path}});
      }
      return 0;
    }

    if (*ana) {
      const auto logs = read_jsonl(logs_path);
      const ExperimentConfig cfg = resolve_config(experiment, config_path, &logs);
      TrialFilter filter = [&](const TrialRecord& t) {
        if (phase != "all" && to_string(t.phase) != phase) return false;
        if (blocked == "yes" && !t.blocked) return false;
        if (blocked == "no" && t.blocked) return false;
        return true;
      };
      std::ostringstream out;
      if (report == "optimality") {
        const auto rep = optimality_report(logs, cfg, chance, alpha);
        out << "participant,pretest_n,pretest_optimal,pretest_threshold,pretest_pass,replan_n,"
               "replan_second_optimal,replan_threshold,replan_pass\n";
        for (const auto& p : rep.participants) {
          out << p.participant << ',' << p.pretest_n << ',' << p.pretest_optimal << ','
              << (p.pretest_threshold ? std::to_string(*p.pretest_threshold) : "unattainable") << ','
              << (p.pretest_pass ? "true" : "false") << ',' << p.replan_n << ',' << p.replan_second_optimal << ','
              << (p.replan_threshold ? std::to_string(*p.replan_threshold) : "unattainable") << ','
              << (p.replan_pass ? "true" : "false") << '\n';
        }
      } else if (report == "pairs") {
        const auto rep = optimality_report(logs, cfg, chance, alpha);
        out << "start,goal,blocked,optimal,second_optimal,other\n";
        for (const auto& p : rep.pairs) {
          out << p.pair.start << ',' << p.pair.goal << ',' << (p.blocked ? "true" : "false") << ',' << p.optimal << ','
              << p.second_optimal << ',' << p.other << '\n';
        }
      } else if (report == "heatmap") {
        const Heatmap h = occupancy_heatmap(logs, cfg.grid, filter);
        for (int r = 1; r <= cfg.grid.rows; ++r) {
          for (int c = 1; c <= cfg.grid.cols; ++c) out << (c > 1 ? "," : "") << h.cells(cfg.grid.at(r, c) - 1);
          out << '\n';
        }
      } else if (report == "curve") {
        const LearningCurve curve = learning_curve(logs, filter);
        out << "block,mean_score,trials\n";
        for (const auto& b : curve.blocks) out << b.block << ',' << b.mean_score << ',' << b.trials << '\n';
        std::cerr << "spearman_rho " << curve.spearman_rho << '\n';
      } else {
        Cell target = cell;
        if (target == 0) {
          for (const auto& [c, loss] : cfg.losses.cells) {
            if (loss.saliency == Saliency::High) target = c;
          }
        }
        const auto rates = salient_loss_rate(logs, cfg, target);
        out << "participant,learning,pretest,test\n";
        for (const auto& r : rates) {
          out << r.participant << ',' << r.count.at(Phase::Learning) << ',' << r.count.at(Phase::Pretest) << ','
              << r.count.at(Phase::Test) << '\n';
        }
        std::cerr << "cell " << target << " mean learning " << mean_loss_rate(rates, Phase::Learning) << " test "
                  << mean_loss_rate(rates, Phase::Test) << '\n';
      }
      if (out_path.empty()) {
        std::cout << out.str();
      } else {
        open_out(out_path) << out.str();
        write_manifest(out_path, {"analyze", config_hash(cfg), 0, {{"report", report}}, {logs_path}, {out_path}});
      }
      return 0;
    }

    if (*srv) {
      ExperimentConfig cfg = resolve_config(experiment == 0 && config_path.empty() ? 1 : experiment, config_path);
      TaskServer server(std::move(cfg), data_dir, seed);
      const int bound = server.bind(host, port);
      if (bound < 0) {
        std::cerr << "cannot bind " << host << ':' << port << '\n';
        return 1;
      }
      std::cerr << "serving on http://" << host << ':' << bound << " (sessions in " << data_dir << ")\n";
      return server.listen_after_bind() ? 0 : 1;
    }

    if (*cfg_cmd) {
      const ExperimentConfig cfg = resolve_config(experiment, config_path);
      const std::string text = config_to_json(cfg).dump(2) + "\n";
      if (out_path.empty()) std::cout << text;
      else open_out(out_path) << text;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
