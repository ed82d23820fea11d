#include "detour/fitting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "detour/analysis.hpp"

namespace detour {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct StartRange {
  double lo;
  double hi;
};

StartRange start_range(Param p) {
  switch (param_info(p).transform) {
    case Transform::Log: return {0.05, 5.0};
    case Transform::Identity: return {-5.0, 5.0};
    case Transform::Logit: return p == Param::Gamma ? StartRange{0.5, 0.99} : StartRange{0.05, 0.95};
  }
  return {0.0, 1.0};
}

std::vector<Param> continuous_params(int model) {
  std::vector<Param> out;
  for (Param p : model_info(model).params) {
    if (!param_info(p).integer) out.push_back(p);
  }
  return out;
}

ModelSpec decode(const ModelSpec& base, const std::vector<Param>& params, const Eigen::VectorXd& z) {
  ModelSpec spec = base;
  for (std::size_t i = 0; i < params.size(); ++i) {
    spec[params[i]] = from_unconstrained(param_info(params[i]), z(static_cast<Eigen::Index>(i)));
  }
  return spec;
}

/// Latin-hypercube sample of `n` points in the unconstrained space.
std::vector<Eigen::VectorXd> latin_starts(const std::vector<Param>& params, int n, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(params.size());
  std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(n), Eigen::VectorXd(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<int> strata(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) strata[i] = i;
    for (int i = n - 1; i > 0; --i) {
      std::swap(strata[i], strata[rng.uniform_int(static_cast<std::uint64_t>(i + 1))]);
    }
    const ParamInfo& info = param_info(params[j]);
    const StartRange r = start_range(params[j]);
    const double zlo = to_unconstrained(info, r.lo);
    const double zhi = to_unconstrained(info, r.hi);
    for (int i = 0; i < n; ++i) {
      const double u = (strata[i] + rng.uniform()) / n;
      out[i](j) = zlo + u * (zhi - zlo);
    }
  }
  return out;
}

void finish(FitResult& r) {
  r.bic = bic(r.ll, r.k, r.n);
  r.aic = aic(r.ll, r.k);
}

std::string fmt(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "-inf") return kNegInf;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  return std::stod(s);
}

}  // namespace

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw std::invalid_argument("unknown split: " + std::string(s));
}

LogLikelihood one_step_ahead_ll(const ExperimentConfig& cfg, const ModelSpec& spec,
                                const std::vector<TrialRecord>& trials, Split split, AgentOptions options) {
  Agent agent(cfg, spec, options);
  LogLikelihood out;
  for (const auto& trial : trials) {
    if (split == Split::Train && trial.phase != Phase::Learning) continue;
    const bool scored = split == Split::Train || trial.phase == Phase::Test;
    agent.begin_trial(trial.start, trial.goal);
    for (const auto& tr : trial.transitions) {
      if (scored) {
        const double lp = agent.log_policy(tr.state)(index_of(tr.action));
        out.ll += std::isnan(lp) ? kNegInf : lp;
        ++out.decisions;
      }
      agent.observe(tr);
    }
    agent.end_trial();
  }
  if (std::isnan(out.ll)) out.ll = kNegInf;
  return out;
}

double bic(double ll, int k, int n) { return -2.0 * ll + k * std::log(static_cast<double>(n)); }
double aic(double ll, int k) { return -2.0 * ll + 2.0 * k; }

FitResult fit_participant(const ExperimentConfig& cfg, int model, const std::vector<TrialRecord>& trials,
                          const FitOptions& opts) {
  if (opts.restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  FitResult best;
  best.participant = trials.empty() ? "" : trials.front().participant;
  best.model = model;
  best.split = Split::Train;
  best.params.model = model;
  best.k = model_info(model).params.size();
  best.ll = kNegInf;
  best.failed = true;

  const std::vector<Param> params = continuous_params(model);
  std::vector<double> omegas{0.0};
  if (model_info(model).planner == Planner::DepthLimited) omegas = {1, 2, 3, 4, 5, 6, 7};

  Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(model), 0));
  for (double omega : omegas) {
    ModelSpec base;
    base.model = model;
    if (omega > 0) base[Param::Omega] = omega;

    auto objective = [&](const Eigen::VectorXd& z) {
      return -one_step_ahead_ll(cfg, decode(base, params, z), trials, Split::Train, opts.agent).ll;
    };

    const int restarts = params.empty() ? 1 : opts.restarts;
    const auto starts = latin_starts(params, restarts, rng);
    for (const auto& z0 : starts) {
      const NelderMeadResult nm = nelder_mead(objective, z0, opts.nm);
      const double ll = -nm.f;
      if (std::isfinite(ll) && (best.failed || ll > best.ll)) {
        best.ll = ll;
        best.params = decode(base, params, nm.x);
        best.converged = nm.converged;
        best.failed = false;
      }
      ++best.restarts;
    }
  }
  best.n = one_step_ahead_ll(cfg, best.params, trials, Split::Train, opts.agent).decisions;
  finish(best);
  return best;
}

FitResult generalization_eval(const ExperimentConfig& cfg, const FitResult& fit,
                              const std::vector<TrialRecord>& trials, AgentOptions options) {
  FitResult out = fit;
  out.split = Split::Test;
  const LogLikelihood ll = one_step_ahead_ll(cfg, fit.params, trials, Split::Test, options);
  out.ll = ll.ll;
  out.n = ll.decisions;
  out.failed = fit.failed || !std::isfinite(ll.ll);
  finish(out);
  return out;
}

std::vector<FitResult> fit_all(const ExperimentConfig& cfg, const std::vector<TrialRecord>& logs,
                               const std::vector<int>& models, const FitOptions& opts, int jobs, bool with_test) {
  const auto participants = group_by_participant(logs);
  const std::size_t per = with_test ? 2 : 1;
  const std::size_t total = participants.size() * models.size();
  std::vector<FitResult> out(total * per);
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t job; (job = cursor.fetch_add(1)) < total;) {
      const auto& trials = participants[job / models.size()];
      const int model = models[job % models.size()];
      FitResult fit = fit_participant(cfg, model, trials, opts);
      if (with_test) out[job * per + 1] = generalization_eval(cfg, fit, trials, opts.agent);
      out[job * per] = std::move(fit);
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

nlohmann::json fit_to_json(const FitResult& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  return nlohmann::json{{"participant", r.participant},
                        {"model", r.model},
                        {"split", std::string(to_string(r.split))},
                        {"k", r.k},
                        {"N", r.n},
                        {"LL", num(r.ll)},
                        {"AIC", num(r.aic)},
                        {"BIC", num(r.bic)},
                        {"params", params_to_json(r.params)},
                        {"restarts", r.restarts},
                        {"converged", r.converged},
                        {"failed", r.failed}};
}

FitResult fit_from_json(const nlohmann::json& j) {
  auto num = [](const nlohmann::json& v, double fallback) { return v.is_null() ? fallback : v.get<double>(); };
  FitResult r;
  r.participant = j.at("participant").get<std::string>();
  r.model = j.at("model").get<int>();
  r.split = parse_split(j.at("split").get<std::string>());
  r.k = j.at("k").get<int>();
  r.n = j.at("N").get<int>();
  r.ll = num(j.at("LL"), kNegInf);
  r.aic = num(j.at("AIC"), std::numeric_limits<double>::infinity());
  r.bic = num(j.at("BIC"), std::numeric_limits<double>::infinity());
  r.params = params_from_json(r.model, j.at("params"));
  r.restarts = j.value("restarts", 0);
  r.converged = j.value("converged", false);
  r.failed = j.value("failed", false);
  return r;
}

void write_fits_csv(std::ostream& out, const std::vector<FitResult>& fits) {
  out << "participant,model,split,k,N,LL,AIC,BIC";
  for (int p = 0; p < kParamCount; ++p) out << ',' << param_info(static_cast<Param>(p)).name;
  out << ",restarts,converged,failed\n";
  for (const auto& r : fits) {
    out << r.participant << ',' << r.model << ',' << to_string(r.split) << ',' << r.k << ',' << r.n << ','
        << fmt(r.ll) << ',' << fmt(r.aic) << ',' << fmt(r.bic);
    const auto& used = model_info(r.model).params;
    for (int p = 0; p < kParamCount; ++p) {
      out << ',';
      if (std::find(used.begin(), used.end(), static_cast<Param>(p)) != used.end()) {
        out << fmt(r.params[static_cast<Param>(p)]);
      }
    }
    out << ',' << r.restarts << ',' << (r.converged ? "true" : "false") << ',' << (r.failed ? "true" : "false")
        << '\n';
  }
}

void write_fits_json(std::ostream& out, const std::vector<FitResult>& fits) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : fits) arr.push_back(fit_to_json(r));
  out << arr.dump(2) << '\n';
}

std::vector<FitResult> read_fits_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
  }
  std::vector<FitResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    cells.resize(header.size());
    FitResult r;
    nlohmann::json params = nlohmann::json::object();
    for (std::size_t i = 0; i < header.size(); ++i) {
      const std::string& h = header[i];
      const std::string& v = cells[i];
      if (h == "participant") r.participant = v;
      else if (h == "model") r.model = std::stoi(v);
      else if (h == "split") r.split = parse_split(v);
      else if (h == "k") r.k = std::stoi(v);
      else if (h == "N") r.n = std::stoi(v);
      else if (h == "LL") r.ll = parse_double(v);
      else if (h == "AIC") r.aic = parse_double(v);
      else if (h == "BIC") r.bic = parse_double(v);
      else if (h == "restarts") r.restarts = std::stoi(v);
      else if (h == "converged") r.converged = v == "true";
      else if (h == "failed") r.failed = v == "true";
      else if (parse_param(h) && !v.empty()) params[h] = parse_double(v);
    }
    r.params = params_from_json(r.model, params);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<FitResult> read_fits_json(std::istream& in) {
  const auto j = nlohmann::json::parse(in);
  std::vector<FitResult> out;
  for (const auto& row : j) out.push_back(fit_from_json(row));
  return out;
}

std::vector<FitResult> read_fits(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return read_fits_csv(in);
  return read_fits_json(in);
}

}  // namespace detour
