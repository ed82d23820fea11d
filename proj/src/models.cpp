#include "detour/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace detour {

namespace {

constexpr double kRateLo = 0.001;
constexpr double kRateHi = 0.999;

const std::array<ParamInfo, kParamCount> kParams = {{
    {Param::Beta, "beta", 0.0, 20.0, Transform::Log},
    {Param::Gamma, "gamma", kRateLo, kRateHi, Transform::Logit},
    {Param::AlphaC, "alpha_c", kRateLo, kRateHi, Transform::Logit},
    {Param::QUp0, "q_u0", -100.0, 100.0, Transform::Identity},
    {Param::QRight0, "q_r0", -100.0, 100.0, Transform::Identity},
    {Param::QDown0, "q_d0", -100.0, 100.0, Transform::Identity},
    {Param::QLeft0, "q_l0", -100.0, 100.0, Transform::Identity},
    {Param::Alpha1High, "alpha1_hs", kRateLo, kRateHi, Transform::Logit},
    {Param::Alpha1Medium, "alpha1_ms", kRateLo, kRateHi, Transform::Logit},
    {Param::Alpha1Low, "alpha1_ls", kRateLo, kRateHi, Transform::Logit},
    {Param::Omega, "omega", 1.0, 7.0, Transform::Identity, true},
    {Param::AlphaL, "alpha_l", kRateLo, kRateHi, Transform::Logit},
    {Param::Lambda, "lambda", kRateLo, kRateHi, Transform::Logit},
    {Param::OmegaHybrid, "omega_hb", kRateLo, kRateHi, Transform::Logit},
}};

using P = Param;

const std::vector<ModelInfo>& registry() {
  static const std::vector<ModelInfo> models = {
      {1, "Baseline (random)", "Baseline", Planner::Random, RewardRule::None, {}},
      {2, "Q-learning", "Q-learning", Planner::QLearning, RewardRule::None,
       {P::Beta, P::Gamma, P::AlphaC, P::QUp0, P::QRight0, P::QDown0, P::QLeft0}},
      {3, "Model-based RL", "MBRL", Planner::ValueIteration, RewardRule::LinearFilter,
       {P::Beta, P::Gamma, P::Alpha1High, P::Alpha1Medium, P::Alpha1Low}},
      {4, "Avoids salient loss (MB)", "MB-AvoidSal", Planner::ValueIteration, RewardRule::AvoidSalient,
       {P::Beta, P::Gamma}},
      {5, "Remembers the last R (MB)", "MB-RemR", Planner::ValueIteration, RewardRule::LastReward,
       {P::Beta, P::Gamma}},
      {6, "Finds the shortest path (MB)", "MB-ShPath", Planner::ValueIteration, RewardRule::ShortestPath,
       {P::Beta, P::Gamma}},
      {7, "Cubed model-based RL", "CMBRL", Planner::DepthLimited, RewardRule::LinearFilter,
       {P::Beta, P::Gamma, P::Alpha1High, P::Alpha1Medium, P::Alpha1Low, P::Omega}},
      {8, "Successor representation", "SR", Planner::SuccessorRep, RewardRule::LinearFilter,
       {P::Beta, P::Gamma, P::AlphaL, P::Alpha1High, P::Alpha1Medium, P::Alpha1Low}},
      {9, "Avoids salient loss (SR)", "SR-AvoidSal", Planner::SuccessorRep, RewardRule::AvoidSalient,
       {P::Beta, P::Gamma, P::Lambda}},
      {10, "Remembers the last R (SR)", "SR-RemR", Planner::SuccessorRep, RewardRule::LastReward,
       {P::Beta, P::Gamma, P::Lambda}},
      {11, "Finds the shortest path (SR)", "SR-ShPath", Planner::SuccessorRep, RewardRule::ShortestPath,
       {P::Beta, P::Gamma, P::Lambda}},
      {12, "Hybrid SR-MB", "Hybrid SR-MB", Planner::Hybrid, RewardRule::LinearFilter,
       {P::Beta, P::Gamma, P::AlphaL, P::OmegaHybrid, P::Alpha1High, P::Alpha1Medium, P::Alpha1Low}},
  };
  return models;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

const ParamInfo& param_info(Param p) { return kParams[static_cast<std::size_t>(p)]; }

std::optional<Param> parse_param(std::string_view name) {
  for (const auto& info : kParams) {
    if (info.name == name) return info.param;
  }
  return std::nullopt;
}

const ModelInfo& model_info(int id) {
  if (id < 1 || id > kModelCount) throw std::invalid_argument("unknown model id " + std::to_string(id));
  return registry()[static_cast<std::size_t>(id - 1)];
}

std::array<double, kParamCount> ModelSpec::default_values() {
  std::array<double, kParamCount> v{};
  v[static_cast<std::size_t>(P::Beta)] = 1.0;
  v[static_cast<std::size_t>(P::Gamma)] = 0.9;
  v[static_cast<std::size_t>(P::AlphaC)] = 0.5;
  v[static_cast<std::size_t>(P::Alpha1High)] = 0.8;
  v[static_cast<std::size_t>(P::Alpha1Medium)] = 0.8;
  v[static_cast<std::size_t>(P::Alpha1Low)] = 0.8;
  v[static_cast<std::size_t>(P::Omega)] = 7.0;
  v[static_cast<std::size_t>(P::AlphaL)] = 0.3;
  v[static_cast<std::size_t>(P::Lambda)] = 0.3;
  v[static_cast<std::size_t>(P::OmegaHybrid)] = 0.5;
  return v;
}

void check_bounds(const ModelSpec& spec) {
  for (Param p : spec.info().params) {
    const ParamInfo& info = param_info(p);
    const double v = spec[p];
    if (!std::isfinite(v) || v < info.lower || v > info.upper) {
      throw std::invalid_argument(std::string(info.name) + " = " + std::to_string(v) + " outside [" +
                                  std::to_string(info.lower) + ", " + std::to_string(info.upper) + "]");
    }
    if (info.integer && v != std::round(v)) {
      throw std::invalid_argument(std::string(info.name) + " must be an integer");
    }
  }
}

Eigen::VectorXd to_vector(const ModelSpec& spec) {
  const auto& params = spec.info().params;
  Eigen::VectorXd x(static_cast<Eigen::Index>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) x(static_cast<Eigen::Index>(i)) = spec[params[i]];
  return x;
}

ModelSpec from_vector(int model, const Eigen::VectorXd& x, const ModelSpec& base) {
  ModelSpec spec = base;
  spec.model = model;
  const auto& params = spec.info().params;
  if (static_cast<std::size_t>(x.size()) != params.size()) {
    throw std::invalid_argument("model " + std::to_string(model) + " takes " + std::to_string(params.size()) +
                                " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) spec[params[i]] = x(static_cast<Eigen::Index>(i));
  return spec;
}

nlohmann::json params_to_json(const ModelSpec& spec) {
  nlohmann::json j = nlohmann::json::object();
  for (Param p : spec.info().params) j[std::string(param_info(p).name)] = spec[p];
  return j;
}

ModelSpec params_from_json(int model, const nlohmann::json& j) {
  ModelSpec spec;
  spec.model = model;
  const auto& used = spec.info().params;
  if (!j.is_object()) throw std::invalid_argument("parameters must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto p = parse_param(key);
    if (!p) throw std::invalid_argument("unknown parameter '" + key + "'");
    if (std::find(used.begin(), used.end(), *p) == used.end()) {
      throw std::invalid_argument("model " + std::to_string(model) + " has no parameter '" + key + "'");
    }
    spec[*p] = value.get<double>();
  }
  check_bounds(spec);
  return spec;
}

double to_unconstrained(const ParamInfo& info, double v) {
  switch (info.transform) {
    case Transform::Logit:
      return logit(std::clamp((v - info.lower) / (info.upper - info.lower), 1e-12, 1.0 - 1e-12));
    case Transform::Log: return std::log(std::max(v, 1e-6));
    case Transform::Identity: return v;
  }
  return v;
}

double from_unconstrained(const ParamInfo& info, double z) {
  switch (info.transform) {
    case Transform::Logit: return info.lower + (info.upper - info.lower) / (1.0 + std::exp(-z));
    case Transform::Log: return std::clamp(std::exp(z), info.lower, info.upper);
    case Transform::Identity: return std::clamp(z, info.lower, info.upper);
  }
  return z;
}

}  // namespace detour
