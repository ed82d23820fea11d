#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace detour {

inline constexpr int kModelCount = 12;

/// Every free parameter any model can carry.
enum class Param {
  Beta,
  Gamma,
  AlphaC,
  QUp0,
  QRight0,
  QDown0,
  QLeft0,
  Alpha1High,
  Alpha1Medium,
  Alpha1Low,
  Omega,
  AlphaL,
  Lambda,
  OmegaHybrid,
};
inline constexpr int kParamCount = 14;

/// How a parameter is mapped to the unconstrained optimiser space.
enum class Transform { Logit, Log, Identity };

struct ParamInfo {
  Param param;
  std::string_view name;
  double lower;
  double upper;
  Transform transform;
  bool integer = false;
};

const ParamInfo& param_info(Param p);
std::optional<Param> parse_param(std::string_view name);

enum class Planner { Random, QLearning, ValueIteration, DepthLimited, SuccessorRep, Hybrid };
enum class RewardRule { None, LinearFilter, AvoidSalient, LastReward, ShortestPath };

struct ModelInfo {
  int id;
  std::string_view name;
  std::string_view short_name;
  Planner planner;
  RewardRule reward;
  std::vector<Param> params;
};

/// Registry entry for models 1..12. Throws std::invalid_argument otherwise.
const ModelInfo& model_info(int id);

/// A model identity plus a full parameter table. Parameters the model does
/// not use keep their defaults and are ignored.
struct ModelSpec {
  int model = 1;
  std::array<double, kParamCount> values = default_values();

  double operator[](Param p) const { return values[static_cast<std::size_t>(p)]; }
  double& operator[](Param p) { return values[static_cast<std::size_t>(p)]; }

  const ModelInfo& info() const { return model_info(model); }
  int k() const { return static_cast<int>(info().params.size()); }

  static std::array<double, kParamCount> default_values();
};

/// Throws std::invalid_argument if a used parameter is outside its bounds
/// (omega must also be integral).
void check_bounds(const ModelSpec& spec);

/// Packs the model's own parameters (registry order).
Eigen::VectorXd to_vector(const ModelSpec& spec);
ModelSpec from_vector(int model, const Eigen::VectorXd& x, const ModelSpec& base = {});

/// Named object with exactly the model's parameters.
nlohmann::json params_to_json(const ModelSpec& spec);
/// Accepts missing keys (defaults) but rejects unknown or unused ones.
ModelSpec params_from_json(int model, const nlohmann::json& j);

/// Bounded <-> unconstrained maps used by the optimiser.
double to_unconstrained(const ParamInfo& info, double v);
double from_unconstrained(const ParamInfo& info, double z);

}  // namespace detour
