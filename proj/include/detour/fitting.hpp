#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "detour/agent.hpp"
#include "detour/engine.hpp"
#include "detour/experiment.hpp"
#include "detour/models.hpp"
#include "detour/optimize.hpp"

namespace detour {

/// Train scores learning-phase decisions only. Test replays every trial in
/// order (beliefs carry forward) but scores test-phase decisions only.
enum class Split { Train, Test };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct LogLikelihood {
  double ll = 0.0;   // -infinity when an observed action had probability zero
  int decisions = 0;
};

/// Sum of log P(observed action | history) over the split's decisions for one
/// participant's chronologically ordered trials. The model never acts.
LogLikelihood one_step_ahead_ll(const ExperimentConfig& cfg, const ModelSpec& spec,
                                const std::vector<TrialRecord>& trials, Split split, AgentOptions options = {});

double bic(double ll, int k, int n);
double aic(double ll, int k);

struct FitResult {
  std::string participant;
  int model = 0;
  Split split = Split::Train;
  ModelSpec params;
  double ll = 0.0;
  int k = 0;
  int n = 0;
  double bic = 0.0;
  double aic = 0.0;
  int restarts = 0;
  bool converged = false;
  bool failed = false;
};

struct FitOptions {
  int restarts = 10;
  std::uint64_t seed = 1;
  NelderMeadOptions nm;
  AgentOptions agent;
};

/// Maximum-likelihood fit on the train split from Latin-hypercube starts.
/// Model 7 additionally grid-searches omega over 1..7.
FitResult fit_participant(const ExperimentConfig& cfg, int model, const std::vector<TrialRecord>& trials,
                          const FitOptions& opts = {});

/// Scores the frozen parameters of `fit` on the test split.
FitResult generalization_eval(const ExperimentConfig& cfg, const FitResult& fit,
                              const std::vector<TrialRecord>& trials, AgentOptions options = {});

/// Fits every (participant, model) pair on a pool of `jobs` threads. Results
/// are ordered by participant (first appearance) then by the order of `models`.
/// With `with_test`, each fit is followed by its generalization result.
std::vector<FitResult> fit_all(const ExperimentConfig& cfg, const std::vector<TrialRecord>& logs,
                               const std::vector<int>& models, const FitOptions& opts, int jobs = 1,
                               bool with_test = false);

nlohmann::json fit_to_json(const FitResult& r);
FitResult fit_from_json(const nlohmann::json& j);

void write_fits_csv(std::ostream& out, const std::vector<FitResult>& fits);
void write_fits_json(std::ostream& out, const std::vector<FitResult>& fits);
std::vector<FitResult> read_fits_csv(std::istream& in);
std::vector<FitResult> read_fits_json(std::istream& in);
/// Chooses the reader by file extension (.csv or .json).
std::vector<FitResult> read_fits(const std::string& path);

}  // namespace detour
