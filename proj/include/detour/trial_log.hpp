#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "detour/engine.hpp"

namespace detour {

/// One JSON-lines record. Field names: participant, experiment, block, trial,
/// phase, start, goal, blocked, transitions ([s, a, r, s_next, wall_hit]),
/// outcome, score.
nlohmann::json trial_to_json(const TrialRecord& t);
TrialRecord trial_from_json(const nlohmann::json& j);

void write_jsonl(std::ostream& out, const std::vector<TrialRecord>& trials);
void write_jsonl(const std::string& path, const std::vector<TrialRecord>& trials);
std::vector<TrialRecord> read_jsonl(std::istream& in);
std::vector<TrialRecord> read_jsonl(const std::string& path);

}  // namespace detour
