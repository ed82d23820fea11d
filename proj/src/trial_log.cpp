#include "detour/trial_log.hpp"

#include <fstream>
#include <stdexcept>

namespace detour {

using nlohmann::json;

json trial_to_json(const TrialRecord& t) {
  json transitions = json::array();
  for (const auto& tr : t.transitions) {
    transitions.push_back(json::array({tr.state, std::string(to_string(tr.action)), tr.reward, tr.next, tr.wall_hit}));
  }
  // nlohmann::json sorts object keys, which keeps lines byte-stable.
  return json{{"participant", t.participant},
              {"experiment", t.experiment},
              {"block", t.block},
              {"trial", t.trial},
              {"phase", std::string(to_string(t.phase))},
              {"start", t.start},
              {"goal", t.goal},
              {"blocked", t.blocked},
              {"transitions", std::move(transitions)},
              {"outcome", std::string(to_string(t.outcome))},
              {"score", t.score}};
}

TrialRecord trial_from_json(const json& j) {
  TrialRecord t;
  t.participant = j.at("participant").get<std::string>();
  t.experiment = j.at("experiment").get<int>();
  t.block = j.at("block").get<int>();
  t.trial = j.at("trial").get<int>();
  t.phase = parse_phase(j.at("phase").get<std::string>());
  t.start = j.at("start").get<int>();
  t.goal = j.at("goal").get<int>();
  t.blocked = j.at("blocked").get<bool>();
  for (const auto& row : j.at("transitions")) {
    Transition tr;
    tr.state = row.at(0).get<int>();
    auto a = parse_action(row.at(1).get<std::string>());
    if (!a) throw std::invalid_argument("bad action in transition: " + row.dump());
    tr.action = *a;
    tr.reward = row.at(2).get<int>();
    tr.next = row.at(3).get<int>();
    tr.wall_hit = row.at(4).get<bool>();
    t.transitions.push_back(tr);
  }
  t.outcome = parse_outcome(j.at("outcome").get<std::string>());
  t.score = j.at("score").get<int>();
  return t;
}

void write_jsonl(std::ostream& out, const std::vector<TrialRecord>& trials) {
  for (const auto& t : trials) out << trial_to_json(t).dump() << '\n';
}

void write_jsonl(const std::string& path, const std::vector<TrialRecord>& trials) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_jsonl(out, trials);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<TrialRecord> read_jsonl(std::istream& in) {
  std::vector<TrialRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(trial_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TrialRecord> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_jsonl(in);
}

}  // namespace detour
