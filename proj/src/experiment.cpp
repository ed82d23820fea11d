#include "detour/experiment.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <stdexcept>
#include <string_view>

namespace detour {

namespace detail {
std::string_view canonical_config_json(int id);
}

using nlohmann::json;

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Learning: return "learning";
    case Phase::Pretest: return "pretest";
    case Phase::Test: return "test";
  }
  return "?";
}

Phase parse_phase(std::string_view s) {
  if (s == "learning") return Phase::Learning;
  if (s == "pretest") return Phase::Pretest;
  if (s == "test") return Phase::Test;
  throw std::invalid_argument("unknown phase: " + std::string(s));
}

std::string_view to_string(Saliency s) {
  switch (s) {
    case Saliency::Regular: return "regular";
    case Saliency::Low: return "low";
    case Saliency::Medium: return "medium";
    case Saliency::High: return "high";
  }
  return "?";
}

Saliency parse_saliency(std::string_view s) {
  if (s == "regular") return Saliency::Regular;
  if (s == "low") return Saliency::Low;
  if (s == "medium") return Saliency::Medium;
  if (s == "high") return Saliency::High;
  throw std::invalid_argument("unknown saliency: " + std::string(s));
}

void WallSet::add(Wall w) {
  if (!grid_.contains(w.from)) throw std::invalid_argument("wall outside grid: " + std::to_string(w.from));
  auto ref = blocked_[static_cast<std::size_t>((w.from - 1) * kActionCount + index_of(w.action))];
  if (!ref) {
    ref = true;
    ++count_;
  }
}

std::vector<Wall> WallSet::walls() const {
  std::vector<Wall> out;
  for (Cell c = 1; c <= grid_.cell_count(); ++c) {
    for (Action a : kActions) {
      if (blocks(c, a)) out.push_back({c, a});
    }
  }
  return out;
}

const CellLoss* LossTable::find(Cell c) const {
  auto it = cells.find(c);
  return it == cells.end() ? nullptr : &it->second;
}

double LossTable::expected_entry(Cell c) const {
  if (const CellLoss* l = find(c)) return l->probability * l->amount + (1.0 - l->probability) * regular;
  return regular;
}

Saliency LossTable::saliency(Cell c) const {
  if (const CellLoss* l = find(c)) return l->saliency;
  return Saliency::Regular;
}

bool ExperimentConfig::is_open(Cell c) const {
  if (!grid.contains(c)) return false;
  for (Action a : kActions) {
    auto from = grid.neighbor(c, a);
    if (from && !walls.blocks(*from, opposite(a))) return true;
  }
  return false;
}

std::vector<Cell> ExperimentConfig::open_cells() const {
  std::vector<Cell> out;
  for (Cell c = 1; c <= grid.cell_count(); ++c) {
    if (is_open(c)) out.push_back(c);
  }
  return out;
}

bool ExperimentConfig::reachable(Cell from, Cell to, std::optional<Wall> blockage) const {
  if (!grid.contains(from) || !grid.contains(to)) return false;
  std::vector<bool> seen(grid.cell_count() + 1, false);
  std::deque<Cell> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    if (c == to) return true;
    for (Action a : kActions) {
      if (walls.blocks(c, a) || (blockage && blockage->from == c && blockage->action == a)) continue;
      auto n = grid.neighbor(c, a);
      if (n && !seen[*n]) {
        seen[*n] = true;
        queue.push_back(*n);
      }
    }
  }
  return false;
}

std::vector<CellPair> ExperimentConfig::valid_pairs() const {
  const auto cells = open_cells();
  std::vector<CellPair> out;
  for (Cell s : cells) {
    for (Cell g : cells) {
      if (s != g && reachable(s, g)) out.push_back({s, g});
    }
  }
  return out;
}

int ExperimentConfig::trial_count() const {
  int n = 0;
  for (const auto& b : blocks) n += b.trials;
  return n;
}

int ExperimentConfig::trial_count(Phase p) const {
  int n = 0;
  for (const auto& b : blocks) {
    if (b.phase == p) n += b.trials;
  }
  return n;
}

namespace {

Wall wall_from_json(const json& j) {
  auto a = parse_action(j.at(1).get<std::string>());
  if (!a) throw std::invalid_argument("bad wall action: " + j.dump());
  return {j.at(0).get<int>(), *a};
}

json wall_to_json(const Wall& w) { return json::array({w.from, std::string(to_string(w.action))}); }

CellPair pair_from_json(const json& j) { return {j.at("start").get<int>(), j.at("goal").get<int>()}; }

json pair_to_json(const CellPair& p) { return {{"start", p.start}, {"goal", p.goal}}; }

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.id = j.at("experiment").get<int>();
  const auto& g = j.at("grid");
  cfg.grid.rows = g.at("rows").get<int>();
  cfg.grid.cols = g.at("cols").get<int>();
  if (g.contains("numbering") && g.at("numbering") != "column-major") {
    throw std::invalid_argument("only column-major numbering is supported");
  }
  cfg.walls = WallSet(cfg.grid);
  for (const auto& o : j.at("obstacles")) {
    Obstacle obs;
    obs.name = o.value("name", "");
    for (const auto& w : o.at("walls")) obs.walls.push_back(wall_from_json(w));
    for (const auto& w : obs.walls) cfg.walls.add(w);
    cfg.obstacles.push_back(std::move(obs));
  }
  if (j.contains("rewards")) {
    cfg.losses.goal_reward = j["rewards"].value("goal", 100);
    cfg.losses.regular = j["rewards"].value("regular", -1);
  }
  for (const auto& l : j.at("losses")) {
    CellLoss loss;
    loss.amount = l.at("amount").get<int>();
    loss.probability = l.at("probability").get<double>();
    loss.saliency = parse_saliency(l.value("saliency", "regular"));
    cfg.losses.cells[l.at("cell").get<int>()] = loss;
  }
  cfg.move_budget = j.value("move_budget", 15);
  for (const auto& b : j.at("blocks")) {
    cfg.blocks.push_back({parse_phase(b.at("phase").get<std::string>()), b.value("trials", 20), b.value("paid", false)});
  }
  cfg.blocked_fraction = j.value("blocked_fraction", 1.0 / 3.0);
  if (j.contains("test_pair") && !j["test_pair"].is_null()) cfg.test_pair = pair_from_json(j["test_pair"]);
  if (j.contains("fixed_tail") && !j["fixed_tail"].is_null()) {
    const auto& t = j["fixed_tail"];
    cfg.fixed_tail = FixedTail{t.at("block").get<int>(), t.at("trials").get<int>(), pair_from_json(t)};
  }
  if (j.contains("blockage")) {
    const auto& b = j["blockage"];
    const auto policy = b.at("policy").get<std::string>();
    if (policy == "fixed") {
      cfg.blockage_policy = BlockagePolicy::FixedWall;
      cfg.blockage_wall = wall_from_json(b.at("wall"));
    } else if (policy == "optimal-path-edge") {
      cfg.blockage_policy = BlockagePolicy::OptimalPathEdge;
    } else {
      throw std::invalid_argument("unknown blockage policy: " + policy);
    }
  }
  cfg.pair_seed = j.value("pair_seed", std::uint64_t{0});
  if (j.contains("named_paths")) {
    for (const auto& [name, cells] : j["named_paths"].items()) cfg.named_paths[name] = cells.get<std::vector<Cell>>();
  }
  validate(cfg);
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.id;
  j["grid"] = {{"rows", cfg.grid.rows}, {"cols", cfg.grid.cols}, {"numbering", "column-major"}};
  j["obstacles"] = json::array();
  for (const auto& o : cfg.obstacles) {
    json walls = json::array();
    for (const auto& w : o.walls) walls.push_back(wall_to_json(w));
    j["obstacles"].push_back({{"name", o.name}, {"walls", walls}});
  }
  j["rewards"] = {{"goal", cfg.losses.goal_reward}, {"regular", cfg.losses.regular}};
  j["losses"] = json::array();
  for (const auto& [cell, l] : cfg.losses.cells) {
    j["losses"].push_back({{"cell", cell},
                           {"amount", l.amount},
                           {"probability", l.probability},
                           {"saliency", std::string(to_string(l.saliency))}});
  }
  j["move_budget"] = cfg.move_budget;
  j["blocks"] = json::array();
  for (const auto& b : cfg.blocks) {
    j["blocks"].push_back({{"phase", std::string(to_string(b.phase))}, {"trials", b.trials}, {"paid", b.paid}});
  }
  j["blocked_fraction"] = cfg.blocked_fraction;
  if (cfg.test_pair) j["test_pair"] = pair_to_json(*cfg.test_pair);
  if (cfg.fixed_tail) {
    j["fixed_tail"] = pair_to_json(cfg.fixed_tail->pair);
    j["fixed_tail"]["block"] = cfg.fixed_tail->block;
    j["fixed_tail"]["trials"] = cfg.fixed_tail->trials;
  }
  if (cfg.blockage_policy == BlockagePolicy::FixedWall && cfg.blockage_wall) {
    j["blockage"] = {{"policy", "fixed"}, {"wall", wall_to_json(*cfg.blockage_wall)}};
  } else {
    j["blockage"] = {{"policy", "optimal-path-edge"}};
  }
  j["pair_seed"] = cfg.pair_seed;
  j["named_paths"] = json::object();
  for (const auto& [name, cells] : cfg.named_paths) j["named_paths"][name] = cells;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return config_from_json(json::parse(in));
}

ExperimentConfig build_experiment(int id) {
  const auto text = detail::canonical_config_json(id);
  if (text.empty()) throw std::invalid_argument("unknown experiment id: " + std::to_string(id));
  return config_from_json(json::parse(text));
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("experiment " + std::to_string(cfg.id) + ": " + what);
  };
  if (cfg.grid.rows <= 0 || cfg.grid.cols <= 0) fail("empty grid");
  if (cfg.obstacles.size() != 10) fail("expected 10 obstacles, got " + std::to_string(cfg.obstacles.size()));
  for (const auto& [cell, loss] : cfg.losses.cells) {
    if (!cfg.grid.contains(cell)) fail("loss cell out of range");
    if (loss.probability < 0.0 || loss.probability > 1.0) fail("loss probability outside [0,1]");
  }
  if (cfg.move_budget <= 0) fail("move budget must be positive");
  if (cfg.blocks.empty()) fail("empty block schedule");
  for (std::size_t i = 1; i < cfg.blocks.size(); ++i) {
    if (cfg.blocks[i].phase < cfg.blocks[i - 1].phase) fail("phases out of order");
  }
  for (const auto& [name, cells] : cfg.named_paths) {
    for (Cell c : cells) {
      if (!cfg.grid.contains(c)) fail("path " + name + " leaves the grid");
    }
    for (std::size_t i = 1; i < cells.size(); ++i) {
      auto a = cfg.grid.action_between(cells[i - 1], cells[i]);
      if (!a || cfg.walls.blocks(cells[i - 1], *a)) fail("path " + name + " crosses a wall");
    }
  }
  auto check_pair = [&](CellPair p, const char* what) {
    if (p.start == p.goal || !cfg.is_open(p.start) || !cfg.is_open(p.goal) || !cfg.reachable(p.start, p.goal)) {
      fail(std::string("invalid ") + what);
    }
  };
  if (cfg.test_pair) check_pair(*cfg.test_pair, "test pair");
  if (cfg.fixed_tail) check_pair(cfg.fixed_tail->pair, "fixed-tail pair");
  if (cfg.blockage_policy == BlockagePolicy::FixedWall) {
    if (!cfg.blockage_wall) fail("fixed blockage policy without a wall");
    if (!cfg.grid.contains(cfg.blockage_wall->from)) fail("blockage wall out of range");
  }
}

}  // namespace detour
