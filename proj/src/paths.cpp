#include "detour/paths.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "detour/engine.hpp"

namespace detour {

namespace {

constexpr double kLevelTolerance = 1e-9;

void check_step(const ExperimentConfig& cfg, Cell from, Cell to, std::optional<Wall> blockage) {
  auto a = cfg.grid.action_between(from, to);
  if (!a || !legal_transition(cfg, from, *a, blockage)) {
    throw std::invalid_argument("illegal move " + std::to_string(from) + " -> " + std::to_string(to));
  }
}

struct Search {
  const ExperimentConfig& cfg;
  Cell goal;
  int max_len;
  std::optional<Wall> blockage;
  const std::set<Cell>* allowed;
  std::vector<bool> on_path;
  Path current;
  std::vector<Path> found;

  void run(Cell c) {
    if (c == goal) {
      found.push_back(current);
      return;
    }
    if (static_cast<int>(current.size()) - 1 >= max_len) return;
    for (Action a : kActions) {
      auto n = legal_transition(cfg, c, a, blockage);
      if (!n || on_path[*n]) continue;
      if (allowed && !allowed->contains(*n)) continue;
      on_path[*n] = true;
      current.push_back(*n);
      run(*n);
      current.pop_back();
      on_path[*n] = false;
    }
  }
};

}  // namespace

double path_expected_value(const ExperimentConfig& cfg, const Path& path, std::optional<Wall> blockage) {
  if (path.size() < 2) throw std::invalid_argument("path needs at least one move");
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    check_step(cfg, path[i - 1], path[i], blockage);
    total += i + 1 == path.size() ? cfg.losses.goal_reward : cfg.losses.expected_entry(path[i]);
  }
  return total;
}

double path_expected_loss(const ExperimentConfig& cfg, const Path& path) {
  if (path.size() < 2) throw std::invalid_argument("path needs at least one move");
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    check_step(cfg, path[i - 1], path[i], std::nullopt);
    total += cfg.losses.expected_entry(path[i]);
  }
  return total;
}

std::vector<Path> enumerate_simple_paths(const ExperimentConfig& cfg, Cell start, Cell goal, int max_len,
                                         std::optional<Wall> blockage, const std::set<Cell>* allowed) {
  if (start == goal) throw std::invalid_argument("start and goal must differ");
  if (!cfg.grid.contains(start) || !cfg.grid.contains(goal)) throw std::invalid_argument("cell outside grid");
  Search s{cfg, goal, max_len, blockage, allowed, std::vector<bool>(cfg.grid.cell_count() + 1, false), {start}, {}};
  s.on_path[start] = true;
  s.run(start);
  return std::move(s.found);
}

RankedPaths rank_paths(const ExperimentConfig& cfg, Cell start, Cell goal, std::optional<Wall> blockage,
                       int max_len) {
  auto paths = enumerate_simple_paths(cfg, start, goal, max_len, blockage);
  std::vector<double> value(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) value[i] = path_expected_value(cfg, paths[i], blockage);
  std::vector<std::size_t> order(paths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] > value[b]; });

  RankedPaths out;
  int level = 0;
  double level_value = 0.0;
  for (std::size_t i : order) {
    if (level == 0 || std::abs(value[i] - level_value) > kLevelTolerance) {
      ++level;
      level_value = value[i];
    }
    out.paths.push_back(std::move(paths[i]));
    out.value.push_back(value[i]);
    out.level.push_back(level);
  }
  return out;
}

const RankedPaths& PathRanker::get(CellPair pair, std::optional<Wall> blockage) {
  const auto key = std::make_tuple(pair.start, pair.goal, blockage ? blockage->from : 0,
                                   blockage ? index_of(blockage->action) : -1);
  std::lock_guard lock(mu_);
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, rank_paths(cfg_, pair.start, pair.goal, blockage)).first;
  return it->second;
}

}  // namespace detour
