#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "detour/experiment.hpp"

namespace detour {

/// Cell sequence including the start cell.
using Path = std::vector<Cell>;

/// Expected return of following `path`: sum of expected entry rewards of the
/// entered cells, with the final (goal) cell worth the goal reward.
/// Throws std::invalid_argument if a step is not a legal move.
double path_expected_value(const ExperimentConfig& cfg, const Path& path,
                           std::optional<Wall> blockage = std::nullopt);

/// Sum of EL over every entered cell, the last one included as an ordinary cell.
double path_expected_loss(const ExperimentConfig& cfg, const Path& path);

/// All wall-free simple paths from start to goal with at most `max_len` moves,
/// ordered lexicographically by action sequence (up < right < down < left).
/// When `allowed` is given, paths may only visit those cells.
std::vector<Path> enumerate_simple_paths(const ExperimentConfig& cfg, Cell start, Cell goal, int max_len = 15,
                                         std::optional<Wall> blockage = std::nullopt,
                                         const std::set<Cell>* allowed = nullptr);

struct RankedPaths {
  std::vector<Path> paths;   // sorted by decreasing EV, enumeration order within ties
  std::vector<double> value;
  std::vector<int> level;    // 1 = best EV level; equal EVs share a level
};

RankedPaths rank_paths(const ExperimentConfig& cfg, Cell start, Cell goal, std::optional<Wall> blockage = std::nullopt,
                       int max_len = 15);

/// Thread-safe memo of rank_paths keyed by (pair, blockage).
class PathRanker {
 public:
  explicit PathRanker(const ExperimentConfig& cfg) : cfg_(cfg) {}
  const RankedPaths& get(CellPair pair, std::optional<Wall> blockage = std::nullopt);

 private:
  const ExperimentConfig& cfg_;
  std::mutex mu_;
  std::map<std::tuple<Cell, Cell, int, int>, RankedPaths> cache_;
};

}  // namespace detour
