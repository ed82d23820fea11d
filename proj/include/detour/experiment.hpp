#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "detour/grid.hpp"

namespace detour {

enum class Phase { Learning, Pretest, Test };

std::string_view to_string(Phase p);
Phase parse_phase(std::string_view s);

/// Directed blocked transitions over a grid, stored as a dense flag table.
class WallSet {
 public:
  WallSet() = default;
  explicit WallSet(const GridSpec& grid) : grid_(grid), blocked_(grid.cell_count() * kActionCount, false) {}

  void add(Wall w);
  bool blocks(Cell from, Action a) const {
    return blocked_[static_cast<std::size_t>((from - 1) * kActionCount + index_of(a))];
  }
  std::size_t size() const { return count_; }
  std::vector<Wall> walls() const;

 private:
  GridSpec grid_;
  std::vector<bool> blocked_;
  std::size_t count_ = 0;
};

/// One hidden obstacle: a blocked cell or a wall segment, expanded into the
/// directed transitions it blocks.
struct Obstacle {
  std::string name;
  std::vector<Wall> walls;
};

enum class Saliency { Regular, Low, Medium, High };

std::string_view to_string(Saliency s);
Saliency parse_saliency(std::string_view s);

struct CellLoss {
  int amount = -1;
  double probability = 0.0;
  Saliency saliency = Saliency::Regular;
};

struct LossTable {
  std::map<Cell, CellLoss> cells;
  int regular = -1;
  int goal_reward = 100;

  /// EL(c) = p * salient + (1 - p) * regular. Cells outside the table give `regular`.
  double expected_entry(Cell c) const;
  Saliency saliency(Cell c) const;
  const CellLoss* find(Cell c) const;
};

struct BlockSpec {
  Phase phase = Phase::Learning;
  int trials = 20;
  bool paid = false;
};

struct CellPair {
  Cell start = 0;
  Cell goal = 0;

  friend constexpr auto operator<=>(const CellPair&, const CellPair&) = default;
};

struct FixedTail {
  int block = 6;  // 1-based block index
  int trials = 5;
  CellPair pair;
};

enum class BlockagePolicy {
  FixedWall,        // the same wall on every blocked trial
  OptimalPathEdge,  // first edge of the pair's optimal path not on the runner-up
};

struct ExperimentConfig {
  int id = 0;
  GridSpec grid;
  std::vector<Obstacle> obstacles;
  WallSet walls;
  LossTable losses;
  std::vector<BlockSpec> blocks;
  int move_budget = 15;
  double blocked_fraction = 1.0 / 3.0;
  std::optional<CellPair> test_pair;
  std::optional<FixedTail> fixed_tail;
  BlockagePolicy blockage_policy = BlockagePolicy::FixedWall;
  std::optional<Wall> blockage_wall;
  std::uint64_t pair_seed = 0;
  std::map<std::string, std::vector<Cell>> named_paths;

  /// Cells that can be entered from at least one other cell.
  std::vector<Cell> open_cells() const;
  bool is_open(Cell c) const;
  /// Ordered (start, goal) pairs with start != goal, both open, goal reachable.
  std::vector<CellPair> valid_pairs() const;
  bool reachable(Cell from, Cell to, std::optional<Wall> blockage = std::nullopt) const;
  int trial_count() const;
  int trial_count(Phase p) const;
};

/// Canonical configuration for experiment 1, 2 or 3. Throws std::invalid_argument otherwise.
ExperimentConfig build_experiment(int id);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

/// Checks the structural invariants (cell ranges, named paths wall-free,
/// obstacle count, schedule shape). Throws std::invalid_argument on violation.
void validate(const ExperimentConfig& cfg);

}  // namespace detour
