#include "detour/tabular.hpp"

#include "detour/engine.hpp"

namespace detour {

SuccessorTable geometric_successors(const GridSpec& grid) {
  SuccessorTable t(grid.cell_count(), kActionCount);
  for (Cell c = 1; c <= grid.cell_count(); ++c) {
    for (Action a : kActions) {
      auto n = grid.neighbor(c, a);
      t(c - 1, index_of(a)) = (n ? *n : c) - 1;
    }
  }
  return t;
}

SuccessorTable oracle_successors(const ExperimentConfig& cfg, std::optional<Wall> blockage) {
  SuccessorTable t(cfg.grid.cell_count(), kActionCount);
  for (Cell c = 1; c <= cfg.grid.cell_count(); ++c) {
    for (Action a : kActions) {
      auto n = legal_transition(cfg, c, a, blockage);
      t(c - 1, index_of(a)) = (n ? *n : c) - 1;
    }
  }
  return t;
}

}  // namespace detour
