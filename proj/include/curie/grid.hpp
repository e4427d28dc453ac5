#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "curie/instance.hpp"

namespace curie {

/// Lattice configuration: one dimension per feature, `bins_per_dim` cells
/// along each axis, von Neumann neighborhoods of the given Manhattan radius,
/// and an ordered label alphabet.
struct GridConfig {
  int dims = 2;
  int bins_per_dim = 10;
  int radius = 2;
  std::vector<Label> state_alphabet = {0, 1};
};

/// Per-dimension feature range covered by the lattice. Maintained as running
/// min/max of everything the grid has seen.
struct DimensionLimits {
  std::vector<double> low;
  std::vector<double> high;

  bool initialized() const { return !low.empty() && low[0] <= high[0]; }
};

struct Cell {
  std::optional<Label> state;
  std::vector<Label> hit_history;
  std::vector<std::int64_t> mutation_times;

  std::int64_t last_mutation() const {
    return mutation_times.empty() ? -1 : mutation_times.back();
  }
};

/// Majority vote over a multiset of (possibly unassigned) states.
/// Ties keep `current` when it is assigned, otherwise the tied label that
/// comes first in the alphabet wins. Returns nullopt when no entry is
/// assigned, i.e. the vote carries no information and the caller retries.
std::optional<Label> majority_vote(std::span<const std::optional<Label>> states,
                                   std::optional<Label> current,
                                   std::span<const Label> alphabet);

/// Dense d-dimensional cellular lattice over the feature space.
///
/// Storage is a flat array of bins_per_dim^dims cells, so memory grows
/// exponentially with the feature count. Intended for low-dimensional
/// streams (a handful of features); reject anything bigger upstream.
class Grid {
 public:
  explicit Grid(GridConfig config);

  const GridConfig& config() const { return config_; }
  const DimensionLimits& limits() const { return limits_; }
  int cell_count() const { return static_cast<int>(cells_.size()); }

  std::vector<int> coords_of(int index) const;
  int index_of(std::span<const int> coords) const;

  Cell& cell(int index) { return cells_[static_cast<std::size_t>(index)]; }
  const Cell& cell(int index) const { return cells_[static_cast<std::size_t>(index)]; }
  Cell& cell_at(std::span<const int> coords) { return cell(index_of(coords)); }
  const Cell& cell_at(std::span<const int> coords) const { return cell(index_of(coords)); }

  /// Bin coordinates of the cell enclosing x. Evenly spaced bins over
  /// [low, high] per dimension; values at or beyond a boundary clamp into
  /// the edge bin. Total over all d-vectors once limits are initialized.
  std::vector<int> locate_cell(std::span<const double> x) const;
  int locate_index(std::span<const double> x) const;

  /// In-bounds cells c' != coords with Manhattan distance <= radius,
  /// in lexicographic coordinate order.
  std::vector<std::vector<int>> von_neumann_neighbors(std::span<const int> coords,
                                                      int radius) const;
  /// Same neighborhood as flat cell indices (ascending), reusing `out`.
  void neighbor_indices(std::span<const int> coords, int radius,
                        std::vector<int>& out) const;

  /// Stretch limits to cover x (running min/max per dimension). Bin geometry
  /// follows implicitly; existing cell assignments are not remapped.
  void expand_limits(std::span<const double> x);

  /// Give zero-width dimensions a tiny symmetric span so bin arithmetic is
  /// defined for constant features.
  void widen_degenerate_limits();

  void record_hit(std::span<const int> coords, Label y);

  /// Assign every cell with hits its modal label; on a tie the most recently
  /// hit label wins. Cells with empty history stay unassigned.
  void resolve_states();

  /// One synchronous generation: every unassigned cell votes over the
  /// pre-generation snapshot of its radius-r neighborhood. Assigned cells
  /// never change. Returns the number of cells assigned this step.
  int evolve_step();

  /// Run generations until no cell is unassigned. Returns the generation
  /// count. Requires at least one assigned cell; bounded by G*d generations.
  int evolve_until_full();

  int unassigned_count() const;

  /// One line per cell: coords, state, hit count, last mutation time.
  void dump(std::ostream& os) const;

 private:
  GridConfig config_;
  DimensionLimits limits_;
  std::vector<Cell> cells_;
  std::vector<int> strides_;

  static constexpr double kDegenerateHalfWidth = 1e-9;
};

}  // namespace curie
