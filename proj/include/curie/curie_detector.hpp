#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "curie/grid.hpp"
#include "curie/instance.hpp"
#include "curie/verdict.hpp"

namespace curie {

struct CurieConfig {
  GridConfig grid;
  int radius_mut = 2;       ///< mutation-scan radius
  int mutation_period = 10; ///< look-back horizon (time steps) for recent mutations
  int n_muts_allowed = 2;   ///< mutant-neighbor count that declares a drift
  int prep_size = 50;       ///< P: preparatory instances, also the sliding-window size
};

/// Cellular-automaton drift detector.
///
/// The feature space is discretized into a grid whose cell states are class
/// labels. Each labeled instance overwrites the state of its enclosing cell;
/// a state change is a mutation. A drift is declared when, at the moment a
/// cell mutates, at least n_muts_allowed of its von Neumann neighbors (radius
/// radius_mut) also mutated within the last mutation_period steps. Detection
/// consumes only (x, y) pairs, never a base learner's predictions.
class CurieDetector {
 public:
  explicit CurieDetector(CurieConfig config);

  /// Seed the grid from the preparatory instances: limits and hits are
  /// accumulated instance by instance, then states are resolved and the grid
  /// evolved until every cell is assigned. Primes the sliding window and
  /// advances the clock by the number of instances consumed.
  void prepare(std::span<const Instance> instances);

  /// State of the cell enclosing x. Never abstains once prepared.
  Label predict(std::span<const double> x) const;

  /// Process one labeled instance (test-then-train step). Updates the
  /// window and limits, overwrites the enclosing cell's state with y, logs a
  /// mutation when the previous state differed, and runs the
  /// neighborhood-mutation drift test. On a drift the detector reseeds
  /// itself from the window before returning.
  Verdict update(std::span<const double> x, Label y);

  /// Rebuild the grid from scratch and re-run the preparatory process over
  /// the current window contents. Mutation logs, hit histories, and limits
  /// are cleared; the clock continues monotonically.
  void reset_and_reseed();

  bool prepared() const { return prepared_; }
  std::int64_t clock() const { return clock_; }
  const CurieConfig& config() const { return config_; }
  const Grid& grid() const { return grid_; }
  const std::deque<Instance>& window() const { return window_; }

  struct Detection {
    std::int64_t time = 0;
    std::vector<int> cell_coords;
    std::vector<std::vector<int>> counted_neighbors;
  };
  const std::optional<Detection>& last_detection() const { return last_detection_; }

  /// Grid dump plus mutation logs and the most recent detection, parseable
  /// by the inspect command.
  void write_snapshot(std::ostream& os) const;

 private:
  void seed_grid(std::span<const Instance> instances);

  CurieConfig config_;
  Grid grid_;
  std::deque<Instance> window_;
  std::int64_t clock_ = 0;
  bool prepared_ = false;
  std::optional<Detection> last_detection_;
  std::vector<int> neighbor_scratch_;
};

}  // namespace curie
