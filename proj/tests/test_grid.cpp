#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "curie/grid.hpp"
#include "curie/rng.hpp"

using namespace curie;

namespace {

GridConfig square(int dims, int bins, int radius = 1) {
  GridConfig cfg;
  cfg.dims = dims;
  cfg.bins_per_dim = bins;
  cfg.radius = radius;
  cfg.state_alphabet = {0, 1};
  return cfg;
}

Grid with_limits(GridConfig cfg, const std::vector<double>& low,
                 const std::vector<double>& high) {
  Grid grid(std::move(cfg));
  grid.expand_limits(low);
  grid.expand_limits(high);
  return grid;
}

// Brute-force Manhattan-ball enumeration, independent of the grid's
// generator: scan every cell of the lattice.
std::set<std::vector<int>> manhattan_ball_oracle(const Grid& grid,
                                                 const std::vector<int>& center,
                                                 int radius) {
  std::set<std::vector<int>> result;
  for (int i = 0; i < grid.cell_count(); ++i) {
    const auto coords = grid.coords_of(i);
    int dist = 0;
    for (std::size_t n = 0; n < coords.size(); ++n) dist += std::abs(coords[n] - center[n]);
    if (dist >= 1 && dist <= radius) result.insert(coords);
  }
  return result;
}

// Copy-then-update oracle for one synchronous generation: the whole grid is
// snapshotted first, then every unassigned cell votes over the copy.
std::vector<std::optional<Label>> synchronous_step_oracle(const Grid& grid) {
  std::vector<std::optional<Label>> before(static_cast<std::size_t>(grid.cell_count()));
  for (int i = 0; i < grid.cell_count(); ++i) before[static_cast<std::size_t>(i)] = grid.cell(i).state;

  std::vector<std::optional<Label>> after = before;
  for (int i = 0; i < grid.cell_count(); ++i) {
    if (before[static_cast<std::size_t>(i)]) continue;
    const auto center = grid.coords_of(i);
    std::vector<std::optional<Label>> states;
    for (const auto& nb : manhattan_ball_oracle(grid, center, grid.config().radius)) {
      states.push_back(before[static_cast<std::size_t>(grid.index_of(nb))]);
    }
    // Independent vote: count per label, lowest alphabet label wins ties.
    int best_count = 0;
    std::optional<Label> winner;
    for (Label label : grid.config().state_alphabet) {
      int count = 0;
      for (const auto& s : states) {
        if (s && *s == label) ++count;
      }
      if (count > best_count) {
        best_count = count;
        winner = label;
      }
    }
    if (winner) after[static_cast<std::size_t>(i)] = winner;
  }
  return after;
}

Grid random_partial_grid(Rng& rng, int dims, int bins, int radius) {
  Grid grid(square(dims, bins, radius));
  std::vector<double> low(static_cast<std::size_t>(dims), 0.0);
  std::vector<double> high(static_cast<std::size_t>(dims), 1.0);
  grid.expand_limits(low);
  grid.expand_limits(high);
  const int assigned = 1 + rng.uniform_int(grid.cell_count());
  for (int i = 0; i < assigned; ++i) {
    grid.cell(rng.uniform_int(grid.cell_count())).state = rng.uniform_int(2);
  }
  return grid;
}

}  // namespace

TEST_CASE("locate_cell maps unit-square halves") {
  Grid grid = with_limits(square(2, 2), {0.0, 0.0}, {1.0, 1.0});
  CHECK(grid.locate_cell(std::vector<double>{0.1, 0.9}) == std::vector<int>{0, 1});
  CHECK(grid.locate_cell(std::vector<double>{1.0, 1.0}) == std::vector<int>{1, 1});
}

TEST_CASE("locate_cell lower corner of an asymmetric range") {
  Grid grid = with_limits(square(2, 10), {3.0, -3.0}, {7.0, 3.0});
  CHECK(grid.locate_cell(std::vector<double>{3.0, -3.0}) == std::vector<int>{0, 0});

  // Brute-force scan of all bin edges along dim 0: floor((v-3)/4*10).
  for (int bin = 0; bin < 10; ++bin) {
    const double inside = 3.0 + (bin + 0.5) * 0.4;
    CHECK(grid.locate_cell(std::vector<double>{inside, 0.0})[0] == bin);
  }
}

TEST_CASE("locate_cell clamps out-of-range values and rejects bad arity") {
  Grid grid = with_limits(square(2, 4), {0.0, 0.0}, {1.0, 1.0});
  CHECK(grid.locate_cell(std::vector<double>{-5.0, 7.0}) == std::vector<int>{0, 3});
  CHECK_THROWS_AS(grid.locate_cell(std::vector<double>{0.5}), std::invalid_argument);
}

TEST_CASE("locate_cell is total over random vectors") {
  Grid grid = with_limits(square(3, 5), {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> x = {rng.uniform(-2.0, 3.0), rng.uniform(-2.0, 3.0),
                             rng.uniform(-2.0, 3.0)};
    const auto coords = grid.locate_cell(x);
    for (int c : coords) {
      CHECK(c >= 0);
      CHECK(c < 5);
    }
  }
}

TEST_CASE("von Neumann r=1 neighborhoods") {
  Grid grid(square(2, 10));
  const auto interior = grid.von_neumann_neighbors(std::vector<int>{5, 5}, 1);
  const std::set<std::vector<int>> expected = {{4, 5}, {5, 4}, {5, 6}, {6, 5}};
  CHECK(std::set<std::vector<int>>(interior.begin(), interior.end()) == expected);
  CHECK(interior.size() == 4);

  const auto corner = grid.von_neumann_neighbors(std::vector<int>{0, 0}, 1);
  const std::set<std::vector<int>> corner_expected = {{0, 1}, {1, 0}};
  CHECK(std::set<std::vector<int>>(corner.begin(), corner.end()) == corner_expected);
}

TEST_CASE("von Neumann r=2 interior count matches offset enumeration") {
  Grid grid(square(2, 10, 2));
  const auto nbrs = grid.von_neumann_neighbors(std::vector<int>{5, 5}, 2);
  CHECK(nbrs.size() == 12);  // |{(di,dj): |di|+|dj| <= 2}| - 1 = 13 - 1
}

TEST_CASE("neighborhoods equal the brute-force Manhattan ball") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int dims = 1 + rng.uniform_int(3);
    const int bins = 2 + rng.uniform_int(4);
    const int radius = 1 + rng.uniform_int(3);
    Grid grid(square(dims, bins, radius));
    std::vector<int> center;
    for (int n = 0; n < dims; ++n) center.push_back(rng.uniform_int(bins));

    const auto got = grid.von_neumann_neighbors(center, radius);
    CHECK(std::set<std::vector<int>>(got.begin(), got.end()) ==
          manhattan_ball_oracle(grid, center, radius));
    CHECK(std::is_sorted(got.begin(), got.end()));  // lexicographic order
  }
}

TEST_CASE("interior neighbor count is 2d for r=1") {
  for (int dims = 1; dims <= 3; ++dims) {
    Grid grid(square(dims, 5));
    std::vector<int> center(static_cast<std::size_t>(dims), 2);
    CHECK(grid.von_neumann_neighbors(center, 1).size() == 2 * static_cast<std::size_t>(dims));
  }
}

TEST_CASE("majority vote picks the strict majority") {
  const std::vector<std::optional<Label>> states = {0, 1, 1, 0, 1};
  const std::vector<Label> alphabet = {0, 1};
  CHECK(majority_vote(states, std::nullopt, alphabet) == 1);
}

TEST_CASE("majority vote tie keeps the current state") {
  const std::vector<Label> alphabet = {0, 1};
  // Brute force over every two-label tie configuration.
  for (int a = 0; a <= 1; ++a) {
    for (int b = 0; b <= 1; ++b) {
      if (a == b) continue;
      const std::vector<std::optional<Label>> states = {a, b};
      CHECK(majority_vote(states, 0, alphabet) == 0);
      CHECK(majority_vote(states, 1, alphabet) == 1);
      // Unassigned current: lowest alphabet label wins.
      CHECK(majority_vote(states, std::nullopt, alphabet) == 0);
    }
  }
}

TEST_CASE("majority vote with no assigned neighbor abstains") {
  const std::vector<std::optional<Label>> states = {std::nullopt, std::nullopt};
  const std::vector<Label> alphabet = {0, 1};
  CHECK(majority_vote(states, std::nullopt, alphabet) == std::nullopt);
  CHECK(majority_vote(std::vector<std::optional<Label>>{}, 1, alphabet) == std::nullopt);
}

TEST_CASE("expand_limits applies per-dimension min/max") {
  Grid grid = with_limits(square(2, 10), {3.0, -3.0}, {7.0, 3.0});
  grid.expand_limits(std::vector<double>{8.0, -4.0});
  CHECK(grid.limits().low == std::vector<double>{3.0, -4.0});
  CHECK(grid.limits().high == std::vector<double>{8.0, 3.0});

  grid.expand_limits(std::vector<double>{5.0, 0.0});  // interior: unchanged
  CHECK(grid.limits().low == std::vector<double>{3.0, -4.0});
  CHECK(grid.limits().high == std::vector<double>{8.0, 3.0});
}

TEST_CASE("record_hit appends and resolve_states takes the mode") {
  Grid grid = with_limits(square(1, 4), {0.0}, {1.0});
  const std::vector<int> c0 = {0};
  grid.record_hit(c0, 1);
  CHECK(grid.cell_at(c0).hit_history == std::vector<Label>{1});
  grid.record_hit(c0, 1);
  grid.record_hit(c0, 0);
  CHECK(grid.cell_at(c0).hit_history == std::vector<Label>{1, 1, 0});

  grid.resolve_states();
  CHECK(grid.cell_at(c0).state == 1);
  CHECK(!grid.cell_at(std::vector<int>{1}).state);  // empty history stays unassigned
}

TEST_CASE("resolve_states breaks modal ties by recency") {
  // All orderings of a 2-2 tie: the label of the later hit must win.
  const std::vector<std::vector<Label>> histories = {
      {0, 1}, {1, 0}, {0, 1, 1, 0}, {1, 0, 0, 1}, {0, 0, 1, 1}, {1, 1, 0, 0}};
  for (const auto& history : histories) {
    Grid grid = with_limits(square(1, 2), {0.0}, {1.0});
    for (Label y : history) grid.record_hit(std::vector<int>{0}, y);
    grid.resolve_states();
    CHECK(grid.cell_at(std::vector<int>{0}).state == history.back());
  }
}

TEST_CASE("evolve fills a 3x3 grid from its center in two generations") {
  Grid grid = with_limits(square(2, 3), {0.0, 0.0}, {1.0, 1.0});
  grid.cell_at(std::vector<int>{1, 1}).state = 1;
  CHECK(grid.evolve_until_full() == 2);
  for (int i = 0; i < grid.cell_count(); ++i) CHECK(grid.cell(i).state == 1);
}

TEST_CASE("evolve: one synchronous step on a 1x4 line") {
  Grid grid = with_limits(square(1, 4), {0.0}, {1.0});
  grid.cell_at(std::vector<int>{1}).state = 0;
  grid.cell_at(std::vector<int>{2}).state = 1;
  CHECK(grid.evolve_step() == 2);
  CHECK(grid.cell_at(std::vector<int>{0}).state == 0);
  CHECK(grid.cell_at(std::vector<int>{3}).state == 1);
}

TEST_CASE("evolve on a fully assigned grid is a fixed point") {
  Grid grid = with_limits(square(2, 3), {0.0, 0.0}, {1.0, 1.0});
  for (int i = 0; i < grid.cell_count(); ++i) grid.cell(i).state = i % 2;
  CHECK(grid.evolve_until_full() == 0);
  for (int i = 0; i < grid.cell_count(); ++i) CHECK(grid.cell(i).state == i % 2);
}

TEST_CASE("evolve rejects a completely unseeded grid") {
  Grid grid = with_limits(square(2, 3), {0.0, 0.0}, {1.0, 1.0});
  CHECK_THROWS_AS(grid.evolve_until_full(), std::invalid_argument);
}

TEST_CASE("one generation equals the copy-then-update oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int dims = 1 + rng.uniform_int(3);
    const int bins = 2 + rng.uniform_int(4);
    const int radius = 1 + rng.uniform_int(2);
    Grid grid = random_partial_grid(rng, dims, bins, radius);
    const auto expected = synchronous_step_oracle(grid);
    grid.evolve_step();
    for (int i = 0; i < grid.cell_count(); ++i) {
      CHECK(grid.cell(i).state == expected[static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("evolve_until_full leaves no cell unassigned, within the cap") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int dims = 1 + rng.uniform_int(3);
    const int bins = 2 + rng.uniform_int(4);
    Grid grid = random_partial_grid(rng, dims, bins, 1 + rng.uniform_int(2));
    const int generations = grid.evolve_until_full();
    CHECK(grid.unassigned_count() == 0);
    CHECK(generations <= grid.config().bins_per_dim * grid.config().dims);
  }
}

TEST_CASE("locality: cells outside the ball never change an update") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    Grid grid = random_partial_grid(rng, 2, 5, 1);

    // A target cell that is currently unassigned.
    int target = -1;
    for (int i = 0; i < grid.cell_count(); ++i) {
      if (!grid.cell(i).state) {
        target = i;
        break;
      }
    }
    if (target < 0) continue;

    Grid perturbed = grid;
    // Perturb one cell strictly outside the radius-1 ball of the target.
    const auto tc = grid.coords_of(target);
    for (int i = 0; i < grid.cell_count(); ++i) {
      const auto coords = grid.coords_of(i);
      const int dist = std::abs(coords[0] - tc[0]) + std::abs(coords[1] - tc[1]);
      if (dist > 1) {
        auto& s = perturbed.cell(i).state;
        s = s ? std::optional<Label>(1 - *s) : std::optional<Label>(rng.uniform_int(2));
        break;
      }
    }

    grid.evolve_step();
    perturbed.evolve_step();
    CHECK(grid.cell(target).state == perturbed.cell(target).state);
  }
}

TEST_CASE("homogeneity: translating a seed pattern translates the update") {
  Grid a = with_limits(square(2, 9), {0.0, 0.0}, {1.0, 1.0});
  Grid b = with_limits(square(2, 9), {0.0, 0.0}, {1.0, 1.0});
  // Same L-shaped pattern planted at (2,2) and at (5,5).
  const std::vector<std::pair<std::vector<int>, Label>> pattern = {
      {{0, 0}, 1}, {{1, 0}, 1}, {{0, 1}, 0}};
  for (const auto& [offset, label] : pattern) {
    a.cell_at(std::vector<int>{2 + offset[0], 2 + offset[1]}).state = label;
    b.cell_at(std::vector<int>{5 + offset[0], 5 + offset[1]}).state = label;
  }
  a.evolve_step();
  b.evolve_step();
  // Compare the 5x5 window around each pattern (radius-1 influence zone
  // plus margin, away from any boundary).
  for (int di = -1; di <= 3; ++di) {
    for (int dj = -1; dj <= 3; ++dj) {
      CHECK(a.cell_at(std::vector<int>{2 + di, 2 + dj}).state ==
            b.cell_at(std::vector<int>{5 + di, 5 + dj}).state);
    }
  }
}

TEST_CASE("determinism: identical hit sequences produce identical grids") {
  auto build = [] {
    Grid grid = with_limits(square(2, 6), {0.0, 0.0}, {1.0, 1.0});
    Rng rng(99);
    for (int i = 0; i < 40; ++i) {
      std::vector<double> x = {rng.uniform01(), rng.uniform01()};
      grid.record_hit(grid.locate_cell(x), rng.uniform_int(2));
    }
    grid.resolve_states();
    grid.evolve_until_full();
    grid.resolve_states();
    std::ostringstream os;
    grid.dump(os);
    return os.str();
  };
  CHECK(build() == build());
}

TEST_CASE("degenerate limits are widened symmetrically") {
  Grid grid(square(2, 4));
  grid.expand_limits(std::vector<double>{0.5, 2.0});
  grid.expand_limits(std::vector<double>{0.5, 3.0});  // dim 0 stays constant
  grid.widen_degenerate_limits();
  CHECK(grid.limits().low[0] == doctest::Approx(0.5 - 1e-9));
  CHECK(grid.limits().high[0] == doctest::Approx(0.5 + 1e-9));
  CHECK(grid.limits().low[1] == 2.0);
  CHECK(grid.limits().high[1] == 3.0);
  // Bin arithmetic is defined for the constant feature.
  const auto coords = grid.locate_cell(std::vector<double>{0.5, 2.5});
  CHECK(coords[0] == 2);  // midpoint of the widened span
  CHECK(coords[1] == 2);
}

TEST_CASE("grid dump lists every cell with state, hits and last mutation") {
  Grid grid = with_limits(square(1, 2), {0.0}, {1.0});
  grid.record_hit(std::vector<int>{0}, 1);
  grid.resolve_states();
  grid.cell_at(std::vector<int>{0}).mutation_times.push_back(17);
  std::ostringstream os;
  grid.dump(os);
  const std::string text = os.str();
  CHECK(text.find("grid d=1 G=2 r=1 cells=2") != std::string::npos);
  CHECK(text.find("cell 0 1 1 17") != std::string::npos);
  CHECK(text.find("cell 1 - 0 -") != std::string::npos);
}

TEST_CASE("config invariants are enforced") {
  CHECK_THROWS_AS(Grid(square(0, 4)), std::invalid_argument);
  CHECK_THROWS_AS(Grid(square(2, 1)), std::invalid_argument);
  CHECK_THROWS_AS(Grid(square(2, 4, 0)), std::invalid_argument);
  GridConfig one_label = square(2, 4);
  one_label.state_alphabet = {0};
  CHECK_THROWS_AS(Grid{one_label}, std::invalid_argument);
  CHECK(Grid(square(3, 4)).cell_count() == 64);
}
