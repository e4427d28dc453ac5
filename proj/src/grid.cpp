#include "curie/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace curie {

namespace {

void check_dims(std::size_t got, int want, const char* what) {
  if (static_cast<int>(got) != want) {
    throw std::invalid_argument(std::string(what) + ": expected " +
                                std::to_string(want) + " components, got " +
                                std::to_string(got));
  }
}

}  // namespace

std::optional<Label> majority_vote(std::span<const std::optional<Label>> states,
                                   std::optional<Label> current,
                                   std::span<const Label> alphabet) {
  int best_count = 0;
  std::optional<Label> best;
  for (Label label : alphabet) {
    int count = 0;
    for (const auto& s : states) {
      if (s && *s == label) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best = label;
    } else if (count == best_count && count > 0 && current && *current == label) {
      best = label;  // tie: a still-assigned cell keeps its state
    }
  }
  return best_count == 0 ? std::nullopt : best;
}

Grid::Grid(GridConfig config) : config_(std::move(config)) {
  if (config_.dims < 1) throw std::invalid_argument("grid: dims must be >= 1");
  if (config_.bins_per_dim < 2) throw std::invalid_argument("grid: bins_per_dim must be >= 2");
  if (config_.radius < 1) throw std::invalid_argument("grid: radius must be >= 1");
  if (config_.state_alphabet.size() < 2)
    throw std::invalid_argument("grid: state alphabet needs >= 2 labels");

  std::int64_t total = 1;
  strides_.assign(static_cast<std::size_t>(config_.dims), 1);
  for (int n = 0; n < config_.dims; ++n) {
    total *= config_.bins_per_dim;
    if (total > (std::int64_t{1} << 26)) {
      throw std::invalid_argument("grid: bins_per_dim^dims too large for dense storage");
    }
  }
  for (int n = config_.dims - 2; n >= 0; --n) {
    strides_[static_cast<std::size_t>(n)] =
        strides_[static_cast<std::size_t>(n) + 1] * config_.bins_per_dim;
  }
  cells_.assign(static_cast<std::size_t>(total), Cell{});

  limits_.low.assign(static_cast<std::size_t>(config_.dims),
                     std::numeric_limits<double>::infinity());
  limits_.high.assign(static_cast<std::size_t>(config_.dims),
                      -std::numeric_limits<double>::infinity());
}

std::vector<int> Grid::coords_of(int index) const {
  std::vector<int> coords(static_cast<std::size_t>(config_.dims));
  for (int n = 0; n < config_.dims; ++n) {
    coords[static_cast<std::size_t>(n)] =
        (index / strides_[static_cast<std::size_t>(n)]) % config_.bins_per_dim;
  }
  return coords;
}

int Grid::index_of(std::span<const int> coords) const {
  check_dims(coords.size(), config_.dims, "coords");
  int index = 0;
  for (int n = 0; n < config_.dims; ++n) {
    int c = coords[static_cast<std::size_t>(n)];
    if (c < 0 || c >= config_.bins_per_dim) throw std::out_of_range("coords out of bounds");
    index += c * strides_[static_cast<std::size_t>(n)];
  }
  return index;
}

std::vector<int> Grid::locate_cell(std::span<const double> x) const {
  check_dims(x.size(), config_.dims, "feature vector");
  if (!limits_.initialized()) throw std::logic_error("grid limits not initialized");

  std::vector<int> coords(static_cast<std::size_t>(config_.dims));
  const int g = config_.bins_per_dim;
  for (int n = 0; n < config_.dims; ++n) {
    double lo = limits_.low[static_cast<std::size_t>(n)];
    double hi = limits_.high[static_cast<std::size_t>(n)];
    if (!(hi > lo)) {  // constant feature so far: use a virtual epsilon span
      lo -= kDegenerateHalfWidth;
      hi += kDegenerateHalfWidth;
    }
    double v = x[static_cast<std::size_t>(n)];
    int bin = static_cast<int>(std::floor((v - lo) / (hi - lo) * g));
    coords[static_cast<std::size_t>(n)] = std::clamp(bin, 0, g - 1);
  }
  return coords;
}

int Grid::locate_index(std::span<const double> x) const {
  return index_of(locate_cell(x));
}

void Grid::neighbor_indices(std::span<const int> coords, int radius,
                            std::vector<int>& out) const {
  check_dims(coords.size(), config_.dims, "coords");
  out.clear();
  // Per-dimension deltas in ascending order yield lexicographic coordinate
  // order, which is ascending flat-index order for row-major storage.
  auto rec = [&](auto&& self, int dim, int budget, int partial, bool all_zero) -> void {
    if (dim == config_.dims) {
      if (!all_zero) out.push_back(partial);
      return;
    }
    for (int delta = -budget; delta <= budget; ++delta) {
      int c = coords[static_cast<std::size_t>(dim)] + delta;
      if (c < 0 || c >= config_.bins_per_dim) continue;
      self(self, dim + 1, budget - std::abs(delta),
           partial + c * strides_[static_cast<std::size_t>(dim)],
           all_zero && delta == 0);
    }
  };
  rec(rec, 0, radius, 0, true);
}

std::vector<std::vector<int>> Grid::von_neumann_neighbors(std::span<const int> coords,
                                                          int radius) const {
  std::vector<int> indices;
  neighbor_indices(coords, radius, indices);
  std::vector<std::vector<int>> result;
  result.reserve(indices.size());
  for (int idx : indices) result.push_back(coords_of(idx));
  return result;
}

void Grid::expand_limits(std::span<const double> x) {
  check_dims(x.size(), config_.dims, "feature vector");
  for (int n = 0; n < config_.dims; ++n) {
    auto i = static_cast<std::size_t>(n);
    limits_.low[i] = std::min(limits_.low[i], x[i]);
    limits_.high[i] = std::max(limits_.high[i], x[i]);
  }
}

void Grid::widen_degenerate_limits() {
  for (int n = 0; n < config_.dims; ++n) {
    auto i = static_cast<std::size_t>(n);
    if (limits_.low[i] <= limits_.high[i] && !(limits_.low[i] < limits_.high[i])) {
      double v = limits_.low[i];
      limits_.low[i] = v - kDegenerateHalfWidth;
      limits_.high[i] = v + kDegenerateHalfWidth;
    }
  }
}

void Grid::record_hit(std::span<const int> coords, Label y) {
  cell_at(coords).hit_history.push_back(y);
}

void Grid::resolve_states() {
  for (auto& c : cells_) {
    if (c.hit_history.empty()) continue;
    // Modal label; on a tie the most recently hit label wins.
    Label best = c.hit_history.front();
    int best_count = 0;
    std::size_t best_last = 0;
    for (Label label : config_.state_alphabet) {
      int count = 0;
      std::size_t last = 0;
      for (std::size_t i = 0; i < c.hit_history.size(); ++i) {
        if (c.hit_history[i] == label) {
          ++count;
          last = i;
        }
      }
      if (count > best_count || (count == best_count && count > 0 && last > best_last)) {
        best = label;
        best_count = count;
        best_last = last;
      }
    }
    c.state = best;
  }
}

int Grid::evolve_step() {
  std::vector<std::optional<Label>> snapshot(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) snapshot[i] = cells_[i].state;

  std::vector<int> nbrs;
  std::vector<std::optional<Label>> states;
  std::vector<int> coords;
  int assigned = 0;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (snapshot[i]) continue;
    coords = coords_of(static_cast<int>(i));
    neighbor_indices(coords, config_.radius, nbrs);
    states.clear();
    for (int nb : nbrs) states.push_back(snapshot[static_cast<std::size_t>(nb)]);
    auto vote = majority_vote(states, std::nullopt, config_.state_alphabet);
    if (vote) {
      cells_[i].state = *vote;
      cells_[i].hit_history.push_back(*vote);
      ++assigned;
    }
  }
  return assigned;
}

int Grid::unassigned_count() const {
  int count = 0;
  for (const auto& c : cells_) {
    if (!c.state) ++count;
  }
  return count;
}

int Grid::evolve_until_full() {
  int remaining = unassigned_count();
  if (remaining == cell_count()) {
    throw std::invalid_argument("evolve_until_full: no seeded cells");
  }
  const int max_generations = config_.bins_per_dim * config_.dims;
  int generations = 0;
  while (remaining > 0) {
    if (generations >= max_generations) {
      throw std::runtime_error("evolve_until_full: generation cap exceeded");
    }
    remaining -= evolve_step();
    ++generations;
  }
  return generations;
}

void Grid::dump(std::ostream& os) const {
  char buf[64];
  os << "grid d=" << config_.dims << " G=" << config_.bins_per_dim
     << " r=" << config_.radius << " cells=" << cell_count() << "\n";
  for (int n = 0; n < config_.dims; ++n) {
    auto i = static_cast<std::size_t>(n);
    os << "limits " << n;
    std::snprintf(buf, sizeof buf, " %.17g %.17g", limits_.low[i], limits_.high[i]);
    os << buf << "\n";
  }
  for (int i = 0; i < cell_count(); ++i) {
    const Cell& c = cell(i);
    auto coords = coords_of(i);
    os << "cell ";
    for (std::size_t n = 0; n < coords.size(); ++n) {
      if (n) os << ',';
      os << coords[n];
    }
    os << ' ';
    if (c.state) {
      os << *c.state;
    } else {
      os << '-';
    }
    os << ' ' << c.hit_history.size() << ' ';
    if (c.mutation_times.empty()) {
      os << '-';
    } else {
      os << c.mutation_times.back();
    }
    os << "\n";
  }
}

}  // namespace curie
