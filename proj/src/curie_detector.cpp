#include "curie/curie_detector.hpp"

#include <ostream>
#include <stdexcept>

namespace curie {

CurieDetector::CurieDetector(CurieConfig config)
    : config_(std::move(config)), grid_(config_.grid) {
  if (config_.radius_mut < 1) throw std::invalid_argument("curie: radius_mut must be >= 1");
  if (config_.mutation_period < 1)
    throw std::invalid_argument("curie: mutation_period must be >= 1");
  if (config_.n_muts_allowed < 1)
    throw std::invalid_argument("curie: n_muts_allowed must be >= 1");
  if (config_.prep_size < 1) throw std::invalid_argument("curie: prep_size must be >= 1");
}

void CurieDetector::seed_grid(std::span<const Instance> instances) {
  grid_ = Grid(config_.grid);
  for (const Instance& inst : instances) {
    grid_.expand_limits(inst.x);
    grid_.record_hit(grid_.locate_cell(inst.x), inst.y);
  }
  grid_.widen_degenerate_limits();
  grid_.resolve_states();
  grid_.evolve_until_full();
  grid_.resolve_states();
}

void CurieDetector::prepare(std::span<const Instance> instances) {
  if (instances.empty()) throw std::invalid_argument("curie: empty preparatory sequence");
  seed_grid(instances);
  window_.clear();
  std::size_t start =
      instances.size() > static_cast<std::size_t>(config_.prep_size)
          ? instances.size() - static_cast<std::size_t>(config_.prep_size)
          : 0;
  for (std::size_t i = start; i < instances.size(); ++i) window_.push_back(instances[i]);
  clock_ += static_cast<std::int64_t>(instances.size());
  prepared_ = true;
}

Label CurieDetector::predict(std::span<const double> x) const {
  if (!prepared_) throw std::logic_error("curie: predict before prepare");
  return *grid_.cell(grid_.locate_index(x)).state;
}

Verdict CurieDetector::update(std::span<const double> x, Label y) {
  if (!prepared_) throw std::logic_error("curie: update before prepare");

  window_.push_back(Instance{std::vector<double>(x.begin(), x.end()), y});
  if (window_.size() > static_cast<std::size_t>(config_.prep_size)) window_.pop_front();

  grid_.expand_limits(x);
  // The cell is located once, after the limit expansion, and used for both
  // the state overwrite and the mutation test.
  const std::vector<int> coords = grid_.locate_cell(x);
  Cell& c = grid_.cell_at(coords);
  const Label current_state = *c.state;
  c.state = y;

  Verdict verdict = Verdict::kNoChange;
  if (current_state != y) {
    c.mutation_times.push_back(clock_);
    // Count neighbor cells whose latest mutation falls inside the open
    // look-back window (clock - mutation_period, clock). The fresh mutation
    // of the center cell itself does not count.
    grid_.neighbor_indices(coords, config_.radius_mut, neighbor_scratch_);
    int n_muts = 0;
    std::vector<std::vector<int>> counted;
    for (int nb : neighbor_scratch_) {
      std::int64_t last = grid_.cell(nb).last_mutation();
      if (last >= 0 && last > clock_ - config_.mutation_period && last < clock_) {
        ++n_muts;
        counted.push_back(grid_.coords_of(nb));
      }
    }
    if (n_muts >= config_.n_muts_allowed) {
      last_detection_ = Detection{clock_, coords, std::move(counted)};
      verdict = Verdict::kDrift;
      reset_and_reseed();
    }
  }
  ++clock_;
  return verdict;
}

void CurieDetector::reset_and_reseed() {
  if (!prepared_) throw std::logic_error("curie: reseed before prepare");
  std::vector<Instance> contents(window_.begin(), window_.end());
  seed_grid(contents);
}

void CurieDetector::write_snapshot(std::ostream& os) const {
  os << "curie-snapshot v1\n";
  os << "clock " << clock_ << "\n";
  os << "params r_mut=" << config_.radius_mut
     << " mutation_period=" << config_.mutation_period
     << " n_muts_allowed=" << config_.n_muts_allowed << " P=" << config_.prep_size
     << "\n";
  os << "alphabet";
  for (Label l : config_.grid.state_alphabet) os << ' ' << l;
  os << "\n";
  grid_.dump(os);
  for (int i = 0; i < grid_.cell_count(); ++i) {
    const Cell& c = grid_.cell(i);
    if (c.mutation_times.empty()) continue;
    auto coords = grid_.coords_of(i);
    os << "mutlog ";
    for (std::size_t n = 0; n < coords.size(); ++n) {
      if (n) os << ',';
      os << coords[n];
    }
    for (std::int64_t t : c.mutation_times) os << ' ' << t;
    os << "\n";
  }
  if (last_detection_) {
    os << "detection " << last_detection_->time << ' ';
    for (std::size_t n = 0; n < last_detection_->cell_coords.size(); ++n) {
      if (n) os << ',';
      os << last_detection_->cell_coords[n];
    }
    for (const auto& nb : last_detection_->counted_neighbors) {
      os << ' ';
      for (std::size_t n = 0; n < nb.size(); ++n) {
        if (n) os << ',';
        os << nb[n];
      }
    }
    os << "\n";
  }
  os << "end\n";
}

}  // namespace curie
