#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "curie/instance.hpp"
#include "curie/rng.hpp"

namespace curie {

enum class GeneratorKind { kSine, kRandomTree, kMixed, kSea, kStagger };
enum class DriftKind { kAbrupt, kGradual };

std::string to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(const std::string& s);
std::string to_string(DriftKind kind);
DriftKind drift_kind_from_string(const std::string& s);

/// One deterministic labeling function over its feature domain.
///   sine:        function_id 1 -> class 1 iff x2 < sin(x1)
///                function_id 2 -> class 1 iff x2 < 0.5 + 0.3*sin(3*pi*x1)
///                reversed flips the label; domain [0,1]^2
///   sea:         function_id f in 0..3 -> class 1 iff x1 + x2 <= theta_f,
///                theta = (8, 9, 7, 9.5); domain [0,10]^3
///   stagger:     3 categorical features (size, color, shape) encoded 0/1/2;
///                f0: size=small and color=red; f1: color=green or
///                shape=circle; f2: size=medium or size=large
///   mixed:       2 booleans b1, b2 (0/1) + 2 numerics in [0,1];
///                f0: class 1 iff at least two of {b1, b2,
///                x4 < 0.5 + 0.3*sin(3*pi*x3)} hold; f1 flips it
///   random_tree: traversal of a tree grown from tree_seed; domain [0,1]^2
struct ConceptFunction {
  GeneratorKind kind = GeneratorKind::kSine;
  int function_id = 1;
  bool reversed = false;
  std::uint64_t tree_seed = 0;

  friend bool operator==(const ConceptFunction&, const ConceptFunction&) = default;
};

// Stagger attribute encodings.
inline constexpr int kStaggerSmall = 0, kStaggerMedium = 1, kStaggerLarge = 2;
inline constexpr int kStaggerRed = 0, kStaggerGreen = 1, kStaggerBlue = 2;
inline constexpr int kStaggerCircle = 0, kStaggerSquare = 1, kStaggerTriangle = 2;

struct RandomTreeParams {
  int max_tree_depth = 6;
  int min_leaf_depth = 3;
  double fraction_leaves_per_level = 0.15;
};

/// Decision tree with random splits and random leaf labels, grown
/// deterministically from a seed. Internal nodes split on a random feature
/// at a random threshold; nodes at or below min_leaf_depth may become leaves
/// with probability fraction_leaves_per_level, and max_tree_depth forces a
/// leaf.
class RandomTreeModel {
 public:
  RandomTreeModel(std::uint64_t seed, int n_features, int n_classes,
                  RandomTreeParams params = {});

  Label classify(std::span<const double> x) const;
  int max_depth_reached() const { return max_depth_reached_; }
  int min_leaf_depth_reached() const { return min_leaf_depth_reached_; }

 private:
  struct Node {
    int feature = -1;  // -1: leaf
    double threshold = 0.0;
    Label label = 0;
    int left = -1;
    int right = -1;
  };

  int build(Rng& rng, int depth, int n_features, int n_classes,
            const RandomTreeParams& params);

  std::vector<Node> nodes_;
  int root_ = 0;
  int max_depth_reached_ = 0;
  int min_leaf_depth_reached_ = 0;
};

/// A ConceptFunction bound to whatever model it needs (the random tree).
class Concept {
 public:
  explicit Concept(const ConceptFunction& f);

  const ConceptFunction& function() const { return f_; }
  int n_features() const;

  /// Deterministic label; rejects feature vectors outside the domain.
  Label label(std::span<const double> x) const;

  /// Draw one feature vector from the concept's domain.
  void sample(Rng& rng, std::vector<double>& out) const;

 private:
  ConceptFunction f_;
  std::shared_ptr<const RandomTreeModel> tree_;
};

/// Convenience wrapper over Concept::label.
Label label_of(const ConceptFunction& f, std::span<const double> x);

int generator_features(GeneratorKind kind);

/// Declarative description of one synthetic drifting stream.
struct StreamSpec {
  std::string name;
  std::vector<ConceptFunction> schedule;
  DriftKind drift = DriftKind::kAbrupt;
  std::vector<std::int64_t> positions;  // abrupt switch points / gradual centers
  std::int64_t width = 0;               // transition length, gradual only
  std::int64_t total_length = 40000;
  double noise = 0.0;  // per-instance label flip probability
  std::uint64_t seed = 0;
  int bins = 10;  // grid resolution the cellular detector uses on this stream

  friend bool operator==(const StreamSpec&, const StreamSpec&) = default;
};

void validate_spec(const StreamSpec& spec);

/// Uniform concept-segment length used for detection scoring.
std::int64_t concept_size(const StreamSpec& spec);

struct GeneratedStream {
  std::vector<Instance> instances;
  std::vector<int> concept_index;   // which schedule entry labeled each step
  std::vector<Label> clean_label;   // label before the noise flip
};

/// Generate the stream with ground-truth trace. Fully deterministic in the
/// StreamSpec (including its seed). During a gradual transition centered at c
/// the new concept is drawn with probability 1/(1 + exp(-4(t-c)/width)).
/// Stagger streams are class-balanced by alternating the target class and
/// redrawing features until the active concept produces it.
GeneratedStream generate_traced(const StreamSpec& spec);
std::vector<Instance> generate(const StreamSpec& spec);

/// CSV: header row, d feature columns then one integer label column.
/// Features are written with 17 significant digits so round-trips are exact.
void export_csv(std::span<const Instance> stream, std::ostream& os);
void export_csv(std::span<const Instance> stream, const std::string& path);
std::vector<Instance> import_csv(std::istream& is, const std::string& origin);
std::vector<Instance> import_csv(const std::string& path);

/// The 20-dataset synthetic suite: Sine/RT/Mixed/Sea/Stagger, abrupt and
/// gradual variants, function orders F1/F2, drift positions
/// {10000,20000,30000} (abrupt) and centers {9500,20000,30500} width 1000
/// (gradual), 40000 instances each.
std::vector<StreamSpec> paper_suite();

}  // namespace curie
