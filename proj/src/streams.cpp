#include "curie/streams.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace curie {

namespace {

constexpr double kSeaThresholds[4] = {8.0, 9.0, 7.0, 9.5};

[[noreturn]] void domain_error(const ConceptFunction& f, const char* what) {
  throw std::invalid_argument(to_string(f.kind) + " generator: " + what);
}

bool sine_condition(int function_id, double x1, double x2) {
  if (function_id == 1) return x2 < std::sin(x1);
  return x2 < 0.5 + 0.3 * std::sin(3.0 * std::numbers::pi * x1);
}

bool is_category(double v) { return v == 0.0 || v == 1.0 || v == 2.0; }
bool is_boolean(double v) { return v == 0.0 || v == 1.0; }

}  // namespace

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kSine: return "sine";
    case GeneratorKind::kRandomTree: return "random_tree";
    case GeneratorKind::kMixed: return "mixed";
    case GeneratorKind::kSea: return "sea";
    case GeneratorKind::kStagger: return "stagger";
  }
  return "?";
}

GeneratorKind generator_kind_from_string(const std::string& s) {
  if (s == "sine") return GeneratorKind::kSine;
  if (s == "random_tree") return GeneratorKind::kRandomTree;
  if (s == "mixed") return GeneratorKind::kMixed;
  if (s == "sea") return GeneratorKind::kSea;
  if (s == "stagger") return GeneratorKind::kStagger;
  throw std::invalid_argument("unknown generator kind: " + s);
}

std::string to_string(DriftKind kind) {
  return kind == DriftKind::kAbrupt ? "abrupt" : "gradual";
}

DriftKind drift_kind_from_string(const std::string& s) {
  if (s == "abrupt") return DriftKind::kAbrupt;
  if (s == "gradual") return DriftKind::kGradual;
  throw std::invalid_argument("unknown drift kind: " + s);
}

int generator_features(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kSine: return 2;
    case GeneratorKind::kRandomTree: return 2;
    case GeneratorKind::kMixed: return 4;
    case GeneratorKind::kSea: return 3;
    case GeneratorKind::kStagger: return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// RandomTreeModel

RandomTreeModel::RandomTreeModel(std::uint64_t seed, int n_features, int n_classes,
                                 RandomTreeParams params) {
  min_leaf_depth_reached_ = params.max_tree_depth;
  Rng rng(seed);
  root_ = build(rng, 0, n_features, n_classes, params);
}

int RandomTreeModel::build(Rng& rng, int depth, int n_features, int n_classes,
                           const RandomTreeParams& params) {
  const bool must_leaf = depth >= params.max_tree_depth;
  const bool may_leaf = depth >= params.min_leaf_depth &&
                        rng.uniform01() < params.fraction_leaves_per_level;
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (must_leaf || may_leaf) {
    nodes_[static_cast<std::size_t>(index)].label = rng.uniform_int(n_classes);
    max_depth_reached_ = std::max(max_depth_reached_, depth);
    min_leaf_depth_reached_ = std::min(min_leaf_depth_reached_, depth);
    return index;
  }
  const int feature = rng.uniform_int(n_features);
  const double threshold = rng.uniform01();
  const int left = build(rng, depth + 1, n_features, n_classes, params);
  const int right = build(rng, depth + 1, n_features, n_classes, params);
  Node& node = nodes_[static_cast<std::size_t>(index)];
  node.feature = feature;
  node.threshold = threshold;
  node.left = left;
  node.right = right;
  return index;
}

Label RandomTreeModel::classify(std::span<const double> x) const {
  int at = root_;
  while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
    const Node& node = nodes_[static_cast<std::size_t>(at)];
    at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                     : node.right;
  }
  return nodes_[static_cast<std::size_t>(at)].label;
}

// ---------------------------------------------------------------------------
// Concept

Concept::Concept(const ConceptFunction& f) : f_(f) {
  switch (f_.kind) {
    case GeneratorKind::kSine:
      if (f_.function_id != 1 && f_.function_id != 2)
        domain_error(f_, "function id must be 1 or 2");
      break;
    case GeneratorKind::kSea:
      if (f_.function_id < 0 || f_.function_id > 3)
        domain_error(f_, "function id must be in 0..3");
      break;
    case GeneratorKind::kStagger:
      if (f_.function_id < 0 || f_.function_id > 2)
        domain_error(f_, "function id must be in 0..2");
      break;
    case GeneratorKind::kMixed:
      if (f_.function_id != 0 && f_.function_id != 1)
        domain_error(f_, "function id must be 0 or 1");
      break;
    case GeneratorKind::kRandomTree:
      tree_ = std::make_shared<RandomTreeModel>(f_.tree_seed,
                                                generator_features(f_.kind), 2);
      break;
  }
}

int Concept::n_features() const { return generator_features(f_.kind); }

Label Concept::label(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_features())
    domain_error(f_, "wrong feature count");

  switch (f_.kind) {
    case GeneratorKind::kSine: {
      for (double v : x)
        if (v < 0.0 || v > 1.0) domain_error(f_, "features must lie in [0,1]");
      bool one = sine_condition(f_.function_id, x[0], x[1]);
      if (f_.reversed) one = !one;
      return one ? 1 : 0;
    }
    case GeneratorKind::kSea: {
      for (double v : x)
        if (v < 0.0 || v > 10.0) domain_error(f_, "features must lie in [0,10]");
      return x[0] + x[1] <= kSeaThresholds[f_.function_id] ? 1 : 0;
    }
    case GeneratorKind::kStagger: {
      for (double v : x)
        if (!is_category(v)) domain_error(f_, "attributes must be 0, 1 or 2");
      const int size = static_cast<int>(x[0]);
      const int color = static_cast<int>(x[1]);
      const int shape = static_cast<int>(x[2]);
      bool one = false;
      if (f_.function_id == 0) one = size == kStaggerSmall && color == kStaggerRed;
      if (f_.function_id == 1) one = color == kStaggerGreen || shape == kStaggerCircle;
      if (f_.function_id == 2) one = size == kStaggerMedium || size == kStaggerLarge;
      return one ? 1 : 0;
    }
    case GeneratorKind::kMixed: {
      if (!is_boolean(x[0]) || !is_boolean(x[1]))
        domain_error(f_, "first two features must be boolean 0/1");
      if (x[2] < 0.0 || x[2] > 1.0 || x[3] < 0.0 || x[3] > 1.0)
        domain_error(f_, "numeric features must lie in [0,1]");
      const int held = (x[0] == 1.0 ? 1 : 0) + (x[1] == 1.0 ? 1 : 0) +
                       (sine_condition(2, x[2], x[3]) ? 1 : 0);
      bool one = held >= 2;
      if (f_.function_id == 1) one = !one;
      return one ? 1 : 0;
    }
    case GeneratorKind::kRandomTree: {
      for (double v : x)
        if (v < 0.0 || v > 1.0) domain_error(f_, "features must lie in [0,1]");
      return tree_->classify(x);
    }
  }
  return 0;
}

void Concept::sample(Rng& rng, std::vector<double>& out) const {
  out.resize(static_cast<std::size_t>(n_features()));
  switch (f_.kind) {
    case GeneratorKind::kSine:
    case GeneratorKind::kRandomTree:
      out[0] = rng.uniform01();
      out[1] = rng.uniform01();
      break;
    case GeneratorKind::kSea:
      for (auto& v : out) v = rng.uniform(0.0, 10.0);
      break;
    case GeneratorKind::kStagger:
      for (auto& v : out) v = static_cast<double>(rng.uniform_int(3));
      break;
    case GeneratorKind::kMixed:
      out[0] = rng.bernoulli(0.5) ? 1.0 : 0.0;
      out[1] = rng.bernoulli(0.5) ? 1.0 : 0.0;
      out[2] = rng.uniform01();
      out[3] = rng.uniform01();
      break;
  }
}

Label label_of(const ConceptFunction& f, std::span<const double> x) {
  return Concept(f).label(x);
}

// ---------------------------------------------------------------------------
// Stream generation

void validate_spec(const StreamSpec& spec) {
  if (spec.schedule.empty()) throw std::invalid_argument("stream spec: empty schedule");
  if (spec.positions.size() + 1 != spec.schedule.size())
    throw std::invalid_argument("stream spec: need one drift position per concept switch");
  if (spec.total_length < 1) throw std::invalid_argument("stream spec: empty stream");
  std::int64_t prev = 0;
  for (std::int64_t pos : spec.positions) {
    if (pos <= prev || pos >= spec.total_length)
      throw std::invalid_argument(
          "stream spec: drift positions must be strictly increasing inside the stream");
    prev = pos;
  }
  if (spec.drift == DriftKind::kGradual && spec.width < 1)
    throw std::invalid_argument("stream spec: gradual drift needs a positive width");
  if (spec.noise < 0.0 || spec.noise > 1.0)
    throw std::invalid_argument("stream spec: noise must be a probability");
  const GeneratorKind kind = spec.schedule.front().kind;
  for (const auto& f : spec.schedule) {
    if (f.kind != kind)
      throw std::invalid_argument("stream spec: mixed generator kinds in one schedule");
  }
}

std::int64_t concept_size(const StreamSpec& spec) {
  return spec.total_length / static_cast<std::int64_t>(spec.schedule.size());
}

GeneratedStream generate_traced(const StreamSpec& spec) {
  validate_spec(spec);

  std::vector<Concept> concepts;
  concepts.reserve(spec.schedule.size());
  for (const auto& f : spec.schedule) concepts.emplace_back(f);

  const bool balance = spec.schedule.front().kind == GeneratorKind::kStagger;

  GeneratedStream out;
  out.instances.reserve(static_cast<std::size_t>(spec.total_length));
  out.concept_index.reserve(static_cast<std::size_t>(spec.total_length));
  out.clean_label.reserve(static_cast<std::size_t>(spec.total_length));

  Rng rng(spec.seed);
  Label balance_target = 0;
  std::vector<double> x;

  for (std::int64_t t = 0; t < spec.total_length; ++t) {
    std::size_t active = 0;
    for (std::size_t j = 0; j < spec.positions.size(); ++j) {
      if (spec.drift == DriftKind::kAbrupt) {
        if (t >= spec.positions[j]) {
          active = j + 1;
        } else {
          break;
        }
      } else {
        const double z = 4.0 * static_cast<double>(t - spec.positions[j]) /
                         static_cast<double>(spec.width);
        const double p_new = 1.0 / (1.0 + std::exp(-z));
        if (rng.uniform01() < p_new) {
          active = j + 1;
        } else {
          break;
        }
      }
    }
    const Concept& active_concept = concepts[active];

    Label label;
    if (balance) {
      int attempts = 0;
      do {
        active_concept.sample(rng, x);
        label = active_concept.label(x);
        if (++attempts > 100000)
          throw std::runtime_error("stream generation: class balancing stalled");
      } while (label != balance_target);
      balance_target = 1 - balance_target;
    } else {
      active_concept.sample(rng, x);
      label = active_concept.label(x);
    }

    out.concept_index.push_back(static_cast<int>(active));
    out.clean_label.push_back(label);
    if (spec.noise > 0.0 && rng.bernoulli(spec.noise)) label = 1 - label;
    out.instances.push_back(Instance{x, label});
  }
  return out;
}

std::vector<Instance> generate(const StreamSpec& spec) {
  return generate_traced(spec).instances;
}

// ---------------------------------------------------------------------------
// CSV

void export_csv(std::span<const Instance> stream, std::ostream& os) {
  const std::size_t d = stream.empty() ? 0 : stream.front().x.size();
  for (std::size_t f = 0; f < d; ++f) os << 'f' << f << ',';
  os << "label\n";
  char buf[40];
  for (const Instance& inst : stream) {
    for (double v : inst.x) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf << ',';
    }
    os << inst.y << '\n';
  }
}

void export_csv(std::span<const Instance> stream, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  export_csv(stream, os);
}

std::vector<Instance> import_csv(std::istream& is, const std::string& origin) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error(origin + ": empty file, header row expected");

  std::vector<Instance> out;
  std::size_t columns = 0;
  std::size_t line_no = 1;
  std::vector<std::string> fields;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (columns == 0) {
      columns = fields.size();
      if (columns < 2)
        throw std::runtime_error(origin + ": line " + std::to_string(line_no) +
                                 ": need at least one feature and a label");
    }
    if (fields.size() != columns)
      throw std::runtime_error(origin + ": line " + std::to_string(line_no) +
                               ": expected " + std::to_string(columns) +
                               " columns, got " + std::to_string(fields.size()));
    Instance inst;
    inst.x.reserve(columns - 1);
    for (std::size_t f = 0; f + 1 < columns; ++f) {
      const char* begin = fields[f].c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin || *end != '\0')
        throw std::runtime_error(origin + ": line " + std::to_string(line_no) +
                                 ": bad feature value '" + fields[f] + "'");

      inst.x.push_back(v);
    }
    {
      const char* begin = fields.back().c_str();
      char* end = nullptr;
      const long y = std::strtol(begin, &end, 10);
      if (end == begin || *end != '\0')
        throw std::runtime_error(origin + ": line " + std::to_string(line_no) +
                                 ": bad label '" + fields.back() + "'");
      inst.y = static_cast<Label>(y);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Instance> import_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return import_csv(is, path);
}

// ---------------------------------------------------------------------------
// Built-in dataset suite

namespace {

ConceptFunction sine_fn(int id, bool reversed) {
  return ConceptFunction{GeneratorKind::kSine, id, reversed, 0};
}

ConceptFunction plain_fn(GeneratorKind kind, int id) {
  return ConceptFunction{kind, id, false, 0};
}

ConceptFunction tree_fn(std::uint64_t seed) {
  return ConceptFunction{GeneratorKind::kRandomTree, 0, false, seed};
}

StreamSpec suite_spec(std::string name, std::vector<ConceptFunction> schedule,
                      DriftKind drift, double noise, int bins, std::uint64_t seed) {
  StreamSpec spec;
  spec.name = std::move(name);
  spec.schedule = std::move(schedule);
  spec.drift = drift;
  if (drift == DriftKind::kAbrupt) {
    spec.positions = {10000, 20000, 30000};
    spec.width = 0;
  } else {
    spec.positions = {9500, 20000, 30500};
    spec.width = 1000;
  }
  spec.total_length = 40000;
  spec.noise = noise;
  spec.seed = seed;
  spec.bins = bins;
  return spec;
}

}  // namespace

std::vector<StreamSpec> paper_suite() {
  const std::vector<ConceptFunction> sine_f1 = {sine_fn(1, false), sine_fn(1, true),
                                                sine_fn(2, false), sine_fn(2, true)};
  const std::vector<ConceptFunction> sine_f2 = {sine_fn(2, true), sine_fn(2, false),
                                                sine_fn(1, true), sine_fn(1, false)};
  const std::vector<ConceptFunction> rt_f1 = {tree_fn(8873), tree_fn(9856),
                                              tree_fn(7896), tree_fn(2563)};
  const std::vector<ConceptFunction> rt_f2 = {tree_fn(2563), tree_fn(7896),
                                              tree_fn(9856), tree_fn(8873)};
  const auto mixed_fns = [](std::initializer_list<int> ids) {
    std::vector<ConceptFunction> v;
    for (int id : ids) v.push_back(plain_fn(GeneratorKind::kMixed, id));
    return v;
  };
  const auto sea_fns = [](std::initializer_list<int> ids) {
    std::vector<ConceptFunction> v;
    for (int id : ids) v.push_back(plain_fn(GeneratorKind::kSea, id));
    return v;
  };
  const auto stagger_fns = [](std::initializer_list<int> ids) {
    std::vector<ConceptFunction> v;
    for (int id : ids) v.push_back(plain_fn(GeneratorKind::kStagger, id));
    return v;
  };

  // Stagger uses one bin per category value: with ordinal encoding 0/1/2,
  // any finer split leaves the occupied cells farther apart than the
  // mutation-scan radius reaches.
  std::vector<StreamSpec> suite;
  suite.push_back(suite_spec("Sine_A_F1", sine_f1, DriftKind::kAbrupt, 0.0, 20, 101));
  suite.push_back(suite_spec("Sine_A_F2", sine_f2, DriftKind::kAbrupt, 0.0, 20, 102));
  suite.push_back(suite_spec("Sine_G_F1", sine_f1, DriftKind::kGradual, 0.0, 20, 103));
  suite.push_back(suite_spec("Sine_G_F2", sine_f2, DriftKind::kGradual, 0.0, 20, 104));
  suite.push_back(suite_spec("RT_A_F1", rt_f1, DriftKind::kAbrupt, 0.0, 20, 105));
  suite.push_back(suite_spec("RT_A_F2", rt_f2, DriftKind::kAbrupt, 0.0, 20, 106));
  suite.push_back(suite_spec("RT_G_F1", rt_f1, DriftKind::kGradual, 0.0, 20, 107));
  suite.push_back(suite_spec("RT_G_F2", rt_f2, DriftKind::kGradual, 0.0, 20, 108));
  suite.push_back(suite_spec("Mixed_A_F1", mixed_fns({0, 1, 0, 1}), DriftKind::kAbrupt, 0.0, 10, 109));
  suite.push_back(suite_spec("Mixed_A_F2", mixed_fns({1, 0, 1, 0}), DriftKind::kAbrupt, 0.0, 10, 110));
  suite.push_back(suite_spec("Mixed_G_F1", mixed_fns({0, 1, 0, 1}), DriftKind::kGradual, 0.0, 10, 111));
  suite.push_back(suite_spec("Mixed_G_F2", mixed_fns({1, 0, 1, 0}), DriftKind::kGradual, 0.0, 10, 112));
  suite.push_back(suite_spec("Sea_A_F1", sea_fns({0, 1, 2, 3}), DriftKind::kAbrupt, 0.2, 10, 113));
  suite.push_back(suite_spec("Sea_A_F2", sea_fns({3, 2, 1, 0}), DriftKind::kAbrupt, 0.2, 10, 114));
  suite.push_back(suite_spec("Sea_G_F1", sea_fns({0, 1, 2, 3}), DriftKind::kGradual, 0.2, 10, 115));
  suite.push_back(suite_spec("Sea_G_F2", sea_fns({3, 2, 1, 0}), DriftKind::kGradual, 0.2, 10, 116));
  suite.push_back(suite_spec("Stagger_A_F1", stagger_fns({0, 1, 2, 0}), DriftKind::kAbrupt, 0.0, 3, 117));
  suite.push_back(suite_spec("Stagger_A_F2", stagger_fns({2, 1, 0, 2}), DriftKind::kAbrupt, 0.0, 3, 118));
  suite.push_back(suite_spec("Stagger_G_F1", stagger_fns({0, 1, 2, 0}), DriftKind::kGradual, 0.0, 3, 119));
  suite.push_back(suite_spec("Stagger_G_F2", stagger_fns({2, 1, 0, 2}), DriftKind::kGradual, 0.0, 3, 120));
  return suite;
}

}  // namespace curie
