#pragma once

#include <vector>

namespace curie {

using Label = int;

/// One labeled stream element. The timestamp of an instance is its position
/// in the stream it came from.
struct Instance {
  std::vector<double> x;
  Label y = 0;

  friend bool operator==(const Instance&, const Instance&) = default;
};

}  // namespace curie
