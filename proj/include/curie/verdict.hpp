#pragma once

namespace curie {

/// Per-step detector output.
enum class Verdict { kNoChange, kWarning, kDrift };

}  // namespace curie
