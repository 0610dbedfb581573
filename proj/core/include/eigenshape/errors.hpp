#pragma once

#include <stdexcept>

namespace eigenshape {

// Radius function crosses zero: the boundary no longer encloses a star-shaped domain.
struct NonStarShaped : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Too few interior vertices to request this many eigenpairs.
struct MeshTooCoarse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The eigenvalue cluster around k reaches the last computed index, so its upper
// edge is unresolved; callers should request a larger spectrum.
struct ClusterTouchesTop : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Boundary traces are numerically linearly dependent on the admissible arcs.
struct DependentTraces : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No bump width produced the requested sign pattern of cluster rates.
struct SignatureFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Zero or otherwise unusable input vectors.
struct DegenerateInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace eigenshape
