#pragma once

#include "dichotomy/index.hpp"
#include "dichotomy/model.hpp"
#include "dichotomy/subspaces.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dichotomy {

/// A sign change of L_D refined by bisection.
struct LocatedZero {
  double lambda = 0.0;    // bracket midpoint
  double lo = 0.0;        // final bracket
  double hi = 0.0;
  int sign_lo = 0;        // L_D signs at the bracket ends (opposite)
  int sign_hi = 0;
  double residual = 0.0;  // |L_D(lambda)|
  double margin = 0.0;    // transversality margin at lambda
  double margin_lo = 0.0;
  double margin_hi = 0.0;
  std::vector<double> widths;  // bracket width after every bisection step
};

/// A node (or run of nodes) where |L_D| <= zero_tol without a sign change
/// across it: a zero with no parity evidence.
struct SigmaCandidate {
  std::size_t node = 0;
  double lambda = 0.0;
  double value = 0.0;
};

struct BifurcationFinding {
  std::vector<NodeSample> samples;
  std::vector<LocatedZero> zeros;
  std::vector<SigmaCandidate> candidates;
};

/// Scans the aligned L_D samples of an interval space for sign changes and
/// bisects every bracket on freshly computed frames until its width is at
/// most 1e-8 and |L_D| <= zero_tol (or the bracket cannot shrink further).
/// Throws ContractViolation when an endpoint of the interval is not transversal.
BifurcationFinding locate_zeros_on_path(const CoefficientFamily& family, const ParameterSpace& space,
                                        const Numerics& numerics);

/// Same, reusing an already computed field over an interval space.
BifurcationFinding locate_zeros_on_path(const CoefficientFamily& family, const FrameField& field,
                                        const Numerics& numerics);

/// L_D at lambda with frames rotated onto `reference` (so signs are comparable
/// with the reference node of an aligned field).
NodeSample aligned_sample(const CoefficientFamily& family, const ParameterValue& lambda,
                          const SubspacePair& reference, const Numerics& numerics);

struct SignMap {
  std::vector<NodeSample> samples;
  std::vector<int> signs;                // per node: -1, 0, +1
  std::vector<std::size_t> zero_nodes;
  std::vector<int> component;            // per node: region label (-1 on zero nodes)
  std::size_t positive_components = 0;   // 4-connected
  std::size_t negative_components = 0;   // 4-connected
  std::size_t zero_components = 0;       // 8-connected
  bool disconnects = false;              // at least two sign regions
  bool lambda0_separated = false;        // two Lambda_0 nodes lie in different regions

  std::size_t sign_components() const noexcept { return positive_components + negative_components; }
};

SignMap sign_map_2d(const CoefficientFamily& family, const ParameterSpace& space, const Numerics& numerics);
SignMap sign_map_2d(const CoefficientFamily& family, const FrameField& field, const Numerics& numerics);

/// Labels 4-connected regions of equal non-zero sign and 8-connected zero
/// regions on a grid space. Exposed for testing.
SignMap label_sign_map(const ParameterSpace& space, std::vector<int> signs);

struct BoundaryChange {
  std::size_t from = 0;  // consecutive boundary nodes (counter-clockwise)
  std::size_t to = 0;
  double angle = 0.0;    // polar angle midway between them, in (-pi, pi]
  std::string semicircle;  // "upper" (y > 0), "lower" (y < 0) or "axis"
};

/// Boundary nodes are mask nodes with a missing 4-neighbour, ordered by polar
/// angle. Reports cyclic sign changes of the map along them, skipping zeros.
std::vector<std::size_t> boundary_nodes(const ParameterSpace& space);
std::vector<BoundaryChange> boundary_trace(const SignMap& map, const ParameterSpace& space);

}  // namespace dichotomy
