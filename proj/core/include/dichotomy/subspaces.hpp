#pragma once

#include "dichotomy/linalg.hpp"
#include "dichotomy/model.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace dichotomy {

struct TransportDiagnostics {
  double log_growth = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t reorthonormalizations = 0;
};

/// Orthonormal frames for E^u(0) (m columns) and E^s(0) (d - m columns).
struct SubspacePair {
  Frame unstable;
  Frame stable;
  double truncation_time = 0.0;
  TransportDiagnostics unstable_diagnostics;
  TransportDiagnostics stable_diagnostics;
};

/// E^s(0): the stable seed of the +infinity system placed at t = +T and
/// transported backward to 0. Requires T >= the family's asymptotic time.
Frame stable_frame_at_zero(const CoefficientFamily& family, const ParameterValue& lambda, double truncation_time,
                           double tol, double reortho_interval = 1.0, double gap_tol = 1e-8,
                           TransportDiagnostics* diagnostics = nullptr);

/// E^u(0): the unstable seed of the -infinity system placed at t = -T and
/// transported forward to 0.
Frame unstable_frame_at_zero(const CoefficientFamily& family, const ParameterValue& lambda, double truncation_time,
                             double tol, double reortho_interval = 1.0, double gap_tol = 1e-8,
                             TransportDiagnostics* diagnostics = nullptr);

SubspacePair subspace_pair(const CoefficientFamily& family, const ParameterValue& lambda, const Numerics& numerics);

/// Rotates U and S onto the family's closed-form frames at lambda (a sign
/// flip for single columns). Unchanged when there is no closed form.
SubspacePair orient_to_closed_form(const CoefficientFamily& family, const ParameterValue& lambda, SubspacePair pair);

struct Transversality {
  bool transversal = false;
  double margin = 0.0;  // smallest singular value of [U | S]
};

Transversality transversality(const SubspacePair& pair, double zero_tol);

/// Order in which nodes are aligned: each visited node is rotated onto its
/// parent. Roots have no parent.
struct AlignmentPlan {
  struct Step {
    std::size_t node;
    std::optional<std::size_t> parent;
  };
  std::vector<Step> steps;
  /// Circle topologies only: the edge (last visited node, root) that the plan
  /// leaves unaligned.
  std::optional<ParameterSpace::Edge> closing_edge;
};

/// Interval: outward from the root in both directions. Circle: once around
/// starting at the root, ending at its other neighbour. Grid: breadth-first
/// over 4-neighbours (further roots start any unreachable mask components).
AlignmentPlan alignment_plan(const ParameterSpace& space, std::size_t root);

/// Post-multiplies every visited frame by the orthogonal Procrustes factor
/// that best matches its parent. Returns the applied factors in plan order.
std::vector<Matrix> align_frames(std::vector<Frame>& frames, const AlignmentPlan& plan);

struct FrameField {
  ParameterSpace space;
  std::vector<SubspacePair> pairs;
  std::size_t root = 0;
  double continuity_bound = 0.2;
  AlignmentPlan plan;
  /// Procrustes factors applied in plan order (unstable, stable).
  std::vector<Matrix> unstable_factors;
  std::vector<Matrix> stable_factors;
};

/// Computes a SubspacePair at every node (in parallel), orients the root
/// (first Lambda_0 node) to agree with closed-form frames when the family
/// has them, aligns along alignment_plan and checks that every edge has
/// principal angles within numerics.continuity_bound. Throws
/// RefinementNeededError listing the offending edges otherwise.
FrameField frame_field(const CoefficientFamily& family, const ParameterSpace& space, const Numerics& numerics);

/// Re-runs the alignment pass on an existing field.
void realign(FrameField& field);

/// Edges whose unstable or stable principal angle exceeds `bound`.
std::vector<ParameterSpace::Edge> discontinuous_edges(const ParameterSpace& space,
                                                      const std::vector<SubspacePair>& pairs, double bound);

}  // namespace dichotomy
