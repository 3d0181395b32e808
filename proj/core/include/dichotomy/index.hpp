#pragma once

#include "dichotomy/linalg.hpp"
#include "dichotomy/model.hpp"
#include "dichotomy/subspaces.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dichotomy {

/// [U | S]: unstable columns first, then stable.
Matrix assemble_M(const SubspacePair& pair);

/// det [U | S] on freshly computed orthonormal frames. When the family has
/// closed-form frames they fix the orientation of U and S; otherwise the
/// seeds' sign conventions do.
double evans_determinant(const CoefficientFamily& family, const ParameterValue& lambda, const Numerics& numerics);

/// det [U U^T u | S S^T s] with u, s the family's closed-form frames: the
/// closed-form vectors projected onto the computed subspaces. nullopt when
/// the family has no closed form.
std::optional<double> normalized_evans(const CoefficientFamily& family, const ParameterValue& lambda,
                                       const SubspacePair& pair);

struct NodeSample {
  ParameterValue lambda;
  double evans = 0.0;
  int sign = 0;  // 0 when |evans| <= zero_tol
  double margin = 0.0;
  bool transversal = false;
  std::optional<double> normalized;
};

struct ParityEntry {
  std::size_t a = 0;
  std::size_t b = 0;
  int psi = 0;
  std::optional<int> iota;  // interval topologies
};

enum class Bundle { stable, unstable };

std::string to_string(Bundle bundle);

struct Holonomy {
  int sign = 1;
  int w1 = 0;
  double overlap_determinant = 1.0;
};

struct PejsachowiczClass {
  int w1_plus = 0;   // stable bundle of the +infinity system
  int w1_minus = 0;  // stable bundle of the -infinity system
  int value = 0;     // w1_plus + w1_minus mod 2
};

struct IndexReport {
  Topology topology = Topology::interval;
  std::vector<NodeSample> samples;
  std::vector<std::size_t> lambda0;
  std::vector<ParityEntry> parities;  // every pair of transversal Lambda_0 nodes
  std::optional<Holonomy> unstable_holonomy;
  std::optional<Holonomy> stable_holonomy;
  std::optional<PejsachowiczClass> pejsachowicz;
};

NodeSample evaluate_node(const CoefficientFamily& family, const ParameterValue& lambda, const SubspacePair& pair,
                         double zero_tol);

/// psi = 1 iff sign(L_D(a)) sign(L_D(b)) < 0. Throws ContractViolation when
/// either node is not transversal.
int parity_pair(const IndexReport& report, std::size_t a, std::size_t b);

/// 1 iff det(M_a M_b) < 0. Throws ContractViolation when either determinant
/// is within zero_tol of 0.
int iota_interval(const Matrix& m_a, const Matrix& m_b, double zero_tol = 0.0);

/// Sign of det(F_last^T F_root) across the unaligned closing edge of a
/// circle field. Throws ContractViolation off circles and
/// RefinementNeededError when the closing edge exceeds the continuity bound.
Holonomy circle_holonomy(const FrameField& field, Bundle which);

/// Holonomy of a loop of frames already aligned along `plan`.
Holonomy loop_holonomy(const std::vector<Frame>& aligned, const AlignmentPlan& plan);

/// w1 of the asymptotic stable bundles over a circle space, summed mod 2.
PejsachowiczClass pejsachowicz_class(const CoefficientFamily& family, const ParameterSpace& space,
                                     const Numerics& numerics);

/// Samples at every node, parities for all Lambda_0 pairs (plus iota on
/// intervals) and, on circles, both holonomies and the Pejsachowicz class.
IndexReport index_report(const CoefficientFamily& family, const FrameField& field, const Numerics& numerics);

}  // namespace dichotomy
