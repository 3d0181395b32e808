#include "dichotomy/index.hpp"

#include "dichotomy/errors.hpp"
#include "dichotomy/parallel.hpp"

#include <cmath>
#include <sstream>

namespace dichotomy {

namespace {

Matrix project_onto(const Frame& f, const Matrix& v) { return f.columns() * (f.columns().transpose() * v); }

}  // namespace

std::string to_string(Bundle bundle) { return bundle == Bundle::stable ? "stable" : "unstable"; }

Matrix assemble_M(const SubspacePair& pair) {
  const Eigen::Index d = pair.unstable.dim();
  if (pair.stable.dim() != d || pair.unstable.size() + pair.stable.size() != d) {
    throw ContractViolation("assemble_M: frame dimensions do not add up to the ambient dimension");
  }
  Matrix m(d, d);
  m << pair.unstable.columns(), pair.stable.columns();
  return m;
}

double evans_determinant(const CoefficientFamily& family, const ParameterValue& lambda, const Numerics& numerics) {
  const SubspacePair pair = orient_to_closed_form(family, lambda, subspace_pair(family, lambda, numerics));
  return assemble_M(pair).determinant();
}

std::optional<double> normalized_evans(const CoefficientFamily& family, const ParameterValue& lambda,
                                       const SubspacePair& pair) {
  const auto closed = family.closed_form_frames(lambda);
  if (!closed) return std::nullopt;
  if (closed->unstable.cols() != pair.unstable.size() || closed->stable.cols() != pair.stable.size()) {
    return std::nullopt;
  }
  const Eigen::Index d = pair.unstable.dim();
  Matrix m(d, d);
  m << project_onto(pair.unstable, closed->unstable), project_onto(pair.stable, closed->stable);
  return m.determinant();
}

NodeSample evaluate_node(const CoefficientFamily& family, const ParameterValue& lambda, const SubspacePair& pair,
                         double zero_tol) {
  NodeSample s;
  s.lambda = lambda;
  const SignedDeterminant det = det_sign(assemble_M(pair), zero_tol);
  s.evans = det.value;
  s.sign = det.sign;
  const Transversality t = transversality(pair, zero_tol);
  s.margin = t.margin;
  s.transversal = t.transversal;
  s.normalized = normalized_evans(family, lambda, pair);
  return s;
}

int parity_pair(const IndexReport& report, std::size_t a, std::size_t b) {
  const NodeSample& sa = report.samples.at(a);
  const NodeSample& sb = report.samples.at(b);
  if (!sa.transversal || !sb.transversal || sa.sign == 0 || sb.sign == 0) {
    std::ostringstream msg;
    msg << "parity_pair: node " << (sa.transversal && sa.sign != 0 ? b : a) << " is not transversal";
    throw ContractViolation(msg.str());
  }
  return sa.sign * sb.sign < 0 ? 1 : 0;
}

int iota_interval(const Matrix& m_a, const Matrix& m_b, double zero_tol) {
  if (m_a.rows() != m_a.cols() || m_b.rows() != m_b.cols() || m_a.rows() != m_b.rows()) {
    throw ContractViolation("iota_interval: endpoint matrices must be square of equal size");
  }
  const SignedDeterminant da = det_sign(m_a, zero_tol);
  const SignedDeterminant db = det_sign(m_b, zero_tol);
  if (da.sign == 0 || db.sign == 0) throw ContractViolation("iota_interval: singular endpoint matrix");
  return da.sign * db.sign < 0 ? 1 : 0;
}

Holonomy loop_holonomy(const std::vector<Frame>& aligned, const AlignmentPlan& plan) {
  if (!plan.closing_edge) throw ContractViolation("holonomy: the alignment plan has no closing edge");
  const Frame& last = aligned.at(plan.closing_edge->first);
  const Frame& root = aligned.at(plan.closing_edge->second);
  Holonomy h;
  if (root.empty()) return h;
  h.overlap_determinant = (last.columns().transpose() * root.columns()).determinant();
  h.sign = h.overlap_determinant < 0.0 ? -1 : 1;
  h.w1 = h.sign < 0 ? 1 : 0;
  return h;
}

Holonomy circle_holonomy(const FrameField& field, Bundle which) {
  if (field.space.topology() != Topology::circle) throw ContractViolation("circle_holonomy: not a circle space");
  std::vector<Frame> frames;
  frames.reserve(field.pairs.size());
  for (const SubspacePair& p : field.pairs) frames.push_back(which == Bundle::stable ? p.stable : p.unstable);
  const auto& edge = *field.plan.closing_edge;
  const double angle = max_principal_angle(frames.at(edge.first), frames.at(edge.second));
  if (angle > field.continuity_bound) {
    throw RefinementNeededError("circle_holonomy: closing edge exceeds the continuity bound", {edge});
  }
  return loop_holonomy(frames, field.plan);
}

PejsachowiczClass pejsachowicz_class(const CoefficientFamily& family, const ParameterSpace& space,
                                     const Numerics& numerics) {
  if (space.topology() != Topology::circle) throw ContractViolation("pejsachowicz_class: not a circle space");
  std::vector<Frame> plus(space.size()), minus(space.size());
  parallel_for(space.size(), [&](std::size_t i) {
    AsymptoticStableBundles b = asymptotic_stable_bundles(family, space.node(i), numerics.gap_tol);
    plus[i] = std::move(b.plus);
    minus[i] = std::move(b.minus);
  });
  const std::size_t root = space.lambda0().empty() ? 0 : space.lambda0().front();
  const AlignmentPlan plan = alignment_plan(space, root);
  for (std::vector<Frame>* frames : {&plus, &minus}) {
    for (const ParameterSpace::Edge& e : space.edges()) {
      if (max_principal_angle((*frames)[e.first], (*frames)[e.second]) > numerics.continuity_bound) {
        throw RefinementNeededError("pejsachowicz_class: asymptotic bundle exceeds the continuity bound", {e});
      }
    }
    align_frames(*frames, plan);
  }
  PejsachowiczClass c;
  c.w1_plus = loop_holonomy(plus, plan).w1;
  c.w1_minus = loop_holonomy(minus, plan).w1;
  c.value = (c.w1_plus + c.w1_minus) % 2;
  return c;
}

IndexReport index_report(const CoefficientFamily& family, const FrameField& field, const Numerics& numerics) {
  IndexReport report;
  report.topology = field.space.topology();
  report.lambda0 = field.space.lambda0();
  report.samples.resize(field.pairs.size());
  for (std::size_t i = 0; i < field.pairs.size(); ++i) {
    report.samples[i] = evaluate_node(family, field.space.node(i), field.pairs[i], numerics.zero_tol);
  }

  const std::vector<std::size_t>& l0 = report.lambda0;
  for (std::size_t i = 0; i < l0.size(); ++i) {
    for (std::size_t j = i + 1; j < l0.size(); ++j) {
      const NodeSample& a = report.samples[l0[i]];
      const NodeSample& b = report.samples[l0[j]];
      if (!a.transversal || !b.transversal || a.sign == 0 || b.sign == 0) continue;
      ParityEntry e;
      e.a = l0[i];
      e.b = l0[j];
      e.psi = parity_pair(report, e.a, e.b);
      if (report.topology == Topology::interval) {
        e.iota = iota_interval(assemble_M(field.pairs[e.a]), assemble_M(field.pairs[e.b]), numerics.zero_tol);
      }
      report.parities.push_back(e);
    }
  }

  if (report.topology == Topology::circle) {
    report.unstable_holonomy = circle_holonomy(field, Bundle::unstable);
    report.stable_holonomy = circle_holonomy(field, Bundle::stable);
    report.pejsachowicz = pejsachowicz_class(family, field.space, numerics);
  }
  return report;
}

}  // namespace dichotomy
