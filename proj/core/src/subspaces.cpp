#include "dichotomy/subspaces.hpp"

#include "dichotomy/errors.hpp"
#include "dichotomy/parallel.hpp"
#include "dichotomy/propagation.hpp"

#include <cmath>
#include <deque>
#include <sstream>

namespace dichotomy {

namespace {

void check_truncation(const CoefficientFamily& family, double truncation_time) {
  if (!std::isfinite(truncation_time) || !(truncation_time > 0.0)) {
    throw ContractViolation("truncation time must be positive and finite");
  }
  if (truncation_time < family.asymptotic_time()) {
    std::ostringstream msg;
    msg << "truncation time " << truncation_time << " is below the family's asymptotic time "
        << family.asymptotic_time();
    throw ContractViolation(msg.str());
  }
}

Frame transport_seed(const CoefficientFamily& family, const ParameterValue& lambda, const Frame& seed, double from,
                     double tol, double reortho_interval, TransportDiagnostics* diagnostics) {
  if (seed.empty()) return Frame(Matrix(family.dimension(), 0));
  const TransportResult r = transport_frame(family, lambda, seed, from, 0.0, reortho_interval, tol);
  if (diagnostics) {
    diagnostics->log_growth = r.log_growth;
    diagnostics->accepted_steps = r.accepted_steps;
    diagnostics->rejected_steps = r.rejected_steps;
    diagnostics->reorthonormalizations = r.reorthonormalizations;
  }
  return r.frame;
}

Frame apply(const Frame& f, const Matrix& q) {
  if (f.empty()) return f;
  return Frame(f.columns() * q);
}

// Rotates f onto the orthonormalized closed-form vectors when they are available.
Frame orient_to(const Frame& f, const Matrix& closed_form) {
  if (f.empty() || closed_form.cols() != f.size() || closed_form.rows() != f.dim()) return f;
  const Frame reference = orthonormalize(Frame(closed_form)).q;
  return apply(f, procrustes_factor(reference, f));
}

}  // namespace

Frame stable_frame_at_zero(const CoefficientFamily& family, const ParameterValue& lambda, double truncation_time,
                           double tol, double reortho_interval, double gap_tol, TransportDiagnostics* diagnostics) {
  check_truncation(family, truncation_time);
  const AsymptoticSeeds seeds = asymptotic_splitting_data(family, lambda, gap_tol);
  return transport_seed(family, lambda, seeds.stable_plus, truncation_time, tol, reortho_interval, diagnostics);
}

Frame unstable_frame_at_zero(const CoefficientFamily& family, const ParameterValue& lambda, double truncation_time,
                             double tol, double reortho_interval, double gap_tol, TransportDiagnostics* diagnostics) {
  check_truncation(family, truncation_time);
  const AsymptoticSeeds seeds = asymptotic_splitting_data(family, lambda, gap_tol);
  return transport_seed(family, lambda, seeds.unstable_minus, -truncation_time, tol, reortho_interval, diagnostics);
}

SubspacePair subspace_pair(const CoefficientFamily& family, const ParameterValue& lambda, const Numerics& numerics) {
  check_truncation(family, numerics.truncation_time);
  const AsymptoticSeeds seeds = asymptotic_splitting_data(family, lambda, numerics.gap_tol);
  SubspacePair pair;
  pair.truncation_time = numerics.truncation_time;
  pair.unstable = transport_seed(family, lambda, seeds.unstable_minus, -numerics.truncation_time, numerics.ode_tol,
                                 numerics.reortho_interval, &pair.unstable_diagnostics);
  pair.stable = transport_seed(family, lambda, seeds.stable_plus, numerics.truncation_time, numerics.ode_tol,
                               numerics.reortho_interval, &pair.stable_diagnostics);
  return pair;
}

SubspacePair orient_to_closed_form(const CoefficientFamily& family, const ParameterValue& lambda, SubspacePair pair) {
  if (const auto closed = family.closed_form_frames(lambda)) {
    pair.unstable = orient_to(pair.unstable, closed->unstable);
    pair.stable = orient_to(pair.stable, closed->stable);
  }
  return pair;
}

Transversality transversality(const SubspacePair& pair, double zero_tol) {
  const Eigen::Index d = pair.unstable.dim();
  if (pair.stable.dim() != d || pair.unstable.size() + pair.stable.size() != d) {
    throw ContractViolation("transversality: frame dimensions do not add up to the ambient dimension");
  }
  Matrix m(d, d);
  m << pair.unstable.columns(), pair.stable.columns();
  Transversality out;
  out.margin = d == 0 ? 1.0 : smallest_singular_value(m);
  out.transversal = out.margin > zero_tol;
  return out;
}

AlignmentPlan alignment_plan(const ParameterSpace& space, std::size_t root) {
  const std::size_t n = space.size();
  if (root >= n) throw ContractViolation("alignment_plan: root is not a node");
  AlignmentPlan plan;
  plan.steps.reserve(n);
  switch (space.topology()) {
    case Topology::interval:
      plan.steps.push_back({root, std::nullopt});
      for (std::size_t i = root + 1; i < n; ++i) plan.steps.push_back({i, i - 1});
      for (std::size_t i = root; i-- > 0;) plan.steps.push_back({i, i + 1});
      break;
    case Topology::circle:
      plan.steps.push_back({root, std::nullopt});
      for (std::size_t k = 1; k < n; ++k) {
        plan.steps.push_back({(root + k) % n, (root + k - 1) % n});
      }
      plan.closing_edge = ParameterSpace::Edge{(root + n - 1) % n, root};
      break;
    case Topology::grid2d: {
      std::vector<bool> seen(n, false);
      auto bfs = [&](std::size_t start) {
        std::deque<std::size_t> queue{start};
        seen[start] = true;
        plan.steps.push_back({start, std::nullopt});
        while (!queue.empty()) {
          const std::size_t u = queue.front();
          queue.pop_front();
          for (std::size_t v : space.neighbors(u)) {
            if (seen[v]) continue;
            seen[v] = true;
            plan.steps.push_back({v, u});
            queue.push_back(v);
          }
        }
      };
      bfs(root);
      for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i]) bfs(i);
      }
      break;
    }
  }
  return plan;
}

std::vector<Matrix> align_frames(std::vector<Frame>& frames, const AlignmentPlan& plan) {
  std::vector<Matrix> factors;
  factors.reserve(plan.steps.size());
  for (const AlignmentPlan::Step& step : plan.steps) {
    Frame& f = frames.at(step.node);
    if (!step.parent) {
      factors.push_back(Matrix::Identity(f.size(), f.size()));
      continue;
    }
    const Matrix q = procrustes_factor(frames.at(*step.parent), f);
    f = apply(f, q);
    factors.push_back(q);
  }
  return factors;
}

void realign(FrameField& field) {
  std::vector<Frame> unstable, stable;
  unstable.reserve(field.pairs.size());
  stable.reserve(field.pairs.size());
  for (const SubspacePair& p : field.pairs) {
    unstable.push_back(p.unstable);
    stable.push_back(p.stable);
  }
  field.unstable_factors = align_frames(unstable, field.plan);
  field.stable_factors = align_frames(stable, field.plan);
  for (std::size_t i = 0; i < field.pairs.size(); ++i) {
    field.pairs[i].unstable = std::move(unstable[i]);
    field.pairs[i].stable = std::move(stable[i]);
  }
}

std::vector<ParameterSpace::Edge> discontinuous_edges(const ParameterSpace& space,
                                                      const std::vector<SubspacePair>& pairs, double bound) {
  std::vector<ParameterSpace::Edge> bad;
  for (const ParameterSpace::Edge& e : space.edges()) {
    const SubspacePair& a = pairs.at(e.first);
    const SubspacePair& b = pairs.at(e.second);
    if (a.unstable.size() != b.unstable.size() || a.stable.size() != b.stable.size()) {
      bad.push_back(e);
      continue;
    }
    const double angle =
        std::max(max_principal_angle(a.unstable, b.unstable), max_principal_angle(a.stable, b.stable));
    if (angle > bound) bad.push_back(e);
  }
  return bad;
}

FrameField frame_field(const CoefficientFamily& family, const ParameterSpace& space, const Numerics& numerics) {
  if (space.size() == 0) throw ContractViolation("frame_field: empty parameter space");
  if (space.lambda0().empty()) throw ContractViolation("frame_field: Lambda_0 is empty");

  FrameField field;
  field.space = space;
  field.root = space.lambda0().front();
  field.continuity_bound = numerics.continuity_bound;
  field.pairs.resize(space.size());
  parallel_for(space.size(), [&](std::size_t i) { field.pairs[i] = subspace_pair(family, space.node(i), numerics); });

  field.pairs[field.root] = orient_to_closed_form(family, space.node(field.root), std::move(field.pairs[field.root]));

  field.plan = alignment_plan(space, field.root);
  realign(field);

  const std::vector<ParameterSpace::Edge> bad = discontinuous_edges(space, field.pairs, numerics.continuity_bound);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << bad.size() << " edge(s) exceed the continuity bound " << numerics.continuity_bound
        << " rad; refine the parameter grid (first: " << bad.front().first << "-" << bad.front().second << ")";
    throw RefinementNeededError(msg.str(), bad);
  }
  return field;
}

}  // namespace dichotomy
