#include "dichotomy/bifurcation.hpp"

#include "dichotomy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace dichotomy {

namespace {

constexpr double kBracketWidth = 1e-8;
constexpr int kMaxBisections = 200;

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

Frame rotate_onto(const Frame& reference, const Frame& f) {
  if (f.empty()) return f;
  return Frame(f.columns() * procrustes_factor(reference, f));
}

LocatedZero bisect(const CoefficientFamily& family, const FrameField& field, const std::vector<NodeSample>& samples,
                   std::size_t a, std::size_t b, const Numerics& numerics) {
  LocatedZero z;
  z.sign_lo = samples[a].sign;
  z.sign_hi = samples[b].sign;
  z.margin_lo = samples[a].margin;
  z.margin_hi = samples[b].margin;
  double lo = field.space.node(a).x;
  double hi = field.space.node(b).x;
  const SubspacePair& reference = field.pairs[a];

  NodeSample at_mid;
  double mid = 0.5 * (lo + hi);
  for (int step = 0;; ++step) {
    mid = 0.5 * (lo + hi);
    at_mid = aligned_sample(family, {mid, 0.0}, reference, numerics);
    const bool narrow = hi - lo <= kBracketWidth;
    const bool resolved = narrow && std::abs(at_mid.evans) <= numerics.zero_tol;
    if (at_mid.evans == 0.0) {
      // exact zero: the bracket closes on it
      lo = hi = mid;
      z.widths.push_back(0.0);
      break;
    }
    if (resolved || !(lo < mid && mid < hi) || step >= kMaxBisections) break;
    if (sign_of(at_mid.evans) == z.sign_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
    z.widths.push_back(hi - lo);
  }
  z.lambda = mid;
  z.lo = lo;
  z.hi = hi;
  z.residual = std::abs(at_mid.evans);
  z.margin = at_mid.margin;
  return z;
}

double mean_angle(double a, double b) { return std::atan2(std::sin(a) + std::sin(b), std::cos(a) + std::cos(b)); }

}  // namespace

NodeSample aligned_sample(const CoefficientFamily& family, const ParameterValue& lambda,
                          const SubspacePair& reference, const Numerics& numerics) {
  SubspacePair pair = subspace_pair(family, lambda, numerics);
  pair.unstable = rotate_onto(reference.unstable, pair.unstable);
  pair.stable = rotate_onto(reference.stable, pair.stable);
  return evaluate_node(family, lambda, pair, numerics.zero_tol);
}

BifurcationFinding locate_zeros_on_path(const CoefficientFamily& family, const ParameterSpace& space,
                                        const Numerics& numerics) {
  if (space.topology() != Topology::interval) throw ContractViolation("locate_zeros_on_path: not an interval space");
  return locate_zeros_on_path(family, frame_field(family, space, numerics), numerics);
}

BifurcationFinding locate_zeros_on_path(const CoefficientFamily& family, const FrameField& field,
                                        const Numerics& numerics) {
  const ParameterSpace& space = field.space;
  if (space.topology() != Topology::interval) throw ContractViolation("locate_zeros_on_path: not an interval space");
  BifurcationFinding out;
  out.samples.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    out.samples.push_back(evaluate_node(family, space.node(i), field.pairs[i], numerics.zero_tol));
  }
  for (std::size_t end : {std::size_t{0}, space.size() - 1}) {
    if (!out.samples[end].transversal || out.samples[end].sign == 0) {
      throw ContractViolation("locate_zeros_on_path: path endpoint " + std::to_string(end) + " is not transversal");
    }
  }

  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (out.samples[i].sign != 0) nonzero.push_back(i);
  }
  for (std::size_t k = 0; k + 1 < nonzero.size(); ++k) {
    const std::size_t p = nonzero[k];
    const std::size_t q = nonzero[k + 1];
    if (out.samples[p].sign != out.samples[q].sign) {
      out.zeros.push_back(bisect(family, field, out.samples, p, q, numerics));
    } else if (q > p + 1) {
      std::size_t best = p + 1;
      for (std::size_t i = p + 1; i < q; ++i) {
        if (std::abs(out.samples[i].evans) < std::abs(out.samples[best].evans)) best = i;
      }
      out.candidates.push_back({best, space.node(best).x, out.samples[best].evans});
    }
  }
  return out;
}

SignMap label_sign_map(const ParameterSpace& space, std::vector<int> signs) {
  if (space.topology() != Topology::grid2d) throw ContractViolation("sign map: not a grid space");
  if (signs.size() != space.size()) throw ContractViolation("sign map: one sign per node expected");
  const std::size_t n = space.size();
  SignMap map;
  map.signs = std::move(signs);
  map.component.assign(n, -1);

  auto eight_neighbors = [&](std::size_t u) {
    std::vector<std::size_t> out;
    const auto [i, j] = space.cell_of(u);
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        if (auto v = space.node_at(static_cast<std::ptrdiff_t>(i) + di, static_cast<std::ptrdiff_t>(j) + dj)) {
          out.push_back(*v);
        }
      }
    }
    return out;
  };

  int next_label = 0;
  for (int s : {1, -1}) {
    for (std::size_t start = 0; start < n; ++start) {
      if (map.signs[start] != s || map.component[start] >= 0) continue;
      std::deque<std::size_t> queue{start};
      map.component[start] = next_label;
      while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t v : space.neighbors(u)) {
          if (map.signs[v] == s && map.component[v] < 0) {
            map.component[v] = next_label;
            queue.push_back(v);
          }
        }
      }
      ++next_label;
      ++(s > 0 ? map.positive_components : map.negative_components);
    }
  }

  std::vector<bool> seen(n, false);
  for (std::size_t start = 0; start < n; ++start) {
    if (map.signs[start] != 0) continue;
    map.zero_nodes.push_back(start);
    if (seen[start]) continue;
    ++map.zero_components;
    std::deque<std::size_t> queue{start};
    seen[start] = true;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : eight_neighbors(u)) {
        if (map.signs[v] == 0 && !seen[v]) {
          seen[v] = true;
          queue.push_back(v);
        }
      }
    }
  }

  map.disconnects = map.sign_components() >= 2;
  std::vector<int> labels;
  for (std::size_t node : space.lambda0()) {
    if (map.component[node] >= 0) labels.push_back(map.component[node]);
  }
  std::sort(labels.begin(), labels.end());
  map.lambda0_separated = std::unique(labels.begin(), labels.end()) - labels.begin() >= 2;
  return map;
}

SignMap sign_map_2d(const CoefficientFamily& family, const ParameterSpace& space, const Numerics& numerics) {
  if (space.topology() != Topology::grid2d) throw ContractViolation("sign_map_2d: not a grid space");
  return sign_map_2d(family, frame_field(family, space, numerics), numerics);
}

SignMap sign_map_2d(const CoefficientFamily& family, const FrameField& field, const Numerics& numerics) {
  std::vector<NodeSample> samples;
  samples.reserve(field.pairs.size());
  std::vector<int> signs;
  signs.reserve(field.pairs.size());
  for (std::size_t i = 0; i < field.pairs.size(); ++i) {
    samples.push_back(evaluate_node(family, field.space.node(i), field.pairs[i], numerics.zero_tol));
    signs.push_back(samples.back().sign);
  }
  SignMap map = label_sign_map(field.space, std::move(signs));
  map.samples = std::move(samples);
  return map;
}

std::vector<std::size_t> boundary_nodes(const ParameterSpace& space) {
  if (space.topology() != Topology::grid2d) throw ContractViolation("boundary_nodes: not a grid space");
  const GridSpec& g = space.grid();
  const double cx = 0.5 * (g.x_min + g.x_max);
  const double cy = 0.5 * (g.y_min + g.y_max);
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < space.size(); ++u) {
    if (space.neighbors(u).size() < 4) out.push_back(u);
  }
  auto angle = [&](std::size_t u) { return std::atan2(space.node(u).y - cy, space.node(u).x - cx); };
  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) { return angle(a) < angle(b); });
  return out;
}

std::vector<BoundaryChange> boundary_trace(const SignMap& map, const ParameterSpace& space) {
  std::vector<std::size_t> ring;
  for (std::size_t u : boundary_nodes(space)) {
    if (map.signs.at(u) != 0) ring.push_back(u);
  }
  std::vector<BoundaryChange> out;
  if (ring.size() < 2) return out;
  const GridSpec& g = space.grid();
  const double cx = 0.5 * (g.x_min + g.x_max);
  const double cy = 0.5 * (g.y_min + g.y_max);
  for (std::size_t k = 0; k < ring.size(); ++k) {
    const std::size_t a = ring[k];
    const std::size_t b = ring[(k + 1) % ring.size()];
    if (map.signs[a] == map.signs[b]) continue;
    BoundaryChange c;
    c.from = a;
    c.to = b;
    c.angle = mean_angle(std::atan2(space.node(a).y - cy, space.node(a).x - cx),
                         std::atan2(space.node(b).y - cy, space.node(b).x - cx));
    const double s = std::sin(c.angle);
    c.semicircle = s > 1e-12 ? "upper" : (s < -1e-12 ? "lower" : "axis");
    out.push_back(c);
  }
  return out;
}

}  // namespace dichotomy
