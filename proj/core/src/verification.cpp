#include "dichotomy/verification.hpp"

#include "dichotomy/bifurcation.hpp"
#include "dichotomy/config.hpp"
#include "dichotomy/errors.hpp"
#include "dichotomy/hyperbolic.hpp"
#include "dichotomy/index.hpp"
#include "dichotomy/propagation.hpp"
#include "dichotomy/subspaces.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dichotomy {

namespace {

using std::numbers::pi;

class Recorder {
 public:
  explicit Recorder(CheckResult& r) : r_(r) {}

  void at_most(const std::string& label, double value, double bound) { add(label, value, bound, "<=", value <= bound); }
  void at_least(const std::string& label, double value, double bound) {
    add(label, value, bound, ">=", value >= bound);
  }
  void equals(const std::string& label, double value, double expected) {
    add(label, value, expected, "==", value == expected);
  }

 private:
  void add(const std::string& label, double value, double bound, const char* rel, bool ok) {
    r_.measurements.push_back({label, value, bound, rel, ok && std::isfinite(value)});
  }
  CheckResult& r_;
};

FamilyPtr builtin(const std::string& name) { return build_family(builtin_family_config(name)); }

Numerics numerics_for(const VerifyOptions& o) {
  Numerics n;
  n.truncation_time = o.truncation_time;
  return n;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

int parity_of(const IndexReport& report, std::size_t a, std::size_t b) {
  for (const ParityEntry& e : report.parities) {
    if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return e.psi;
  }
  return -1;
}

// --- 1 ------------------------------------------------------------------------

void check_reflection_curve(const VerifyOptions& o, Recorder& rec) {
  const auto start = std::chrono::steady_clock::now();
  const FamilyPtr fam = builtin("paper-sec4-BC");
  const Numerics num = numerics_for(o);
  const ParameterSpace space = ParameterSpace::interval(0.0, pi, 181, {0.0, pi});
  const FrameField field = frame_field(*fam, space, num);
  const IndexReport report = index_report(*fam, field, num);

  int mismatches = 0;
  double max_error = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double theta = space.node(i).x;
    const NodeSample& s = report.samples[i];
    if (std::abs(theta - pi / 2) >= 0.01 && s.sign != sign_of(-std::cos(theta))) ++mismatches;
    max_error = std::max(max_error, std::abs(s.normalized.value_or(1e300) + std::cos(theta)));
  }
  rec.equals("sign_mismatches", mismatches, 0);
  rec.at_most("max_abs_error_normalized_LD", max_error, 1e-6);
  rec.equals("psi_0_pi", parity_of(report, space.lambda0()[0], space.lambda0()[1]), 1);
  rec.at_most("runtime_s", seconds_since(start), 10.0);
}

// --- 2 ------------------------------------------------------------------------

void check_poschl_teller(const VerifyOptions& o, Recorder& rec) {
  const auto start = std::chrono::steady_clock::now();
  const FamilyPtr fam = builtin("poschl-teller");
  const Numerics num = numerics_for(o);
  const ParameterSpace space = ParameterSpace::interval(0.5, 1.5, 101, {0.5, 1.5});
  const FrameField field = frame_field(*fam, space, num);
  const IndexReport report = index_report(*fam, field, num);

  double max_rel = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double l = space.node(i).x;
    if (std::abs(l - 1.0) < 0.01 - 1e-12) continue;
    const double exact = 2.0 * l * (1.0 - l * l);
    max_rel = std::max(max_rel, std::abs(report.samples[i].normalized.value_or(1e300) - exact) / std::abs(exact));
  }
  rec.at_most("max_rel_error_normalized_LD", max_rel, 1e-5);
  rec.equals("psi_half_three_halves", parity_of(report, space.lambda0()[0], space.lambda0()[1]), 1);

  const BifurcationFinding finding = locate_zeros_on_path(*fam, field, num);
  rec.equals("located_zeros", static_cast<double>(finding.zeros.size()), 1);
  const double err = finding.zeros.empty() ? 1e300 : std::abs(finding.zeros.front().lambda - 1.0);
  rec.at_most("abs_error_lambda_star", err, 1e-6);
  rec.at_most("runtime_s", seconds_since(start), 10.0);
}

// --- 3 ------------------------------------------------------------------------

void check_mobius(const VerifyOptions& o, Recorder& rec) {
  const auto start = std::chrono::steady_clock::now();
  const FamilyPtr fam = builtin("paper-sec4-exBC");
  const Numerics num = numerics_for(o);
  for (std::size_t n : {360u, 720u}) {
    const ParameterSpace space = ParameterSpace::circle(n, {pi});
    const FrameField field = frame_field(*fam, space, num);
    const IndexReport report = index_report(*fam, field, num);
    const std::string tag = "_n" + std::to_string(n);
    rec.equals("stable_holonomy_sign" + tag, report.stable_holonomy->sign, -1);
    rec.equals("unstable_w1" + tag, report.unstable_holonomy->w1, 0);
    rec.equals("pejsachowicz_class" + tag, report.pejsachowicz->value, 1);
  }
  rec.at_most("runtime_s", seconds_since(start), 15.0);
}

// --- 4 ------------------------------------------------------------------------

void check_transversality(const VerifyOptions& o, Recorder& rec) {
  const FamilyPtr fam = builtin("paper-sec4-BC");
  const Numerics num = numerics_for(o);
  const ParameterSpace space = ParameterSpace::interval(0.0, pi, 181, {0.0, pi});
  const BifurcationFinding finding = locate_zeros_on_path(*fam, space, num);
  rec.equals("located_zeros", static_cast<double>(finding.zeros.size()), 1);
  if (finding.zeros.empty()) return;
  const LocatedZero& z = finding.zeros.front();
  rec.at_most("abs_error_theta_star", std::abs(z.lambda - pi / 2), 1e-6);
  rec.at_most("margin_at_theta_star", z.margin, 1e-6);
  for (auto [label, theta] : {std::pair{"margin_at_pi_4", pi / 4}, {"margin_at_3pi_4", 3 * pi / 4}}) {
    rec.at_least(label, transversality(subspace_pair(*fam, {theta, 0.0}, num), num.zero_tol).margin, 0.1);
  }
}

// --- 5 ------------------------------------------------------------------------

void check_dichotomy_bounds(const VerifyOptions&, Recorder& rec) {
  double worst = -1e300;
  double worst_invariance = 0.0;
  for (const char* name : {"paper-sec4-BC", "paper-sec4-exBC"}) {
    const FamilyPtr fam = builtin(name);
    const auto& pw = dynamic_cast<const PiecewiseScalarFamily&>(*fam);
    const double t0 = pw.profile().t0();
    std::vector<double> negative(20), positive(20);
    for (int i = 0; i < 20; ++i) {
      positive[i] = 4.0 * t0 * i / 19.0;
      negative[i] = -positive[i];
    }
    std::reverse(negative.begin(), negative.end());
    for (double theta : {0.0, pi / 4, pi / 2, 3 * pi / 4, pi}) {
      const ParameterValue l{theta, 0.0};
      const HalfLineEstimates est = dichotomy_constants(*fam, l);
      const Matrix p_minus = matrix_sign_projector(pw.past_matrix(l)).projector;
      const Matrix p_plus = matrix_sign_projector(pw.future_matrix(l)).projector;
      const DichotomyCheck neg =
          verify_dichotomy(*fam, l, HalfLine::negative, p_minus, est.negative.k, est.negative.alpha, negative);
      const DichotomyCheck pos =
          verify_dichotomy(*fam, l, HalfLine::positive, p_plus, est.positive.k, est.positive.alpha, positive);
      worst = std::max({worst, neg.max_violation(), pos.max_violation()});
      worst_invariance = std::max({worst_invariance, neg.invariance_residual, pos.invariance_residual});
    }
  }
  rec.at_most("max_violation", worst, 1e-9);
  rec.at_most("max_invariance_residual", worst_invariance, 1e-6);
}

// --- 6 ------------------------------------------------------------------------

void check_roughness(const VerifyOptions& o, Recorder& rec) {
  const FamilyConfig base_config = builtin_family_config("paper-sec4-BC");
  const FamilyPtr base = build_family(base_config);
  const Numerics num = numerics_for(o);
  const ParameterSpace space = ParameterSpace::interval(0.0, pi, 61, {0.0, pi});

  double threshold = 1e300;
  for (std::size_t node : space.lambda0()) {
    const HalfLineEstimates est = dichotomy_constants(*base, space.node(node));
    threshold = std::min({threshold, roughness_bound(est.negative.k, est.negative.alpha),
                          roughness_bound(est.positive.k, est.positive.alpha)});
  }
  const double sup_norm = 0.9 * threshold;

  const FrameField reference = frame_field(*base, space, num);
  const IndexReport ref_report = index_report(*base, reference, num);
  const std::size_t a = space.lambda0()[0];
  const std::size_t b = space.lambda0()[1];

  int changed = 0;
  for (int trial = 0; trial < 20; ++trial) {
    FamilyConfig c;
    c.label = "custom";
    c.kind = "perturbed";
    c.base = std::make_shared<FamilyConfig>(base_config);
    c.support = 4.0;
    c.sup_norm = sup_norm;
    c.seed = o.seed + static_cast<std::uint64_t>(trial);
    const FamilyPtr fam = build_family(c);
    FrameField field = frame_field(*fam, space, num);
    // Orient the root like the unperturbed field so signs are comparable.
    SubspacePair& root = field.pairs[field.root];
    root.unstable = Frame(root.unstable.columns() * procrustes_factor(reference.pairs[field.root].unstable, root.unstable));
    root.stable = Frame(root.stable.columns() * procrustes_factor(reference.pairs[field.root].stable, root.stable));
    realign(field);
    const IndexReport report = index_report(*fam, field, num);
    const bool same = report.samples[a].sign == ref_report.samples[a].sign &&
                      report.samples[b].sign == ref_report.samples[b].sign &&
                      parity_of(report, a, b) == parity_of(ref_report, a, b);
    if (!same) ++changed;
  }
  rec.at_most("perturbation_sup_norm", sup_norm, 0.9 * threshold);
  rec.equals("trials_with_changed_signs_or_psi", changed, 0);
}

// --- 7 ------------------------------------------------------------------------

void check_disconnection(const VerifyOptions& o, Recorder& rec) {
  // Only signs are read off the grid, so a looser integration tolerance will do.
  Numerics num = numerics_for(o);
  num.ode_tol = 1e-8;
  const FamilyPtr radial = builtin("disc-radial");
  const FamilyPtr product = builtin("disc-product");
  for (std::size_t n : {101u, 201u}) {
    const auto start = std::chrono::steady_clock::now();
    GridSpec grid;
    grid.nx = grid.ny = n;
    const std::string tag = "_" + std::to_string(n);

    const ParameterSpace rs = ParameterSpace::grid2d(grid, {{0.0, 0.0}, {0.99, 0.0}});
    const SignMap rm = sign_map_2d(*radial, rs, num);
    rec.equals("radial_sign_components" + tag, static_cast<double>(rm.sign_components()), 2);
    rec.equals("radial_disconnects" + tag, rm.disconnects ? 1 : 0, 1);
    rec.equals("radial_lambda0_separated" + tag, rm.lambda0_separated ? 1 : 0, 1);

    const ParameterSpace ps = ParameterSpace::grid2d(grid, {{0.0, 0.0}});
    const SignMap pm = sign_map_2d(*product, ps, num);
    const std::vector<BoundaryChange> changes = boundary_trace(pm, ps);
    const auto count = [&](const char* half) {
      return std::count_if(changes.begin(), changes.end(), [&](const BoundaryChange& c) { return c.semicircle == half; });
    };
    rec.at_least("product_boundary_changes" + tag, static_cast<double>(changes.size()), 2);
    rec.at_least("product_upper_changes" + tag, static_cast<double>(count("upper")), 1);
    rec.at_least("product_lower_changes" + tag, static_cast<double>(count("lower")), 1);
    if (n == 101) rec.at_most("runtime_s_101", seconds_since(start), 30.0);
  }
}

// --- 8 ------------------------------------------------------------------------

struct PropertyCase {
  FamilyPtr family;
  ParameterValue lambda;
};

std::vector<PropertyCase> builtin_cases() {
  return {
      {builtin("paper-sec4-BC"), {0.3, 0.0}},   {builtin("paper-sec4-BC"), {2.5, 0.0}},
      {builtin("paper-sec4-exBC"), {1.2, 0.0}}, {builtin("paper-sec4-exBC"), {4.0, 0.0}},
      {builtin("disc-radial"), {0.3, 0.4}},     {builtin("disc-product"), {-0.5, 0.6}},
      {builtin("poschl-teller"), {0.6, 0.0}},   {builtin("poschl-teller"), {1.0, 0.0}},
      {builtin("poschl-teller"), {1.4, 0.0}},   {builtin("constant-saddle"), {0.0, 0.0}},
  };
}

void check_properties(const VerifyOptions& o, Recorder& rec) {
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<PropertyCase> cases = builtin_cases();

  // Cocycle identity, relative to the size of the factors.
  double cocycle = 0.0;
  for (int k = 0; k < 100; ++k) {
    const PropertyCase& c = cases[static_cast<std::size_t>(k) % cases.size()];
    std::array<double, 3> t{-5 + 10 * unit(rng), -5 + 10 * unit(rng), -5 + 10 * unit(rng)};
    std::sort(t.begin(), t.end());
    const Matrix ts = transition(*c.family, c.lambda, t[2], t[1], 1e-12);
    const Matrix sr = transition(*c.family, c.lambda, t[1], t[0], 1e-12);
    const Matrix tr = transition(*c.family, c.lambda, t[2], t[0], 1e-12);
    const double scale = std::max(1.0, spectral_norm(ts) * spectral_norm(sr));
    cocycle = std::max(cocycle, spectral_norm(ts * sr - tr) / scale);
  }
  rec.at_most("cocycle_relative_residual", cocycle, 1e-8);

  // Spectral projectors of random hyperbolic matrices.
  std::normal_distribution<double> normal(0.0, 1.0);
  double idempotence = 0.0, commutation = 0.0, sym_angle = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int d = 2 + k % 5;
    Matrix v = Matrix::Identity(d, d);
    Matrix sym = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        v(i, j) += 0.3 * normal(rng);
        sym(i, j) = normal(rng);
      }
    Vector mu(d);
    for (int i = 0; i < d; ++i) mu(i) = (i % 2 ? -1.0 : 1.0) * (0.5 + 2.5 * unit(rng));
    const Matrix a = v * mu.asDiagonal() * v.inverse();
    const HyperbolicSplitting split = matrix_sign_projector(a);
    const Matrix& p = split.projector;
    idempotence = std::max(idempotence, spectral_norm(p * p - p));
    commutation = std::max(commutation, spectral_norm(p * a - a * p) / spectral_norm(a));

    sym = (0.5 * (sym + sym.transpose())).eval();
    const SpectralDecomposition eig = sym_eig(sym);
    if (eig.eigenvalues.cwiseAbs().minCoeff() < 1e-3) continue;
    sym_angle = std::max(sym_angle, max_principal_angle(matrix_sign_projector(sym).unstable, eig.positive_frame()));
  }
  rec.at_most("projector_idempotence", idempotence, 1e-10);
  rec.at_most("projector_commutation_rel", commutation, 1e-9);
  rec.at_most("sign_vs_sym_eig_angle", sym_angle, 1e-9);

  // Doubling the truncation time leaves the frames in place.
  double t_stability = 0.0;
  Numerics base = numerics_for(o);
  Numerics doubled = base;
  doubled.truncation_time *= 2.0;
  for (const PropertyCase& c : cases) {
    const SubspacePair p1 = subspace_pair(*c.family, c.lambda, base);
    const SubspacePair p2 = subspace_pair(*c.family, c.lambda, doubled);
    t_stability = std::max({t_stability, max_principal_angle(p1.unstable, p2.unstable),
                            max_principal_angle(p1.stable, p2.stable)});
  }
  rec.at_most("t_stability_angle", t_stability, 1e-7);

  // Parity additivity and psi = iota on interval runs.
  int additivity_failures = 0, iota_failures = 0;
  struct Run {
    const char* family;
    double lo, hi;
    std::size_t nodes;
  };
  for (const Run& run : {Run{"paper-sec4-BC", 0.0, pi, 181}, Run{"poschl-teller", 0.5, 1.5, 101}}) {
    const FamilyPtr fam = builtin(run.family);
    const ParameterSpace space = ParameterSpace::interval(run.lo, run.hi, run.nodes, {run.lo, run.hi});
    const FrameField field = frame_field(*fam, space, base);
    const IndexReport report = index_report(*fam, field, base);
    for (const ParityEntry& e : report.parities) {
      if (!e.iota || *e.iota != e.psi) ++iota_failures;
    }
    std::uniform_int_distribution<std::size_t> pick(0, space.size() - 1);
    for (int k = 0; k < 50; ++k) {
      std::array<std::size_t, 3> n{pick(rng), pick(rng), pick(rng)};
      std::sort(n.begin(), n.end());
      const auto usable = [&](std::size_t i) { return report.samples[i].transversal && report.samples[i].sign != 0; };
      if (!usable(n[0]) || !usable(n[1]) || !usable(n[2])) continue;
      const int ab = parity_pair(report, n[0], n[2]);
      if (ab != (parity_pair(report, n[0], n[1]) + parity_pair(report, n[1], n[2])) % 2) ++additivity_failures;
      const int iota = iota_interval(assemble_M(field.pairs[n[0]]), assemble_M(field.pairs[n[2]]), base.zero_tol);
      if (iota != ab) ++iota_failures;
    }
  }
  rec.equals("parity_additivity_failures", additivity_failures, 0);
  rec.equals("psi_iota_mismatches", iota_failures, 0);
}

struct CheckDef {
  const char* name;
  const char* title;
  std::function<void(const VerifyOptions&, Recorder&)> run;
};

const std::vector<CheckDef>& registry() {
  static const std::vector<CheckDef> checks = {
      {"reflection-curve", "Evans curve of the reflection family on [0, pi]", check_reflection_curve},
      {"poschl-teller", "Poschl-Teller Evans function and bifurcation point", check_poschl_teller},
      {"mobius", "Mobius stable bundle over the circle", check_mobius},
      {"transversality", "Kernel at the zero, transversality away from it", check_transversality},
      {"dichotomy-bounds", "Closed-form dichotomy constants on both half-lines", check_dichotomy_bounds},
      {"roughness", "Sign and parity survive perturbations below the roughness threshold", check_roughness},
      {"disconnection", "Sign regions on the disc", check_disconnection},
      {"properties", "Cocycle, projector, truncation, parity and iota properties", check_properties},
  };
  return checks;
}

std::string format_number(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

}  // namespace

std::vector<std::string> check_names() {
  std::vector<std::string> out;
  for (const CheckDef& c : registry()) out.emplace_back(c.name);
  return out;
}

CheckResult run_check(const std::string& name, const VerifyOptions& options) {
  const auto& checks = registry();
  const auto it = std::find_if(checks.begin(), checks.end(), [&](const CheckDef& c) { return name == c.name; });
  if (it == checks.end()) throw std::invalid_argument("unknown check '" + name + "'");

  CheckResult result;
  result.criterion = static_cast<int>(it - checks.begin()) + 1;
  result.name = it->name;
  result.title = it->title;
  Recorder rec(result);
  const auto start = std::chrono::steady_clock::now();
  try {
    it->run(options, rec);
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  result.seconds = seconds_since(start);
  result.passed = result.error.empty() && !result.measurements.empty() &&
                  std::all_of(result.measurements.begin(), result.measurements.end(),
                              [](const Measurement& m) { return m.passed; });
  return result;
}

std::string format_check(const CheckResult& r) {
  std::ostringstream out;
  out << (r.passed ? "PASS" : "FAIL") << " [" << r.criterion << "] " << r.name << ":";
  const char* sep = " ";
  for (const Measurement& m : r.measurements) {
    out << sep << m.label << "=" << format_number(m.value) << " (" << m.relation << " " << format_number(m.bound)
        << (m.passed ? "" : ", FAILED") << ")";
    sep = ", ";
  }
  if (!r.error.empty()) out << sep << "error: " << r.error;
  out << " [" << std::fixed << std::setprecision(2) << r.seconds << " s]";
  return out.str();
}

}  // namespace dichotomy
