#include "dichotomy/model.hpp"

#include "dichotomy/errors.hpp"
#include "dichotomy/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace dichotomy {

namespace {

void require_finite(const ParameterValue& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw ContractViolation("parameter value is not finite");
  }
}

}  // namespace

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::piecewise_scalar: return "piecewise_scalar";
    case FamilyKind::second_order: return "second_order";
    case FamilyKind::asymptotically_hyperbolic_tabulated: return "asymptotically_hyperbolic_tabulated";
    case FamilyKind::perturbed: return "perturbed";
  }
  return "unknown";
}

// --- ScalarProfile ----------------------------------------------------------

ScalarProfile::ScalarProfile(double a_plus, double t0) : a_plus_(a_plus), t0_(t0) {
  if (!(a_plus > 0.0) || !std::isfinite(a_plus)) throw ContractViolation("scalar profile: a_plus must be positive");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw ContractViolation("scalar profile: t0 must be positive");
  const double th = std::tanh(t0);
  amplitude_ = a_plus / (th * th);
}

double ScalarProfile::value(double t) const {
  const double th = std::tanh(t);
  return -amplitude_ * th * th;
}

double ScalarProfile::integral(double s, double t) const {
  // d/dt (t - tanh t) = tanh^2 t
  return -amplitude_ * ((t - std::tanh(t)) - (s - std::tanh(s)));
}

// --- closed-form matrices ---------------------------------------------------

std::string to_string(MatrixForm form) {
  switch (form) {
    case MatrixForm::saddle: return "saddle";
    case MatrixForm::reflection: return "reflection";
    case MatrixForm::reflection_flipped: return "reflection-flipped";
  }
  return "unknown";
}

Matrix evaluate_form(MatrixForm form, double theta) {
  Matrix m(2, 2);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  switch (form) {
    case MatrixForm::saddle: m << -1.0, 0.0, 0.0, 1.0; break;
    case MatrixForm::reflection: m << c, s, s, -c; break;
    case MatrixForm::reflection_flipped: m << c, -s, -s, -c; break;
  }
  return m;
}

Vector form_negative_eigenvector(MatrixForm form, double theta) {
  Vector v(2);
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  switch (form) {
    case MatrixForm::saddle: v << 1.0, 0.0; break;
    case MatrixForm::reflection: v << -s, c; break;
    case MatrixForm::reflection_flipped: v << s, c; break;
  }
  return v;
}

Vector form_positive_eigenvector(MatrixForm form, double theta) {
  Vector v(2);
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  switch (form) {
    case MatrixForm::saddle: v << 0.0, 1.0; break;
    case MatrixForm::reflection: v << c, s; break;
    case MatrixForm::reflection_flipped: v << c, -s; break;
  }
  return v;
}

std::string to_string(AngleMap::Shape shape) {
  switch (shape) {
    case AngleMap::Shape::linear: return "linear";
    case AngleMap::Shape::radial_bump: return "radial-bump";
    case AngleMap::Shape::product: return "product";
  }
  return "unknown";
}

double AngleMap::operator()(const ParameterValue& p) const {
  switch (shape) {
    case Shape::linear: return scale * p.x + offset;
    case Shape::radial_bump: return std::numbers::pi * (1.0 - p.x * p.x - p.y * p.y);
    // theta_1(x) = pi (x + 1) / 2 maps [-1, 1] onto [0, pi]; theta_2(y) = cos y has theta_2(0) = 1.
    case Shape::product: return 0.5 * std::numbers::pi * (p.x + 1.0) * std::cos(p.y);
  }
  return 0.0;
}

// --- CoefficientFamily --------------------------------------------------------

void CoefficientFamily::check_parameter(const ParameterValue& lambda) const { require_finite(lambda); }

Matrix CoefficientFamily::evaluate(const ParameterValue& lambda, double t) const {
  check_parameter(lambda);
  return evaluate_unchecked(lambda, t);
}

// --- PiecewiseScalarFamily ----------------------------------------------------

PiecewiseScalarFamily::PiecewiseScalarFamily(std::string name, ScalarProfile profile, MatrixForm past,
                                             MatrixForm future, AngleMap angle)
    : name_(std::move(name)), profile_(profile), past_(past), future_(future), angle_(angle) {}

void PiecewiseScalarFamily::check_parameter(const ParameterValue& lambda) const {
  require_finite(lambda);
  if (angle_.planar() && lambda.x * lambda.x + lambda.y * lambda.y > 1.0 + 1e-9) {
    std::ostringstream msg;
    msg << name_ << ": parameter (" << lambda.x << ", " << lambda.y << ") lies outside the unit disc";
    throw ContractViolation(msg.str());
  }
}

Matrix PiecewiseScalarFamily::past_matrix(const ParameterValue& lambda) const {
  return evaluate_form(past_, angle_(lambda));
}

Matrix PiecewiseScalarFamily::future_matrix(const ParameterValue& lambda) const {
  return evaluate_form(future_, angle_(lambda));
}

Matrix PiecewiseScalarFamily::evaluate_unchecked(const ParameterValue& lambda, double t) const {
  const double theta = angle_(lambda);
  return profile_.value(t) * evaluate_form(t <= 0.0 ? past_ : future_, theta);
}

AsymptoticData PiecewiseScalarFamily::asymptotics(const ParameterValue& lambda) const {
  check_parameter(lambda);
  return ScalarProfileLimits{past_matrix(lambda), future_matrix(lambda)};
}

std::optional<ClosedFormFrames> PiecewiseScalarFamily::closed_form_frames(const ParameterValue& lambda) const {
  const double theta = angle_(lambda);
  // a < 0, so E^u(0) is the negative eigenspace of B and E^s(0) the positive one of C.
  ClosedFormFrames f;
  f.unstable = form_negative_eigenvector(past_, theta);
  f.stable = form_positive_eigenvector(future_, theta);
  return f;
}

// --- SecondOrderFamily --------------------------------------------------------

SecondOrderFamily::SecondOrderFamily(std::string name, Coefficients coefficients, double asymptotic_time,
                                     std::function<std::optional<ClosedFormFrames>(double)> closed_form)
    : name_(std::move(name)),
      c_(std::move(coefficients)),
      asymptotic_time_(asymptotic_time),
      closed_form_(std::move(closed_form)) {}

void SecondOrderFamily::check_parameter(const ParameterValue& lambda) const {
  require_finite(lambda);
  if (!(lambda.x > 0.0)) {
    std::ostringstream msg;
    msg << name_ << ": lambda = " << lambda.x << " is outside the domain lambda > 0";
    throw ContractViolation(msg.str());
  }
}

Matrix SecondOrderFamily::evaluate_unchecked(const ParameterValue& lambda, double t) const {
  Matrix a(2, 2);
  a << 0.0, 1.0, -c_.q(lambda.x, t), -c_.p(lambda.x, t);
  return a;
}

AsymptoticData SecondOrderFamily::asymptotics(const ParameterValue& lambda) const {
  check_parameter(lambda);
  LimitMatrices limits{Matrix(2, 2), Matrix(2, 2)};
  limits.minus << 0.0, 1.0, -c_.q_minus(lambda.x), -c_.p_minus(lambda.x);
  limits.plus << 0.0, 1.0, -c_.q_plus(lambda.x), -c_.p_plus(lambda.x);
  return limits;
}

std::optional<ClosedFormFrames> SecondOrderFamily::closed_form_frames(const ParameterValue& lambda) const {
  if (!closed_form_) return std::nullopt;
  return closed_form_(lambda.x);
}

FamilyPtr make_poschl_teller(double depth, double asymptotic_time) {
  SecondOrderFamily::Coefficients c;
  c.p = [](double, double) { return 0.0; };
  c.q = [depth](double lambda, double t) {
    const double sech = 1.0 / std::cosh(t);
    return depth * sech * sech - lambda * lambda;
  };
  c.p_minus = c.p_plus = [](double) { return 0.0; };
  c.q_minus = c.q_plus = [](double lambda) { return -lambda * lambda; };

  std::function<std::optional<ClosedFormFrames>(double)> closed;
  if (depth == 2.0) {
    // u_-(l, t) = e^{l t} (l - tanh t), u_+(l, t) = e^{-l t} (l + tanh t), evaluated with u' at t = 0.
    closed = [](double lambda) -> std::optional<ClosedFormFrames> {
      ClosedFormFrames f{Matrix(2, 1), Matrix(2, 1)};
      f.unstable << lambda, lambda * lambda - 1.0;
      f.stable << lambda, 1.0 - lambda * lambda;
      return f;
    };
  }
  return std::make_shared<SecondOrderFamily>("poschl-teller", std::move(c), asymptotic_time, std::move(closed));
}

// --- TabulatedFamily ----------------------------------------------------------

TabulatedFamily::TabulatedFamily(std::string name, int dimension, Evaluator a, LimitEvaluator minus,
                                 LimitEvaluator plus, double asymptotic_time, std::vector<double> breakpoints)
    : name_(std::move(name)),
      dimension_(dimension),
      a_(std::move(a)),
      minus_(std::move(minus)),
      plus_(std::move(plus)),
      asymptotic_time_(asymptotic_time),
      breakpoints_(std::move(breakpoints)) {
  if (dimension_ <= 0) throw ContractViolation("tabulated family: dimension must be positive");
}

Matrix TabulatedFamily::evaluate_unchecked(const ParameterValue& lambda, double t) const { return a_(lambda, t); }

AsymptoticData TabulatedFamily::asymptotics(const ParameterValue& lambda) const {
  check_parameter(lambda);
  return LimitMatrices{minus_(lambda), plus_(lambda)};
}

FamilyPtr make_constant_family(const Matrix& a, std::string name) {
  if (a.rows() != a.cols()) throw ContractViolation("constant family: matrix is not square");
  return std::make_shared<TabulatedFamily>(
      std::move(name), static_cast<int>(a.rows()), [a](const ParameterValue&, double) { return a; },
      [a](const ParameterValue&) { return a; }, [a](const ParameterValue&) { return a; }, 0.0);
}

// --- Perturbation -------------------------------------------------------------

Perturbation::Perturbation(int dimension, double support, double sup_norm, std::uint64_t seed)
    : dimension_(dimension), support_(support), sup_norm_(sup_norm), seed_(seed) {
  if (dimension <= 0) throw ContractViolation("perturbation: dimension must be positive");
  if (!(support > 0.0)) throw ContractViolation("perturbation: support must be positive");
  if (!(sup_norm >= 0.0)) throw ContractViolation("perturbation: sup_norm must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  auto random_matrix = [&] {
    Matrix m(dimension, dimension);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
    return m;
  };
  m0_ = random_matrix();
  m1_ = 0.5 * random_matrix();
  m2_ = 0.5 * random_matrix();
  phase1_ = angle(rng);
  phase2_ = angle(rng);
}

Matrix Perturbation::operator()(const ParameterValue& lambda, double t) const {
  const double u = t / support_;
  if (std::abs(u) >= 1.0 || sup_norm_ == 0.0) return Matrix::Zero(dimension_, dimension_);
  const double bump = std::exp(1.0 - 1.0 / (1.0 - u * u));
  Matrix n = m0_ + std::sin(lambda.x + phase1_) * m1_ + std::cos(lambda.y + phase2_) * m2_;
  const double norm = spectral_norm(n);
  if (norm == 0.0) return Matrix::Zero(dimension_, dimension_);
  return (sup_norm_ * bump / norm) * n;
}

PerturbedFamily::PerturbedFamily(FamilyPtr base, Perturbation perturbation)
    : base_(std::move(base)), perturbation_(std::move(perturbation)) {
  if (!base_) throw ContractViolation("perturbed family: base family is null");
  if (perturbation_.dimension() != base_->dimension()) {
    throw ContractViolation("perturbed family: perturbation dimension differs from the base family");
  }
}

std::string PerturbedFamily::name() const { return base_->name() + "+perturbation"; }

double PerturbedFamily::asymptotic_time() const {
  return std::max(base_->asymptotic_time(), perturbation_.support());
}

Matrix PerturbedFamily::evaluate_unchecked(const ParameterValue& lambda, double t) const {
  return base_->evaluate(lambda, t) + perturbation_(lambda, t);
}

// --- asymptotic splitting -------------------------------------------------------

namespace {

SpectralDecomposition checked_sym_eig(const Matrix& m, double gap_tol, const char* which) {
  SpectralDecomposition eig = sym_eig(m);
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    if (std::abs(eig.eigenvalues(i)) < 10.0 * gap_tol) {
      std::ostringstream msg;
      msg << "non-hyperbolic asymptotics: " << which << " has eigenvalue with real part " << eig.eigenvalues(i);
      throw HyperbolicityLossError(msg.str(), eig.eigenvalues(i));
    }
  }
  return eig;
}

}  // namespace

AsymptoticSeeds asymptotic_splitting_data(const CoefficientFamily& family, const ParameterValue& lambda,
                                          double gap_tol) {
  const AsymptoticData data = family.asymptotics(lambda);
  if (const auto* limits = std::get_if<ScalarProfileLimits>(&data)) {
    // a(t) < 0 away from 0 flips decay: growth of x' = a B x backward in time is
    // along negative eigenvectors of B, decay forward along positive ones of C.
    const SpectralDecomposition past = checked_sym_eig(limits->past, gap_tol, "B");
    const SpectralDecomposition future = checked_sym_eig(limits->future, gap_tol, "C");
    return {future.positive_frame(), past.negative_frame()};
  }
  const auto& limits = std::get<LimitMatrices>(data);
  const HyperbolicSplitting plus = matrix_sign_projector(limits.plus, gap_tol);
  const HyperbolicSplitting minus = matrix_sign_projector(limits.minus, gap_tol);
  return {plus.stable, minus.unstable};
}

AsymptoticStableBundles asymptotic_stable_bundles(const CoefficientFamily& family, const ParameterValue& lambda,
                                                  double gap_tol) {
  const AsymptoticData data = family.asymptotics(lambda);
  if (const auto* limits = std::get_if<ScalarProfileLimits>(&data)) {
    const SpectralDecomposition past = checked_sym_eig(limits->past, gap_tol, "B");
    const SpectralDecomposition future = checked_sym_eig(limits->future, gap_tol, "C");
    return {future.positive_frame(), past.positive_frame()};
  }
  const auto& limits = std::get<LimitMatrices>(data);
  return {matrix_sign_projector(limits.plus, gap_tol).stable, matrix_sign_projector(limits.minus, gap_tol).stable};
}

// --- ParameterSpace -------------------------------------------------------------

std::string to_string(Topology topology) {
  switch (topology) {
    case Topology::interval: return "interval";
    case Topology::circle: return "circle";
    case Topology::grid2d: return "grid2d";
  }
  return "unknown";
}

ParameterSpace ParameterSpace::interval(double lo, double hi, std::size_t nodes, const std::vector<double>& lambda0) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw ValidationError("space.range", "interval needs finite lo < hi");
  }
  if (nodes < 2) throw ValidationError("space.nodes", "interval needs at least 2 nodes");
  if (lambda0.empty()) throw ValidationError("space.lambda0", "Lambda_0 must be non-empty");

  ParameterSpace space;
  space.topology_ = Topology::interval;
  space.nodes_.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    space.nodes_[k].x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(nodes - 1);
  }
  space.nodes_.back().x = hi;
  const double half_step = 0.5 * (hi - lo) / static_cast<double>(nodes - 1);
  for (double v : lambda0) {
    if (!(v >= lo - half_step && v <= hi + half_step)) {
      std::ostringstream msg;
      msg << "value " << v << " lies outside [" << lo << ", " << hi << "]";
      throw ValidationError("space.lambda0", msg.str());
    }
    space.lambda0_.push_back(space.nearest_node({v, 0.0}));
  }
  return space;
}

ParameterSpace ParameterSpace::circle(std::size_t nodes, const std::vector<double>& lambda0_angles) {
  if (nodes < 3) throw ValidationError("space.nodes", "circle needs at least 3 nodes");
  if (lambda0_angles.empty()) throw ValidationError("space.lambda0", "Lambda_0 must be non-empty");
  ParameterSpace space;
  space.topology_ = Topology::circle;
  space.nodes_.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    space.nodes_[k].x = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(nodes);
  }
  for (double a : lambda0_angles) {
    if (!std::isfinite(a)) throw ValidationError("space.lambda0", "angle is not finite");
    space.lambda0_.push_back(space.nearest_node({a, 0.0}));
  }
  return space;
}

ParameterSpace ParameterSpace::grid2d(const GridSpec& grid, const std::vector<ParameterValue>& lambda0) {
  if (grid.nx < 2 || grid.ny < 2) throw ValidationError("space.resolution", "grid needs at least 2x2 cells");
  if (!(grid.x_min < grid.x_max && grid.y_min < grid.y_max)) {
    throw ValidationError("space.x_range", "grid ranges need min < max");
  }
  if (lambda0.empty()) throw ValidationError("space.lambda0", "Lambda_0 must be non-empty");

  ParameterSpace space;
  space.topology_ = Topology::grid2d;
  space.grid_ = grid;
  space.cell_to_node_.assign(grid.nx * grid.ny, -1);
  const double dx = (grid.x_max - grid.x_min) / static_cast<double>(grid.nx - 1);
  const double dy = (grid.y_max - grid.y_min) / static_cast<double>(grid.ny - 1);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double x = i + 1 == grid.nx ? grid.x_max : grid.x_min + dx * static_cast<double>(i);
      const double y = j + 1 == grid.ny ? grid.y_max : grid.y_min + dy * static_cast<double>(j);
      if (grid.disc_mask && x * x + y * y > 1.0 + 1e-12) continue;
      space.cell_to_node_[j * grid.nx + i] = static_cast<std::ptrdiff_t>(space.nodes_.size());
      space.nodes_.push_back({x, y});
      space.cells_.emplace_back(i, j);
    }
  }
  if (space.nodes_.empty()) throw ValidationError("space", "mask removes every grid node");
  for (const auto& p : lambda0) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError("space.lambda0", "point is not finite");
    space.lambda0_.push_back(space.nearest_node(p));
  }
  return space;
}

std::optional<std::size_t> ParameterSpace::node_at(std::ptrdiff_t i, std::ptrdiff_t j) const {
  if (topology_ != Topology::grid2d) return std::nullopt;
  if (i < 0 || j < 0 || i >= static_cast<std::ptrdiff_t>(grid_.nx) || j >= static_cast<std::ptrdiff_t>(grid_.ny)) {
    return std::nullopt;
  }
  const std::ptrdiff_t n = cell_to_node_[static_cast<std::size_t>(j) * grid_.nx + static_cast<std::size_t>(i)];
  if (n < 0) return std::nullopt;
  return static_cast<std::size_t>(n);
}

std::vector<std::size_t> ParameterSpace::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  const std::size_t n = nodes_.size();
  switch (topology_) {
    case Topology::interval:
      if (i > 0) out.push_back(i - 1);
      if (i + 1 < n) out.push_back(i + 1);
      break;
    case Topology::circle:
      out.push_back((i + n - 1) % n);
      out.push_back((i + 1) % n);
      break;
    case Topology::grid2d: {
      const auto [ci, cj] = cells_.at(i);
      const auto si = static_cast<std::ptrdiff_t>(ci);
      const auto sj = static_cast<std::ptrdiff_t>(cj);
      for (const auto& [di, dj] : {std::pair{-1, 0}, std::pair{1, 0}, std::pair{0, -1}, std::pair{0, 1}}) {
        if (auto m = node_at(si + di, sj + dj)) out.push_back(*m);
      }
      break;
    }
  }
  return out;
}

std::vector<ParameterSpace::Edge> ParameterSpace::edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (std::size_t j : neighbors(i)) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t ParameterSpace::nearest_node(const ParameterValue& p) const {
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    double d = 0.0;
    if (topology_ == Topology::circle) {
      d = std::abs(std::remainder(p.x - nodes_[k].x, 2.0 * std::numbers::pi));
    } else {
      d = std::hypot(p.x - nodes_[k].x, p.y - nodes_[k].y);
    }
    if (d < best_distance - 1e-12) {
      best_distance = d;
      best = k;
    }
  }
  return best;
}

}  // namespace dichotomy
