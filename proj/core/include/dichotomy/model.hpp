#pragma once

#include "dichotomy/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dichotomy {

/// A point of the parameter space. Interval and circle spaces use `x` only
/// (circle nodes store the angle); planar grids use both coordinates.
struct ParameterValue {
  double x = 0.0;
  double y = 0.0;
};

enum class FamilyKind { piecewise_scalar, second_order, asymptotically_hyperbolic_tabulated, perturbed };

std::string to_string(FamilyKind kind);

/// Scalar profile a(t) = -c tanh^2(t) with c chosen so that a(t) <= -a_plus for
/// |t| >= t0. Consequently a(0) = 0 and a(t) >= -c everywhere, i.e. a_minus = c.
class ScalarProfile {
 public:
  ScalarProfile(double a_plus, double t0);

  double a_plus() const noexcept { return a_plus_; }
  double a_minus() const noexcept { return amplitude_; }
  double t0() const noexcept { return t0_; }

  double value(double t) const;
  /// Closed form of the integral of a over [s, t].
  double integral(double s, double t) const;

 private:
  double a_plus_;
  double t0_;
  double amplitude_;
};

/// Named closed-form 2x2 symmetric matrix maps theta -> M(theta).
enum class MatrixForm {
  saddle,              // diag(-1, 1), independent of theta
  reflection,          // ((cos, sin), (sin, -cos))
  reflection_flipped,  // ((cos, -sin), (-sin, -cos))
};

std::string to_string(MatrixForm form);
Matrix evaluate_form(MatrixForm form, double theta);
/// Unit eigenvector for eigenvalue -1 (sign fixed by the closed form).
Vector form_negative_eigenvector(MatrixForm form, double theta);
/// Unit eigenvector for eigenvalue +1.
Vector form_positive_eigenvector(MatrixForm form, double theta);

/// Named angle maps from parameter values to theta.
struct AngleMap {
  enum class Shape { linear, radial_bump, product };
  Shape shape = Shape::linear;
  double scale = 1.0;   // linear only
  double offset = 0.0;  // linear only

  double operator()(const ParameterValue& p) const;
  bool planar() const noexcept { return shape != Shape::linear; }
};

std::string to_string(AngleMap::Shape shape);

/// Frames known in closed form, used to report values in the same
/// normalization as hand computations.
struct ClosedFormFrames {
  Matrix unstable;
  Matrix stable;
};

/// Data describing the systems at t -> +-infinity.
struct ScalarProfileLimits {
  Matrix past;    // B: A(t) = a(t) B for t <= 0
  Matrix future;  // C: A(t) = a(t) C for t >= 0
};
struct LimitMatrices {
  Matrix minus;  // limit as t -> -infinity
  Matrix plus;   // limit as t -> +infinity
};
using AsymptoticData = std::variant<ScalarProfileLimits, LimitMatrices>;

/// Parameterized coefficient map (lambda, t) -> A_lambda(t). Immutable.
class CoefficientFamily {
 public:
  virtual ~CoefficientFamily() = default;

  virtual FamilyKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual int dimension() const = 0;

  /// Throws ContractViolation when lambda is outside the family's domain.
  virtual void check_parameter(const ParameterValue& lambda) const;

  /// A_lambda(t); checks the parameter domain.
  Matrix evaluate(const ParameterValue& lambda, double t) const;

  virtual AsymptoticData asymptotics(const ParameterValue& lambda) const = 0;

  /// Time beyond which the asymptotic description is accurate (t0).
  virtual double asymptotic_time() const = 0;

  /// Times where A is only piecewise smooth; integrators restart there.
  virtual std::vector<double> breakpoints() const { return {}; }

  virtual std::optional<ClosedFormFrames> closed_form_frames(const ParameterValue&) const {
    return std::nullopt;
  }

 protected:
  virtual Matrix evaluate_unchecked(const ParameterValue& lambda, double t) const = 0;
};

using FamilyPtr = std::shared_ptr<const CoefficientFamily>;

class PiecewiseScalarFamily final : public CoefficientFamily {
 public:
  PiecewiseScalarFamily(std::string name, ScalarProfile profile, MatrixForm past, MatrixForm future,
                        AngleMap angle);

  FamilyKind kind() const override { return FamilyKind::piecewise_scalar; }
  std::string name() const override { return name_; }
  int dimension() const override { return 2; }
  void check_parameter(const ParameterValue& lambda) const override;
  AsymptoticData asymptotics(const ParameterValue& lambda) const override;
  double asymptotic_time() const override { return profile_.t0(); }
  std::vector<double> breakpoints() const override { return {0.0}; }
  std::optional<ClosedFormFrames> closed_form_frames(const ParameterValue& lambda) const override;

  const ScalarProfile& profile() const noexcept { return profile_; }
  MatrixForm past_form() const noexcept { return past_; }
  MatrixForm future_form() const noexcept { return future_; }
  const AngleMap& angle_map() const noexcept { return angle_; }
  Matrix past_matrix(const ParameterValue& lambda) const;
  Matrix future_matrix(const ParameterValue& lambda) const;

 protected:
  Matrix evaluate_unchecked(const ParameterValue& lambda, double t) const override;

 private:
  std::string name_;
  ScalarProfile profile_;
  MatrixForm past_;
  MatrixForm future_;
  AngleMap angle_;
};

/// u'' + p(lambda,t) u' + q(lambda,t) u = 0 as the companion system
/// x' = ((0, 1), (-q, -p)) x.
class SecondOrderFamily final : public CoefficientFamily {
 public:
  using Coefficient = std::function<double(double lambda, double t)>;
  using Limit = std::function<double(double lambda)>;

  struct Coefficients {
    Coefficient p;
    Coefficient q;
    Limit p_minus, p_plus, q_minus, q_plus;
  };

  SecondOrderFamily(std::string name, Coefficients coefficients, double asymptotic_time,
                    std::function<std::optional<ClosedFormFrames>(double)> closed_form = {});

  FamilyKind kind() const override { return FamilyKind::second_order; }
  std::string name() const override { return name_; }
  int dimension() const override { return 2; }
  void check_parameter(const ParameterValue& lambda) const override;
  AsymptoticData asymptotics(const ParameterValue& lambda) const override;
  double asymptotic_time() const override { return asymptotic_time_; }
  std::optional<ClosedFormFrames> closed_form_frames(const ParameterValue& lambda) const override;

 protected:
  Matrix evaluate_unchecked(const ParameterValue& lambda, double t) const override;

 private:
  std::string name_;
  Coefficients c_;
  double asymptotic_time_;
  std::function<std::optional<ClosedFormFrames>(double)> closed_form_;
};

/// Poschl-Teller family u'' + (depth sech^2 t - lambda^2) u = 0, lambda > 0.
/// Closed-form decaying solutions are attached when depth == 2.
FamilyPtr make_poschl_teller(double depth = 2.0, double asymptotic_time = 3.0);

/// Arbitrary callable A(lambda, t) with its limits at -+infinity.
class TabulatedFamily final : public CoefficientFamily {
 public:
  using Evaluator = std::function<Matrix(const ParameterValue&, double)>;
  using LimitEvaluator = std::function<Matrix(const ParameterValue&)>;

  TabulatedFamily(std::string name, int dimension, Evaluator a, LimitEvaluator minus, LimitEvaluator plus,
                  double asymptotic_time, std::vector<double> breakpoints = {});

  FamilyKind kind() const override { return FamilyKind::asymptotically_hyperbolic_tabulated; }
  std::string name() const override { return name_; }
  int dimension() const override { return dimension_; }
  AsymptoticData asymptotics(const ParameterValue& lambda) const override;
  double asymptotic_time() const override { return asymptotic_time_; }
  std::vector<double> breakpoints() const override { return breakpoints_; }

 protected:
  Matrix evaluate_unchecked(const ParameterValue& lambda, double t) const override;

 private:
  std::string name_;
  int dimension_;
  Evaluator a_;
  LimitEvaluator minus_;
  LimitEvaluator plus_;
  double asymptotic_time_;
  std::vector<double> breakpoints_;
};

/// Autonomous family A_lambda(t) = a for every lambda and t.
FamilyPtr make_constant_family(const Matrix& a, std::string name = "constant");

/// Compactly supported perturbation Q(lambda, t) with operator 2-norm
/// sup_norm * bump(t / support) <= sup_norm, attained at t = 0.
class Perturbation {
 public:
  Perturbation(int dimension, double support, double sup_norm, std::uint64_t seed);

  Matrix operator()(const ParameterValue& lambda, double t) const;

  int dimension() const noexcept { return dimension_; }
  double support() const noexcept { return support_; }
  double sup_norm() const noexcept { return sup_norm_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  int dimension_;
  double support_;
  double sup_norm_;
  std::uint64_t seed_;
  Matrix m0_, m1_, m2_;
  double phase1_ = 0.0;
  double phase2_ = 0.0;
};

class PerturbedFamily final : public CoefficientFamily {
 public:
  PerturbedFamily(FamilyPtr base, Perturbation perturbation);

  FamilyKind kind() const override { return FamilyKind::perturbed; }
  std::string name() const override;
  int dimension() const override { return base_->dimension(); }
  void check_parameter(const ParameterValue& lambda) const override { base_->check_parameter(lambda); }
  /// The perturbation has compact support, so the base family's asymptotics apply.
  AsymptoticData asymptotics(const ParameterValue& lambda) const override { return base_->asymptotics(lambda); }
  double asymptotic_time() const override;
  std::vector<double> breakpoints() const override { return base_->breakpoints(); }

  const CoefficientFamily& base() const noexcept { return *base_; }
  const Perturbation& perturbation() const noexcept { return perturbation_; }

 protected:
  Matrix evaluate_unchecked(const ParameterValue& lambda, double t) const override;

 private:
  FamilyPtr base_;
  Perturbation perturbation_;
};

/// Seeds for shooting: the stable subspace of the +infinity system and the
/// unstable subspace of the -infinity system.
struct AsymptoticSeeds {
  Frame stable_plus;
  Frame unstable_minus;
};

/// Throws HyperbolicityLossError when an asymptotic matrix has spectrum too
/// close to the imaginary axis (|Re mu| < 10 gap_tol).
AsymptoticSeeds asymptotic_splitting_data(const CoefficientFamily& family, const ParameterValue& lambda,
                                          double gap_tol = 1e-8);

/// Stable subspaces of the asymptotic systems at +infinity and -infinity.
struct AsymptoticStableBundles {
  Frame plus;
  Frame minus;
};

AsymptoticStableBundles asymptotic_stable_bundles(const CoefficientFamily& family, const ParameterValue& lambda,
                                                  double gap_tol = 1e-8);

// ---------------------------------------------------------------------------

enum class Topology { interval, circle, grid2d };

std::string to_string(Topology topology);

struct GridSpec {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  std::size_t nx = 101, ny = 101;
  bool disc_mask = true;  // keep nodes with x^2 + y^2 <= 1
};

/// Discretized compact parameter space with its distinguished subset Lambda_0.
class ParameterSpace {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  static ParameterSpace interval(double lo, double hi, std::size_t nodes, const std::vector<double>& lambda0);
  /// `nodes` equally spaced angles in [0, 2 pi); node nodes-1 is adjacent to node 0.
  static ParameterSpace circle(std::size_t nodes, const std::vector<double>& lambda0_angles);
  static ParameterSpace grid2d(const GridSpec& grid, const std::vector<ParameterValue>& lambda0);

  Topology topology() const noexcept { return topology_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const ParameterValue& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<ParameterValue>& nodes() const noexcept { return nodes_; }
  const std::vector<std::size_t>& lambda0() const noexcept { return lambda0_; }

  /// Adjacent nodes in a fixed order (4-neighbourhood on grids).
  std::vector<std::size_t> neighbors(std::size_t i) const;
  std::vector<Edge> edges() const;

  // Planar grid bookkeeping.
  const GridSpec& grid() const noexcept { return grid_; }
  /// Node index at grid cell (i, j) or nullopt when masked out or off-grid.
  std::optional<std::size_t> node_at(std::ptrdiff_t i, std::ptrdiff_t j) const;
  std::pair<std::size_t, std::size_t> cell_of(std::size_t node) const { return cells_.at(node); }

  /// Index of the node closest to p.
  std::size_t nearest_node(const ParameterValue& p) const;

  ParameterSpace() = default;

 private:
  Topology topology_ = Topology::interval;
  std::vector<ParameterValue> nodes_;
  std::vector<std::size_t> lambda0_;
  GridSpec grid_{};
  std::vector<std::ptrdiff_t> cell_to_node_;
  std::vector<std::pair<std::size_t, std::size_t>> cells_;
};

struct Numerics {
  double truncation_time = 12.0;
  double ode_tol = 1e-10;
  double reortho_interval = 1.0;
  double zero_tol = 1e-8;
  double continuity_bound = 0.2;
  double gap_tol = 1e-8;
};

}  // namespace dichotomy
