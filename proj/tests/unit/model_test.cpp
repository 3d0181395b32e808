#include "dichotomy/config.hpp"
#include "dichotomy/errors.hpp"
#include "dichotomy/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace dichotomy;

namespace {

constexpr double pi = std::numbers::pi;

FamilyPtr builtin(const std::string& name) { return build_family(builtin_family_config(name)); }

double angle_between(const Vector& a, const Vector& b) {
  return max_principal_angle(Frame::from_vector(a.normalized()), Frame::from_vector(b.normalized()));
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(ScalarProfile, VanishesAtZeroAndRespectsBounds) {
  for (auto [a_plus, t0] : {std::pair{1.0, 1.0}, {2.0, 0.5}, {0.3, 4.0}}) {
    const ScalarProfile a(a_plus, t0);
    EXPECT_EQ(a.value(0.0), 0.0);
    for (int k = 0; k <= 1000; ++k) {
      const double t = t0 + 20.0 * k / 1000.0;
      for (double s : {t, -t}) {
        EXPECT_LE(a.value(s), -a.a_plus() + 1e-15);
        EXPECT_GE(a.value(s), -a.a_minus());
      }
    }
    EXPECT_NEAR(a.value(t0), -a_plus, 1e-14);
  }
}

TEST(ScalarProfile, IntegralMatchesQuadrature) {
  const ScalarProfile a(1.5, 0.8);
  for (auto [s, t] : {std::pair{0.0, 1.0}, {-2.0, 3.0}, {4.0, -1.0}}) {
    // composite Simpson
    const int n = 2000;
    const double h = (t - s) / n;
    double sum = a.value(s) + a.value(t);
    for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * a.value(s + k * h);
    EXPECT_NEAR(a.integral(s, t), sum * h / 3.0, 1e-10);
  }
}

TEST(ScalarProfile, RejectsNonPositiveData) {
  EXPECT_THROW(ScalarProfile(0.0, 1.0), ContractViolation);
  EXPECT_THROW(ScalarProfile(1.0, -1.0), ContractViolation);
}

TEST(MatrixForms, SymmetricInvolutionsWithStatedEigenvectors) {
  for (MatrixForm f : {MatrixForm::saddle, MatrixForm::reflection, MatrixForm::reflection_flipped}) {
    for (double theta : {0.0, 0.4, pi / 2, 2.0, pi, 5.5}) {
      const Matrix m = evaluate_form(f, theta);
      EXPECT_TRUE(is_symmetric(m));
      EXPECT_LE((m * m - Matrix::Identity(2, 2)).norm(), 1e-14);
      const Vector n = form_negative_eigenvector(f, theta);
      const Vector p = form_positive_eigenvector(f, theta);
      EXPECT_LE((m * n + n).norm(), 1e-14);
      EXPECT_LE((m * p - p).norm(), 1e-14);
      EXPECT_NEAR(n.norm(), 1.0, 1e-15);
    }
  }
}

TEST(MatrixForms, HalfAngleEigenvectors) {
  const double t = 1.1;
  EXPECT_LE(angle_between(form_positive_eigenvector(MatrixForm::reflection, t), vec2(std::cos(t / 2), std::sin(t / 2))),
            1e-14);
  EXPECT_LE(angle_between(form_negative_eigenvector(MatrixForm::reflection_flipped, t),
                          vec2(std::sin(t / 2), std::cos(t / 2))),
            1e-14);
}

TEST(AngleMaps, NamedShapes) {
  AngleMap lin;
  lin.scale = 2.0;
  lin.offset = 0.5;
  EXPECT_DOUBLE_EQ(lin({1.0, 0.0}), 2.5);
  EXPECT_FALSE(lin.planar());

  AngleMap radial{AngleMap::Shape::radial_bump};
  EXPECT_DOUBLE_EQ(radial({0.0, 0.0}), pi);
  EXPECT_NEAR(radial({std::sqrt(0.5), 0.0}), pi / 2, 1e-14);
  EXPECT_NEAR(radial({0.0, 1.0}), 0.0, 1e-15);
  EXPECT_TRUE(radial.planar());

  AngleMap product{AngleMap::Shape::product};
  EXPECT_NEAR(product({-1.0, 0.0}), 0.0, 1e-15);
  EXPECT_NEAR(product({1.0, 0.0}), pi, 1e-15);
  EXPECT_NEAR(product({0.0, 0.0}), pi / 2, 1e-15);
}

TEST(Evaluate, PiecewiseScalarVanishesAtZero) {
  for (const char* name : {"paper-sec4-BC", "paper-sec4-exBC"}) {
    const FamilyPtr f = builtin(name);
    for (double theta : {0.0, 1.0, pi}) EXPECT_EQ(f->evaluate({theta, 0.0}, 0.0), Matrix::Zero(2, 2));
  }
}

TEST(Evaluate, PiecewiseScalarUsesPastAndFutureMatrices) {
  const FamilyPtr f = builtin("paper-sec4-exBC");
  const auto& ps = dynamic_cast<const PiecewiseScalarFamily&>(*f);
  const double theta = 0.7;
  const double t = 2.5;
  EXPECT_LE((f->evaluate({theta, 0}, -t) - ps.profile().value(-t) * evaluate_form(MatrixForm::saddle, theta)).norm(),
            1e-15);
  EXPECT_LE(
      (f->evaluate({theta, 0}, t) - ps.profile().value(t) * evaluate_form(MatrixForm::reflection, theta)).norm(),
      1e-15);
}

TEST(Evaluate, PoschlTellerCompanionMatrix) {
  const FamilyPtr f = builtin("poschl-teller");
  const Matrix a = f->evaluate({1.0, 0.0}, 0.0);
  Matrix expected(2, 2);
  expected << 0, 1, -1, 0;
  EXPECT_LE((a - expected).norm(), 1e-15);
}

TEST(Evaluate, PoschlTellerDomain) {
  const FamilyPtr f = builtin("poschl-teller");
  EXPECT_THROW(f->evaluate({0.0, 0.0}, 0.0), ContractViolation);
  EXPECT_THROW(f->evaluate({-1.0, 0.0}, 0.0), ContractViolation);
  EXPECT_THROW(f->evaluate({std::nan(""), 0.0}, 0.0), ContractViolation);
}

TEST(Evaluate, DiscFamiliesRejectPointsOutsideTheDisc) {
  const FamilyPtr f = builtin("disc-radial");
  EXPECT_NO_THROW(f->evaluate({0.6, 0.8}, 1.0));
  EXPECT_THROW(f->evaluate({0.9, 0.9}, 1.0), ContractViolation);
}

TEST(Evaluate, ZeroPerturbationEqualsBase) {
  const FamilyPtr base = builtin("paper-sec4-BC");
  const PerturbedFamily p(base, Perturbation(2, 4.0, 0.0, 99));
  for (double t : {-3.0, -0.2, 0.0, 1.5, 7.0}) {
    EXPECT_EQ(p.evaluate({0.9, 0}, t), base->evaluate({0.9, 0}, t));
  }
}

TEST(Perturbation, CompactSupportAndSupNorm) {
  const Perturbation q(3, 2.0, 0.25, 5);
  EXPECT_EQ(q({0.3, 0.1}, 2.0), Matrix::Zero(3, 3));
  EXPECT_EQ(q({0.3, 0.1}, -2.5), Matrix::Zero(3, 3));
  EXPECT_NEAR(spectral_norm(q({0.3, 0.1}, 0.0)), 0.25, 1e-14);
  for (int k = -50; k <= 50; ++k) EXPECT_LE(spectral_norm(q({1.0, -0.4}, 0.05 * k)), 0.25 + 1e-14);
}

TEST(Perturbation, SeedDeterminesTheField) {
  const Perturbation a(2, 4.0, 0.1, 1), b(2, 4.0, 0.1, 1), c(2, 4.0, 0.1, 2);
  EXPECT_EQ(a({0.2, 0}, 0.7), b({0.2, 0}, 0.7));
  EXPECT_NE(a({0.2, 0}, 0.7), c({0.2, 0}, 0.7));
}

TEST(SecondOrder, ClosedFormSolutionsSatisfyTheFirstOrderSystem) {
  // u+(l,t) = e^{-lt}(l + tanh t) and u-(l,t) = e^{lt}(l - tanh t) solve u'' = (l^2 - 2 sech^2) u.
  const FamilyPtr f = builtin("poschl-teller");
  for (double l : {0.5, 1.0, 1.3}) {
    for (double t : {-2.0, -0.3, 0.0, 0.9, 3.0}) {
      const double sech2 = 1.0 / (std::cosh(t) * std::cosh(t));
      const double th = std::tanh(t);
      for (int side : {1, -1}) {
        const double e = std::exp(-side * l * t);
        const double u = e * (l + side * th);
        const double du = -side * l * u + side * e * sech2;
        const double ddu = -side * l * du + side * e * (-side * l * sech2 - 2.0 * sech2 * th);
        const Vector rhs = f->evaluate({l, 0}, t) * vec2(u, du);
        EXPECT_NEAR(rhs(0), du, 1e-13 * std::max(1.0, std::abs(du)));
        EXPECT_NEAR(rhs(1), ddu, 1e-12 * std::max(1.0, std::abs(ddu)));
      }
    }
  }
}

TEST(SplittingData, SaddlePastFamily) {
  const FamilyPtr f = builtin("paper-sec4-exBC");
  for (double theta : {0.0, 1.0, pi / 2, 3.0}) {
    const AsymptoticSeeds s = asymptotic_splitting_data(*f, {theta, 0});
    EXPECT_LE(max_principal_angle(s.unstable_minus, Frame::from_vector(vec2(1, 0))), 1e-14);
    EXPECT_LE(max_principal_angle(s.stable_plus, Frame::from_vector(vec2(std::cos(theta / 2), std::sin(theta / 2)))),
              1e-12);
  }
}

TEST(SplittingData, PoschlTellerAtOne) {
  const AsymptoticSeeds s = asymptotic_splitting_data(*builtin("poschl-teller"), {1.0, 0});
  EXPECT_LE(max_principal_angle(s.stable_plus, Frame::from_vector(vec2(1, -1).normalized())), 1e-12);
  EXPECT_LE(max_principal_angle(s.unstable_minus, Frame::from_vector(vec2(1, 1).normalized())), 1e-12);
}

TEST(SplittingData, NonHyperbolicLimitThrows) {
  Matrix rot(2, 2);
  rot << 0, -1, 1, 0;
  try {
    asymptotic_splitting_data(*make_constant_family(rot), {0, 0});
    FAIL() << "expected HyperbolicityLossError";
  } catch (const HyperbolicityLossError& e) {
    // limit-matrix kinds report the stagnation residual of the sign iteration
    EXPECT_GT(e.residual(), 0.1);
  }
  EXPECT_THROW(asymptotic_splitting_data(*make_constant_family(Matrix::Identity(2, 2) * 1e-9), {0, 0}),
               HyperbolicityLossError);
}

TEST(StableBundles, PiecewiseScalarUsesPositiveEigenvectors) {
  const FamilyPtr f = builtin("paper-sec4-exBC");
  const AsymptoticStableBundles b = asymptotic_stable_bundles(*f, {2.0, 0});
  EXPECT_LE(max_principal_angle(b.plus, Frame::from_vector(vec2(std::cos(1.0), std::sin(1.0)))), 1e-12);
  EXPECT_LE(max_principal_angle(b.minus, Frame::from_vector(vec2(0, 1))), 1e-14);
}

TEST(ParameterSpace, IntervalNodesAndSnapping) {
  const ParameterSpace s = ParameterSpace::interval(0.0, pi, 181, {0.0, pi, 1.0});
  EXPECT_EQ(s.size(), 181u);
  EXPECT_EQ(s.node(180).x, pi);
  ASSERT_EQ(s.lambda0().size(), 3u);
  EXPECT_EQ(s.lambda0()[0], 0u);
  EXPECT_EQ(s.lambda0()[1], 180u);
  EXPECT_NEAR(s.node(s.lambda0()[2]).x, 1.0, 0.5 * pi / 180);
  EXPECT_EQ(s.edges().size(), 180u);
  EXPECT_EQ(s.neighbors(0).size(), 1u);
  EXPECT_EQ(s.neighbors(5).size(), 2u);
}

TEST(ParameterSpace, IntervalValidation) {
  EXPECT_THROW(ParameterSpace::interval(1.0, 0.0, 10, {0.5}), ValidationError);
  EXPECT_THROW(ParameterSpace::interval(0.0, 1.0, 1, {0.5}), ValidationError);
  EXPECT_THROW(ParameterSpace::interval(0.0, 1.0, 10, {}), ValidationError);
  EXPECT_THROW(ParameterSpace::interval(0.0, 1.0, 10, {2.0}), ValidationError);
}

TEST(ParameterSpace, CircleClosesUp) {
  const ParameterSpace s = ParameterSpace::circle(360, {pi});
  EXPECT_EQ(s.edges().size(), 360u);
  EXPECT_EQ(s.lambda0().front(), 180u);
  const auto n0 = s.neighbors(0);
  EXPECT_NE(std::find(n0.begin(), n0.end(), 359u), n0.end());
  EXPECT_THROW(ParameterSpace::circle(2, {0.0}), ValidationError);
}

TEST(ParameterSpace, DiscGridMaskAndNeighbours) {
  GridSpec g;
  g.nx = g.ny = 21;
  const ParameterSpace s = ParameterSpace::grid2d(g, {{0.0, 0.0}});
  for (const ParameterValue& p : s.nodes()) EXPECT_LE(p.x * p.x + p.y * p.y, 1.0 + 1e-12);
  const std::size_t centre = s.lambda0().front();
  EXPECT_EQ(s.node(centre).x, 0.0);
  EXPECT_EQ(s.neighbors(centre).size(), 4u);
  EXPECT_FALSE(s.node_at(0, 0).has_value());
  EXPECT_FALSE(s.node_at(-1, 10).has_value());
  for (std::size_t u = 0; u < s.size(); ++u) {
    const auto [i, j] = s.cell_of(u);
    EXPECT_EQ(s.node_at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)), u);
  }
  // every edge is symmetric and unique
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto [a, b] : s.edges()) {
    EXPECT_TRUE(seen.insert({std::min(a, b), std::max(a, b)}).second);
  }
}

TEST(ParameterSpace, UnmaskedGridHasAllCells) {
  GridSpec g;
  g.nx = 5;
  g.ny = 4;
  g.disc_mask = false;
  EXPECT_EQ(ParameterSpace::grid2d(g, {{0, 0}}).size(), 20u);
}
