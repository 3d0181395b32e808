#include "dichotomy/bifurcation.hpp"
#include "dichotomy/config.hpp"
#include "dichotomy/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace dichotomy;

namespace {

constexpr double pi = std::numbers::pi;

FamilyPtr builtin(const std::string& name) { return build_family(builtin_family_config(name)); }

const Numerics kNumerics{};

// Autonomous saddle with unstable direction e2 and stable direction at angle
// pi/2 - x^2, so L_D = -sin(x^2) touches zero at x = 0 without changing sign.
FamilyPtr touching_family() {
  auto a = [](const ParameterValue& l) {
    const double phi = pi / 2 - l.x * l.x;
    Matrix v(2, 2);
    v << 0.0, std::cos(phi), 1.0, std::sin(phi);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    return Matrix(v * d * v.inverse());
  };
  return std::make_shared<TabulatedFamily>(
      "touching", 2, [a](const ParameterValue& l, double) { return a(l); }, a, a, 0.0);
}

std::vector<int> pattern(const ParameterSpace& s, const std::vector<std::string>& rows) {
  std::vector<int> signs(s.size());
  for (std::size_t u = 0; u < s.size(); ++u) {
    const auto [i, j] = s.cell_of(u);
    const char c = rows[j][i];
    signs[u] = c == '+' ? 1 : (c == '-' ? -1 : 0);
  }
  return signs;
}

ParameterSpace square(std::size_t n) {
  GridSpec g;
  g.nx = g.ny = n;
  g.disc_mask = false;
  return ParameterSpace::grid2d(g, {{-1, -1}});
}

}  // namespace

TEST(LocateZeros, PoschlTellerAtOne) {
  const ParameterSpace s = ParameterSpace::interval(0.5, 1.5, 101, {0.5, 1.5});
  const BifurcationFinding f = locate_zeros_on_path(*builtin("poschl-teller"), s, kNumerics);
  ASSERT_EQ(f.zeros.size(), 1u);
  const LocatedZero& z = f.zeros[0];
  EXPECT_NEAR(z.lambda, 1.0, 1e-6);
  EXPECT_LE(z.hi - z.lo, 1e-8);
  EXPECT_LE(z.residual, kNumerics.zero_tol);
  EXPECT_EQ(z.sign_lo, -z.sign_hi);
  EXPECT_LE(z.margin, 10 * kNumerics.zero_tol);
  EXPECT_GT(z.margin_lo, 10 * kNumerics.zero_tol);
  EXPECT_GT(z.margin_hi, 10 * kNumerics.zero_tol);
  EXPECT_TRUE(f.candidates.empty());
  EXPECT_EQ(f.samples.size(), 101u);
}

TEST(LocateZeros, BisectionHalvesTheBracket) {
  const ParameterSpace s = ParameterSpace::interval(0.5, 1.5, 12, {0.5});
  const BifurcationFinding f = locate_zeros_on_path(*builtin("poschl-teller"), s, kNumerics);
  ASSERT_EQ(f.zeros.size(), 1u);
  const std::vector<double>& w = f.zeros[0].widths;
  ASSERT_GT(w.size(), 20u);
  double previous = 1.0 / 11.0;
  for (double width : w) {
    EXPECT_NEAR(width, 0.5 * previous, 1e-15);
    previous = width;
  }
}

TEST(LocateZeros, ReflectionPairAtQuarterTurn) {
  const ParameterSpace s = ParameterSpace::interval(0, pi, 181, {0, pi});
  const BifurcationFinding f = locate_zeros_on_path(*builtin("paper-sec4-BC"), s, kNumerics);
  ASSERT_EQ(f.zeros.size(), 1u);
  EXPECT_NEAR(f.zeros[0].lambda, pi / 2, 1e-6);
  EXPECT_EQ(f.zeros[0].sign_lo, -1);
  EXPECT_EQ(f.zeros[0].sign_hi, 1);
}

TEST(LocateZeros, TransversalConstantFamilyHasNone) {
  const ParameterSpace s = ParameterSpace::interval(-1, 1, 21, {-1});
  const BifurcationFinding f = locate_zeros_on_path(*builtin("constant-saddle"), s, kNumerics);
  EXPECT_TRUE(f.zeros.empty());
  EXPECT_TRUE(f.candidates.empty());
}

TEST(LocateZeros, TouchingZeroIsOnlyACandidate) {
  Numerics loose = kNumerics;
  loose.zero_tol = 0.05;
  const ParameterSpace s = ParameterSpace::interval(-1, 1, 20, {-1});
  const BifurcationFinding f = locate_zeros_on_path(*touching_family(), s, loose);
  EXPECT_TRUE(f.zeros.empty());
  ASSERT_EQ(f.candidates.size(), 1u);
  EXPECT_LT(std::abs(f.candidates[0].lambda), 0.11);
}

TEST(LocateZeros, NonTransversalEndpointThrows) {
  const ParameterSpace s = ParameterSpace::interval(0, pi / 2, 11, {0});
  EXPECT_THROW(locate_zeros_on_path(*builtin("paper-sec4-BC"), s, kNumerics), ContractViolation);
  EXPECT_THROW(locate_zeros_on_path(*builtin("paper-sec4-BC"), ParameterSpace::circle(8, {0}), kNumerics),
               ContractViolation);
}

TEST(LabelSignMap, FourConnectedRegions) {
  const ParameterSpace s = square(4);
  // rows listed bottom to top
  const SignMap m = label_sign_map(s, pattern(s, {"+-+-", "-+-+", "++--", "0000"}));
  EXPECT_EQ(m.zero_components, 1u);
  EXPECT_EQ(m.zero_nodes.size(), 4u);
  // diagonal neighbours do not join
  EXPECT_EQ(m.positive_components, 4u);
  EXPECT_EQ(m.negative_components, 4u);
  EXPECT_TRUE(m.disconnects);
}

TEST(LabelSignMap, ZeroSetIsEightConnected) {
  const ParameterSpace s = square(3);
  const SignMap m = label_sign_map(s, pattern(s, {"0+-", "+0-", "++0"}));
  EXPECT_EQ(m.zero_components, 1u);
  // the plus between the first two zeros touches the rest only diagonally
  EXPECT_EQ(m.positive_components, 2u);
  EXPECT_EQ(m.negative_components, 1u);
  EXPECT_EQ(m.component[s.lambda0().front()], -1);
}

TEST(LabelSignMap, SingleRegionDoesNotDisconnect) {
  const ParameterSpace s = square(3);
  const SignMap m = label_sign_map(s, pattern(s, {"+++", "+0+", "+++"}));
  EXPECT_EQ(m.sign_components(), 1u);
  EXPECT_FALSE(m.disconnects);
  EXPECT_FALSE(m.lambda0_separated);
}

TEST(LabelSignMap, RejectsWrongInput) {
  const ParameterSpace s = square(3);
  EXPECT_THROW(label_sign_map(s, std::vector<int>(4, 1)), ContractViolation);
  EXPECT_THROW(label_sign_map(ParameterSpace::interval(0, 1, 9, {0}), std::vector<int>(9, 1)), ContractViolation);
}

TEST(BoundaryNodes, CounterClockwiseByAngle) {
  GridSpec g;
  g.nx = g.ny = 21;
  const ParameterSpace s = ParameterSpace::grid2d(g, {{0, 0}});
  const std::vector<std::size_t> b = boundary_nodes(s);
  ASSERT_GT(b.size(), 8u);
  double previous = -pi - 1e-12;
  for (std::size_t u : b) {
    const double angle = std::atan2(s.node(u).y, s.node(u).x);
    EXPECT_GE(angle, previous);
    previous = angle;
    EXPECT_LT(s.neighbors(u).size(), 4u);
  }
}

TEST(SignMap, RadialExampleDisconnects) {
  for (std::size_t n : {41u, 61u}) {
    GridSpec g;
    g.nx = g.ny = n;
    const ParameterSpace s = ParameterSpace::grid2d(g, {{0, 0}, {0.99, 0}});
    const SignMap m = sign_map_2d(*builtin("disc-radial"), s, kNumerics);
    EXPECT_EQ(m.sign_components(), 2u) << n;
    EXPECT_TRUE(m.disconnects) << n;
    EXPECT_TRUE(m.lambda0_separated) << n;
    // sign is -cos(pi (1 - r^2)): positive inside r^2 < 1/2
    for (std::size_t u = 0; u < s.size(); ++u) {
      const double r2 = s.node(u).x * s.node(u).x + s.node(u).y * s.node(u).y;
      if (std::abs(r2 - 0.5) > 0.02) EXPECT_EQ(m.signs[u], r2 < 0.5 ? 1 : -1) << n;
    }
    EXPECT_TRUE(boundary_trace(m, s).empty()) << n;
  }
}

TEST(SignMap, ConstantFamilyIsOneRegion) {
  GridSpec g;
  g.nx = g.ny = 15;
  const ParameterSpace s = ParameterSpace::grid2d(g, {{0, 0}});
  const SignMap m = sign_map_2d(*builtin("constant-saddle"), s, kNumerics);
  EXPECT_EQ(m.sign_components(), 1u);
  EXPECT_FALSE(m.disconnects);
  EXPECT_TRUE(m.zero_nodes.empty());
  EXPECT_TRUE(boundary_trace(m, s).empty());
}

TEST(SignMap, ProductExampleMeetsBothSemicircles) {
  for (std::size_t n : {31u, 61u}) {
    GridSpec g;
    g.nx = g.ny = n;
    const ParameterSpace s = ParameterSpace::grid2d(g, {{0, 0}});
    const SignMap m = sign_map_2d(*builtin("disc-product"), s, kNumerics);
    const std::vector<BoundaryChange> changes = boundary_trace(m, s);
    ASSERT_GE(changes.size(), 2u) << n;
    int upper = 0, lower = 0;
    for (const BoundaryChange& c : changes) {
      upper += c.semicircle == "upper";
      lower += c.semicircle == "lower";
      EXPECT_NE(m.signs[c.from], m.signs[c.to]);
    }
    EXPECT_GE(upper, 1) << n;
    EXPECT_GE(lower, 1) << n;
    EXPECT_TRUE(m.disconnects) << n;
  }
}
