#include "dichotomy/config.hpp"
#include "dichotomy/errors.hpp"
#include "dichotomy/hyperbolic.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

using namespace dichotomy;

namespace {

constexpr double pi = std::numbers::pi;

FamilyPtr builtin(const std::string& name) { return build_family(builtin_family_config(name)); }

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Frame line(double a, double b) {
  Vector v(2);
  v << a, b;
  return Frame::from_vector(v.normalized());
}

}  // namespace

TEST(SignProjector, DiagonalSaddle) {
  const HyperbolicSplitting s = matrix_sign_projector(mat2(-1, 0, 0, 1));
  EXPECT_LE((s.projector - mat2(0, 0, 0, 1)).norm(), 1e-14);
  EXPECT_EQ(s.unstable.size(), 1);
  EXPECT_EQ(s.stable.size(), 1);
  EXPECT_NEAR(s.spectral_gap, 1.0, 1e-12);
}

TEST(SignProjector, ReflectionRangeIsTheHalfAngleLine) {
  for (double theta : {0.0, 0.6, pi / 2, 2.2, pi}) {
    const HyperbolicSplitting s = matrix_sign_projector(evaluate_form(MatrixForm::reflection, theta));
    EXPECT_LE(max_principal_angle(s.unstable, line(std::cos(theta / 2), std::sin(theta / 2))), 1e-12) << theta;
  }
}

TEST(SignProjector, CompanionMatrixAtOne) {
  const HyperbolicSplitting s = matrix_sign_projector(mat2(0, 1, 1, 0));
  EXPECT_LE(max_principal_angle(s.unstable, line(1, 1)), 1e-12);
  EXPECT_LE(max_principal_angle(s.stable, line(1, -1)), 1e-12);
}

TEST(SignProjector, DefinitenessGivesFullRank) {
  const HyperbolicSplitting pos = matrix_sign_projector(mat2(2, 1, 1, 3));
  EXPECT_EQ(pos.unstable.size(), 2);
  EXPECT_EQ(pos.stable.size(), 0);
  const HyperbolicSplitting neg = matrix_sign_projector(-mat2(2, 1, 1, 3));
  EXPECT_EQ(neg.unstable.size(), 0);
  EXPECT_EQ(neg.stable.size(), 2);
}

TEST(SignProjector, NearImaginarySpectrumThrows) {
  EXPECT_THROW(matrix_sign_projector(mat2(0, -1, 1, 0)), HyperbolicityLossError);
  EXPECT_THROW(matrix_sign_projector(mat2(1e-10, 0, 0, 1)), HyperbolicityLossError);
}

TEST(SignProjector, RandomHyperbolicMatrices) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  for (int k = 0; k < 60; ++k) {
    const int d = 2 + k % 6;
    Matrix v = Matrix::Identity(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) v(i, j) += 0.4 * g(rng);
    Vector mu(d);
    int positive = 0;
    for (int i = 0; i < d; ++i) {
      mu(i) = (g(rng) > 0 ? 1.0 : -1.0) * u(rng);
      positive += mu(i) > 0;
    }
    const Matrix a = v * mu.asDiagonal() * v.inverse();
    const HyperbolicSplitting s = matrix_sign_projector(a);
    const Matrix& p = s.projector;
    EXPECT_LE(spectral_norm(p * p - p), 1e-10);
    EXPECT_LE(spectral_norm(p * a - a * p), 1e-9 * spectral_norm(a));
    EXPECT_EQ(s.unstable.size() + s.stable.size(), d);
    EXPECT_EQ(s.unstable.size(), positive);
    EXPECT_NEAR(s.spectral_gap, mu.cwiseAbs().minCoeff(), 1e-6 * mu.cwiseAbs().minCoeff());
  }
}

TEST(SignProjector, AgreesWithSymmetricEigensolver) {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const int d = 2 + k % 5;
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = g(rng);
    m = (0.5 * (m + m.transpose())).eval();
    const SpectralDecomposition e = sym_eig(m);
    if (e.eigenvalues.cwiseAbs().minCoeff() < 1e-3) continue;
    const HyperbolicSplitting s = matrix_sign_projector(m);
    ASSERT_EQ(s.unstable.size(), e.positive_frame().size());
    if (s.unstable.size() > 0) EXPECT_LE(max_principal_angle(s.unstable, e.positive_frame()), 1e-9);
    if (s.stable.size() > 0) EXPECT_LE(max_principal_angle(s.stable, e.negative_frame()), 1e-9);
  }
}

TEST(SpectralGap, SymmetricAndGeneral) {
  EXPECT_NEAR(spectral_gap(mat2(-3, 0, 0, 2)), 2.0, 1e-12);
  // eigenvalues -0.5 and 4 with a non-normal basis
  const Matrix v = mat2(1, 3, 0, 1);
  EXPECT_NEAR(spectral_gap(v * mat2(-0.5, 0, 0, 4) * v.inverse()), 0.5, 1e-6);
}

TEST(DichotomyConstants, ClosedFormDefaults) {
  const HalfLineEstimates e = dichotomy_constants(*builtin("paper-sec4-BC"), {0.3, 0});
  for (const DichotomyEstimate& h : {e.negative, e.positive}) {
    EXPECT_NEAR(h.k, std::exp(1.0), 1e-12);
    EXPECT_NEAR(h.alpha, 1.0, 1e-12);
    EXPECT_EQ(h.provenance, EstimateProvenance::closed_form);
  }
}

TEST(DichotomyConstants, ClosedFormOtherProfile) {
  const PiecewiseScalarFamily f("steep", ScalarProfile(2.0, 0.5), MatrixForm::saddle, MatrixForm::reflection, {});
  const HalfLineEstimates e = dichotomy_constants(f, {1.0, 0});
  EXPECT_NEAR(e.positive.k, std::exp(1.0), 1e-12);
  EXPECT_NEAR(e.positive.alpha, 2.0, 1e-12);
}

TEST(DichotomyConstants, LimitMatrixKind) {
  const HalfLineEstimates e = dichotomy_constants(*make_constant_family(mat2(-3, 0, 0, 2)), {0, 0});
  EXPECT_NEAR(e.positive.alpha, 2.0, 1e-12);
  EXPECT_GE(e.positive.k, 1.0);
  EXPECT_EQ(e.positive.provenance, EstimateProvenance::eigenbasis_conditioning);

  const HalfLineEstimates pt = dichotomy_constants(*builtin("poschl-teller"), {0.7, 0});
  EXPECT_NEAR(pt.negative.alpha, 0.7, 1e-9);
  EXPECT_GE(pt.negative.k, std::exp(0.7 * 3.0));
}

TEST(DichotomyConstants, PerturbedFamiliesAreUnsupported) {
  const PerturbedFamily p(builtin("paper-sec4-BC"), Perturbation(2, 4.0, 0.1, 1));
  EXPECT_THROW(dichotomy_constants(p, {0.3, 0}), ContractViolation);
}

TEST(RoughnessBound, Arithmetic) {
  EXPECT_DOUBLE_EQ(roughness_bound(1.0, 1.0), 0.25);
  EXPECT_NEAR(roughness_bound(std::exp(1.0), 1.0), 0.033833820809153176, 1e-15);
  EXPECT_DOUBLE_EQ(roughness_bound(2.0, 4.0), 0.25);
  EXPECT_THROW(roughness_bound(0.5, 1.0), ContractViolation);
  EXPECT_THROW(roughness_bound(1.0, 0.0), ContractViolation);
}

TEST(VerifyDichotomy, ClosedFormConstantsHoldOnBothHalfLines) {
  for (const char* name : {"paper-sec4-BC", "paper-sec4-exBC"}) {
    const FamilyPtr f = builtin(name);
    const auto& ps = dynamic_cast<const PiecewiseScalarFamily&>(*f);
    for (double theta : {0.0, 1.0, 2.5}) {
      const ParameterValue l{theta, 0};
      const HalfLineEstimates e = dichotomy_constants(*f, l);
      const double t0 = ps.profile().t0();
      const std::array<double, 4> pos{0.0, t0, 2 * t0, 4 * t0};
      const std::array<double, 4> neg{-4 * t0, -2 * t0, -t0, 0.0};
      const DichotomyCheck plus = verify_dichotomy(*f, l, HalfLine::positive,
                                                   matrix_sign_projector(ps.future_matrix(l)).projector, e.positive.k,
                                                   e.positive.alpha, pos);
      const DichotomyCheck minus = verify_dichotomy(*f, l, HalfLine::negative,
                                                    matrix_sign_projector(ps.past_matrix(l)).projector, e.negative.k,
                                                    e.negative.alpha, neg);
      EXPECT_TRUE(plus.verified()) << name << " " << theta << " " << plus.max_violation();
      EXPECT_TRUE(minus.verified()) << name << " " << theta << " " << minus.max_violation();
      EXPECT_EQ(plus.pairs, 10u);
    }
  }
}

TEST(VerifyDichotomy, AutonomousSaddleIsTight) {
  const FamilyPtr f = make_constant_family(mat2(-1, 0, 0, 1));
  const std::array<double, 4> times{0.0, 1.0, 2.0, 4.0};
  const DichotomyCheck c = verify_dichotomy(*f, {0, 0}, HalfLine::positive, mat2(1, 0, 0, 0), 1.0, 1.0, times);
  EXPECT_TRUE(c.verified(1e-9));
  EXPECT_NEAR(c.max_violation(), 0.0, 1e-9);
  EXPECT_LE(c.invariance_residual, 1e-12);
}

TEST(VerifyDichotomy, DoubledRateIsViolated) {
  const FamilyPtr f = make_constant_family(mat2(-1, 0, 0, 1));
  const std::array<double, 3> times{0.0, 1.0, 2.0};
  const DichotomyCheck c = verify_dichotomy(*f, {0, 0}, HalfLine::positive, mat2(1, 0, 0, 0), 1.0, 2.0, times);
  // ||Phi(2,0) P|| e^{2*2} = e^{-2} e^{4}
  EXPECT_NEAR(c.decay_violation, std::exp(2.0) - 1.0, 1e-7);
  EXPECT_FALSE(c.verified());
}

TEST(VerifyDichotomy, NonInvariantProjectorIsFlagged) {
  const FamilyPtr f = make_constant_family(mat2(-1, 0, 0, 1));
  const std::array<double, 2> times{0.0, 1.0};
  const DichotomyCheck c = verify_dichotomy(*f, {0, 0}, HalfLine::positive, mat2(0.5, 0.5, 0.5, 0.5), 5.0, 0.1, times);
  EXPECT_GT(c.invariance_residual, 1e-2);
}

TEST(VerifyDichotomy, RejectsTimesOffTheHalfLine) {
  const FamilyPtr f = make_constant_family(mat2(-1, 0, 0, 1));
  const std::array<double, 2> times{-1.0, 1.0};
  EXPECT_THROW(verify_dichotomy(*f, {0, 0}, HalfLine::positive, mat2(1, 0, 0, 0), 1.0, 1.0, times), ContractViolation);
  EXPECT_THROW(verify_dichotomy(*f, {0, 0}, HalfLine::negative, mat2(1, 0, 0, 0), 1.0, 1.0, times), ContractViolation);
}
