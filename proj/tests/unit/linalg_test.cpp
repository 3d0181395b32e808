#include "dichotomy/errors.hpp"
#include "dichotomy/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace dichotomy;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix random_matrix(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  return m * (scale / spectral_norm(m));
}

}  // namespace

TEST(SymEig, SaddleIsAlreadyDiagonal) {
  const SpectralDecomposition e = sym_eig(mat2(-1, 0, 0, 1));
  EXPECT_DOUBLE_EQ(e.eigenvalues(0), -1.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues(1), 1.0);
  EXPECT_NEAR(e.basis(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(e.basis(1, 1), 1.0, 1e-15);
  EXPECT_EQ(e.stable_count, 1);
}

TEST(SymEig, IdentityHasDoubleEigenvalue) {
  const SpectralDecomposition e = sym_eig(Matrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(e.eigenvalues(0), 1.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues(1), 1.0);
  // ties: lexicographically largest vector first
  EXPECT_NEAR(e.basis(0, 0), 1.0, 1e-15);
  EXPECT_EQ(e.stable_count, 0);
}

TEST(SymEig, ReflectionAtQuarterTurn) {
  const double t = std::numbers::pi / 2;
  const SpectralDecomposition e = sym_eig(mat2(std::cos(t), std::sin(t), std::sin(t), -std::cos(t)));
  EXPECT_NEAR(e.eigenvalues(1), 1.0, 1e-14);
  EXPECT_NEAR(e.basis(0, 1), std::cos(std::numbers::pi / 4), 1e-14);
  EXPECT_NEAR(e.basis(1, 1), std::sin(std::numbers::pi / 4), 1e-14);
}

TEST(SymEig, RejectsNonSymmetric) {
  EXPECT_THROW(sym_eig(mat2(1, 2, 0, 1)), ContractViolation);
  EXPECT_THROW(sym_eig(Matrix::Zero(2, 3)), ContractViolation);
}

TEST(SymEig, ReconstructsRandomSymmetric) {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 12; ++n) {
    Matrix m = random_matrix(rng, n, 3.0);
    m = (0.5 * (m + m.transpose())).eval();
    const SpectralDecomposition e = sym_eig(m);
    const Matrix& v = e.basis;
    EXPECT_LE((v.transpose() * v - Matrix::Identity(n, n)).norm(), 1e-12);
    EXPECT_LE((v * e.eigenvalues.asDiagonal() * v.transpose() - m).norm(), 1e-10 * spectral_norm(m));
    for (int i = 0; i + 1 < n; ++i) EXPECT_LE(e.eigenvalues(i), e.eigenvalues(i + 1));
    for (int i = 0; i < n; ++i) {
      EXPECT_LE((m * v.col(i) - e.eigenvalues(i) * v.col(i)).norm(), 1e-10 * spectral_norm(m));
      Eigen::Index lead = 0;
      while (lead < n && std::abs(v(lead, i)) < 1e-14) ++lead;
      ASSERT_LT(lead, n);
      EXPECT_GT(v(lead, i), 0.0);
    }
  }
}

TEST(SymEig, DeterministicAcrossCalls) {
  std::mt19937_64 rng(11);
  Matrix m = random_matrix(rng, 6, 1.0);
  m = (m + m.transpose()).eval();
  const SpectralDecomposition a = sym_eig(m);
  const SpectralDecomposition b = sym_eig(m);
  EXPECT_EQ(a.basis, b.basis);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
}

TEST(Expm, ZeroGivesIdentity) { EXPECT_EQ(expm(Matrix::Zero(3, 3)), Matrix::Identity(3, 3)); }

TEST(Expm, Diagonal) {
  const Matrix e = expm(mat2(1, 0, 0, -2));
  EXPECT_NEAR(e(0, 0), std::exp(1.0), 1e-15 * std::exp(1.0));
  EXPECT_NEAR(e(1, 1), std::exp(-2.0), 1e-15);
  EXPECT_EQ(e(0, 1), 0.0);
}

TEST(Expm, ScaledSaddle) {
  const Matrix e = expm(-0.5 * mat2(-1, 0, 0, 1));
  EXPECT_NEAR(e(0, 0), std::exp(0.5), 1e-14);
  EXPECT_NEAR(e(1, 1), std::exp(-0.5), 1e-14);
}

TEST(Expm, RotationGenerator) {
  // exp of t * [[0,-1],[1,0]] is a rotation by t
  for (double t : {0.1, 1.0, 3.0, 20.0}) {
    const Matrix e = expm(mat2(0, -t, t, 0));
    EXPECT_NEAR(e(0, 0), std::cos(t), 1e-12);
    EXPECT_NEAR(e(1, 0), std::sin(t), 1e-12);
  }
}

TEST(Expm, NilpotentIsExact) {
  Matrix n = Matrix::Zero(3, 3);
  n(0, 1) = 2.0;
  n(1, 2) = 3.0;
  const Matrix expected = Matrix::Identity(3, 3) + n + 0.5 * n * n;
  EXPECT_LE((expm(n) - expected).norm(), 1e-14);
}

TEST(Expm, InverseProperty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int k = 0; k < 40; ++k) {
    const Matrix m = random_matrix(rng, 2 + k % 6, u(rng));
    const int n = static_cast<int>(m.rows());
    EXPECT_LE((expm(m) * expm(-m) - Matrix::Identity(n, n)).norm(), 1e-10);
  }
}

TEST(Expm, LargeNormAgainstEigenOracle) {
  // symmetric input: exp via eigen decomposition
  std::mt19937_64 rng(5);
  Matrix m = random_matrix(rng, 4, 1.0);
  m = (0.5 * (m + m.transpose())).eval();
  m *= 40.0 / spectral_norm(m);
  const SpectralDecomposition e = sym_eig(m);
  const Matrix oracle = e.basis * e.eigenvalues.array().exp().matrix().asDiagonal() * e.basis.transpose();
  EXPECT_LE((expm(m) - oracle).norm() / oracle.norm(), 1e-12);
}

TEST(Orthonormalize, OrthonormalInputIsUnchanged) {
  const QrFactors qr = orthonormalize(Frame(Matrix::Identity(3, 2)));
  EXPECT_LE((qr.q.columns() - Matrix::Identity(3, 2)).norm(), 1e-15);
  EXPECT_LE((qr.r - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(Orthonormalize, SingleColumn) {
  Vector v(2);
  v << 3, 4;
  const QrFactors qr = orthonormalize(Frame::from_vector(v));
  EXPECT_NEAR(qr.q.columns()(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(qr.q.columns()(1, 0), 0.8, 1e-15);
  EXPECT_NEAR(qr.r(0, 0), 5.0, 1e-15);
}

TEST(Orthonormalize, HandComputedPair) {
  const QrFactors qr = orthonormalize(Frame(mat2(1, 1, 0, 1)));
  EXPECT_LE((qr.q.columns() - Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LE((qr.r - mat2(1, 1, 0, 1)).norm(), 1e-15);
}

TEST(Orthonormalize, DependentColumnsThrowWithSingularValue) {
  try {
    orthonormalize(Frame(mat2(1, 2, 1, 2)));
    FAIL() << "expected RankCollapseError";
  } catch (const RankCollapseError& e) {
    EXPECT_LT(e.smallest_singular_value(), 1e-13);
  }
}

TEST(Orthonormalize, RandomFramesFactorExactly) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const int d = 2 + k % 8;
    const int cols = 1 + k % d;
    Matrix f(d, cols);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < cols; ++j) f(i, j) = g(rng);
    const QrFactors qr = orthonormalize(Frame(f));
    EXPECT_LE((qr.q.columns().transpose() * qr.q.columns() - Matrix::Identity(cols, cols)).norm(), 1e-12);
    EXPECT_LE((qr.q.columns() * qr.r - f).norm(), 1e-12 * spectral_norm(f));
    for (int i = 0; i < cols; ++i) EXPECT_GT(qr.r(i, i), 0.0);
    for (int i = 0; i < cols; ++i)
      for (int j = 0; j < i; ++j) EXPECT_EQ(qr.r(i, j), 0.0);
    if (cols == d) {
      EXPECT_NEAR(qr.q.columns().determinant() * qr.r.determinant(), f.determinant(),
                  1e-12 * std::max(1.0, std::abs(f.determinant())));
    }
  }
}

TEST(DetSign, Basics) {
  EXPECT_EQ(det_sign(Matrix::Identity(4, 4), 1e-8).sign, 1);
  Matrix d = Matrix::Identity(3, 3);
  d(0, 0) = -1;
  EXPECT_EQ(det_sign(d, 1e-8).sign, -1);
}

TEST(DetSign, QuarterTurnMatrixIsZeroAtTolerance) {
  // columns (sin t/2, cos t/2), (cos t/2, sin t/2) at t = pi/2
  const double h = std::numbers::pi / 4;
  const SignedDeterminant s = det_sign(mat2(std::sin(h), std::cos(h), std::cos(h), std::sin(h)), 1e-8);
  EXPECT_EQ(s.sign, 0);
  EXPECT_NEAR(s.value, 0.0, 1e-15);
}

TEST(DetSign, ThresholdIsInclusive) {
  EXPECT_EQ(det_sign(mat2(1e-8, 0, 0, 1), 1e-8).sign, 0);
  EXPECT_EQ(det_sign(mat2(2e-8, 0, 0, 1), 1e-8).sign, 1);
}

TEST(MatrixSign, DiagonalAndConvergence) {
  const MatrixSign s = matrix_sign(mat2(-3, 0, 0, 0.5));
  EXPECT_TRUE(s.converged);
  EXPECT_LE((s.sign - mat2(-1, 0, 0, 1)).norm(), 1e-12);
}

TEST(MatrixSign, ImaginarySpectrumDoesNotConverge) {
  const MatrixSign s = matrix_sign(mat2(0, -1, 1, 0));
  EXPECT_FALSE(s.converged);
}

TEST(Norms, SpectralAndSingularValues) {
  EXPECT_NEAR(spectral_norm(mat2(3, 0, 0, -4)), 4.0, 1e-14);
  EXPECT_NEAR(smallest_singular_value(mat2(3, 0, 0, -4)), 3.0, 1e-14);
  EXPECT_EQ(singular_values(mat2(3, 0, 0, -4)).size(), 2);
}

TEST(IsSymmetric, RelativeTolerance) {
  EXPECT_TRUE(is_symmetric(mat2(1, 2, 2 + 1e-12, 1)));
  EXPECT_FALSE(is_symmetric(mat2(1, 2, 2.1, 1)));
  EXPECT_FALSE(is_symmetric(Matrix::Zero(2, 3)));
}

TEST(PrincipalAngle, KnownAngles) {
  Vector a(2), b(2);
  a << 1, 0;
  for (double t : {0.0, 1e-9, 0.3, 1.2, std::numbers::pi / 2}) {
    b << std::cos(t), std::sin(t);
    EXPECT_NEAR(max_principal_angle(Frame::from_vector(a), Frame::from_vector(b)), t, 1e-15 + 1e-12 * t);
  }
  // subspaces, not vectors
  b << -1, 0;
  EXPECT_NEAR(max_principal_angle(Frame::from_vector(a), Frame::from_vector(b)), 0.0, 1e-15);
}

TEST(Procrustes, UndoesRotation) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    const Matrix q = orthonormalize(Frame(random_matrix(rng, 4, 1.0))).q.columns();
    const Frame ref(q.leftCols(2));
    const double t = 0.7 * k;
    const Matrix rot = mat2(std::cos(t), -std::sin(t), std::sin(t), std::cos(t));
    const Frame f(ref.columns() * rot);
    const Matrix factor = procrustes_factor(ref, f);
    EXPECT_LE((f.columns() * factor - ref.columns()).norm(), 1e-12);
    EXPECT_LE((factor.transpose() * factor - Matrix::Identity(2, 2)).norm(), 1e-12);
  }
}

TEST(Procrustes, SingleColumnSignFlip) {
  Vector a(2);
  a << 0.6, 0.8;
  const Matrix factor = procrustes_factor(Frame::from_vector(a), Frame::from_vector(-a));
  EXPECT_NEAR(factor(0, 0), -1.0, 1e-15);
}

TEST(RangeBasis, RankOfProjectors) {
  EXPECT_EQ(range_basis(mat2(1, 0, 0, 0)).size(), 1);
  EXPECT_EQ(range_basis(Matrix::Zero(3, 3)).size(), 0);
  EXPECT_EQ(range_basis(Matrix::Identity(3, 3)).size(), 3);
}

TEST(RangeBasis, NoiseBelowReferenceScaleHasRankZero) {
  const Matrix noise = mat2(0, -6.8e-49, 0, 0);
  EXPECT_EQ(range_basis(noise, 1e-10).size(), 1);
  EXPECT_EQ(range_basis(noise, 1e-10, 1.0).size(), 0);
}
