#pragma once

// Small dense real linear algebra used throughout the library. Storage and
// the basic LU/SVD factorizations come from Eigen; the symmetric eigensolver,
// the matrix exponential, Gram-Schmidt and the matrix sign iteration are
// implemented here so their conventions are fixed and reproducible.

#include <Eigen/Dense>

#include <cstddef>

namespace dichotomy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ordered set of column vectors in R^d spanning a subspace.
class Frame {
 public:
  Frame() = default;
  explicit Frame(Matrix columns);

  static Frame from_vector(const Vector& v);

  Eigen::Index dim() const noexcept { return columns_.rows(); }
  Eigen::Index size() const noexcept { return columns_.cols(); }
  bool empty() const noexcept { return columns_.cols() == 0; }

  const Matrix& columns() const noexcept { return columns_; }
  Vector column(Eigen::Index i) const { return columns_.col(i); }

  /// Orthogonal projector onto the span (assumes orthonormal columns).
  Matrix projector() const { return columns_ * columns_.transpose(); }

 private:
  Matrix columns_;
};

struct SpectralDecomposition {
  Vector eigenvalues;  // ascending
  Matrix basis;        // column i belongs to eigenvalues(i)
  Eigen::Index stable_count = 0;

  /// Eigenvectors with negative eigenvalue.
  Frame negative_frame() const;
  /// Eigenvectors with positive eigenvalue.
  Frame positive_frame() const;
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues ascend; each eigenvector has a positive leading entry and
/// numerically equal eigenvalues are ordered by lexicographically largest
/// eigenvector. Throws ContractViolation for non-square or non-symmetric input.
SpectralDecomposition sym_eig(const Matrix& m);

/// Matrix exponential by scaling and squaring with Pade approximants.
Matrix expm(const Matrix& m);

struct QrFactors {
  Frame q;
  Matrix r;  // upper triangular with positive diagonal
};

/// Gram-Schmidt with reorthogonalization: F = Q R.
/// Throws RankCollapseError when a column is dependent on its predecessors.
QrFactors orthonormalize(const Frame& f);

struct SignedDeterminant {
  int sign = 0;  // -1, 0 or +1; 0 when |value| <= zero_tol
  double value = 0.0;
};

SignedDeterminant det_sign(const Matrix& m, double zero_tol);

struct MatrixSign {
  Matrix sign;
  int iterations = 0;
  double residual = 0.0;  // ||S^2 - I||_F at exit
  bool converged = false;
};

/// Matrix sign function by determinant-scaled Newton iteration
/// S <- (S + S^-1)/2. Does not throw; inspect `converged`.
MatrixSign matrix_sign(const Matrix& a, int max_iterations = 100, double step_tol = 1e-12);

double spectral_norm(const Matrix& m);
Vector singular_values(const Matrix& m);
double smallest_singular_value(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-10);

/// Largest principal angle between two subspaces of equal dimension, computed
/// from sines so that tiny angles stay accurate. Frames must be orthonormal.
double max_principal_angle(const Frame& a, const Frame& b);

/// Orthogonal k x k factor Q maximizing trace(reference^T f Q).
Matrix procrustes_factor(const Frame& reference, const Frame& f);

/// Orthonormal basis for the column space of m by column-pivoted Gram-Schmidt;
/// columns whose residual norm falls below rel_tol * max(largest column norm,
/// reference_norm) are treated as dependent.
Frame range_basis(const Matrix& m, double rel_tol = 1e-10, double reference_norm = 0.0);

}  // namespace dichotomy
