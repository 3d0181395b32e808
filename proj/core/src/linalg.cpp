#include "dichotomy/linalg.hpp"

#include "dichotomy/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

namespace dichotomy {

Frame::Frame(Matrix columns) : columns_(std::move(columns)) {}

Frame Frame::from_vector(const Vector& v) {
  Matrix m(v.size(), 1);
  m.col(0) = v;
  return Frame(std::move(m));
}

namespace {

Frame select_columns(const Matrix& basis, Eigen::Index first, Eigen::Index count) {
  return Frame(basis.middleCols(first, count));
}

void normalize_leading_sign(Eigen::Ref<Vector> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-14) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

bool lexicographically_greater(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i) - b(i)) > 1e-12) return a(i) > b(i);
  }
  return false;
}

}  // namespace

Frame SpectralDecomposition::negative_frame() const {
  return select_columns(basis, 0, stable_count);
}

Frame SpectralDecomposition::positive_frame() const {
  Eigen::Index zero_or_negative = 0;
  while (zero_or_negative < eigenvalues.size() && eigenvalues(zero_or_negative) <= 0.0) {
    ++zero_or_negative;
  }
  return select_columns(basis, zero_or_negative, eigenvalues.size() - zero_or_negative);
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

SpectralDecomposition sym_eig(const Matrix& m) {
  if (m.rows() != m.cols()) throw ContractViolation("sym_eig: matrix is not square");
  if (!m.allFinite()) throw ContractViolation("sym_eig: non-finite entries");
  if (!is_symmetric(m, 1e-10)) throw ContractViolation("sym_eig: matrix is not symmetric");

  const Eigen::Index n = m.rows();
  Matrix a = 0.5 * (m + m.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < n; ++i) normalize_leading_sign(v.col(i));

  const double tie = 1e-12 * std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    const double di = a(i, i);
    const double dj = a(j, j);
    if (std::abs(di - dj) > tie) return di < dj;
    return lexicographically_greater(v.col(i), v.col(j));
  });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.basis.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    out.basis.col(k) = v.col(src);
    if (a(src, src) < 0.0) ++out.stable_count;
  }
  return out;
}

namespace {

Matrix pade_low(const Matrix& a, const double* b, int degree) {
  const Eigen::Index n = a.rows();
  const Matrix a2 = a * a;
  Matrix u_even = b[1] * Matrix::Identity(n, n);
  Matrix v = b[0] * Matrix::Identity(n, n);
  Matrix power = Matrix::Identity(n, n);
  for (int k = 2; k <= degree; k += 2) {
    power = power * a2;
    v += b[k] * power;
    if (k + 1 <= degree) u_even += b[k + 1] * power;
  }
  const Matrix u = a * u_even;
  return (v - u).partialPivLu().solve(v + u);
}

Matrix pade13(const Matrix& a) {
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Matrix expm(const Matrix& m) {
  if (m.rows() != m.cols()) throw ContractViolation("expm: matrix is not square");
  if (m.size() == 0) return m;

  static constexpr double b3[] = {120.0, 60.0, 12.0, 1.0};
  static constexpr double b5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  static constexpr double b7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
  static constexpr double b9[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                                  2162160.0,     110880.0,     3960.0,       90.0,        1.0};

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 <= 1.495585217958292e-2) return pade_low(m, b3, 3);
  if (norm1 <= 2.539398330063230e-1) return pade_low(m, b5, 5);
  if (norm1 <= 9.504178996162932e-1) return pade_low(m, b7, 7);
  if (norm1 <= 2.097847961257068) return pade_low(m, b9, 9);

  constexpr double theta13 = 5.371920351148152;
  int squarings = 0;
  if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  Matrix r = pade13(m / std::ldexp(1.0, squarings));
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

QrFactors orthonormalize(const Frame& f) {
  const Matrix& a = f.columns();
  const Eigen::Index n = a.rows();
  const Eigen::Index k = a.cols();
  if (k > n) throw RankCollapseError("orthonormalize: more columns than the ambient dimension", 0.0);

  double max_norm = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) max_norm = std::max(max_norm, a.col(j).norm());
  const double threshold = 1e-13 * std::max(1.0, max_norm);

  Matrix q(n, k);
  Matrix r = Matrix::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector v = a.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double c = q.col(i).dot(v);
        r(i, j) += c;
        v -= c * q.col(i);
      }
    }
    const double norm = v.norm();
    if (!(norm > threshold)) {
      const double smin = smallest_singular_value(a);
      std::ostringstream msg;
      msg << "orthonormalize: columns are linearly dependent (smallest singular value " << smin << ")";
      throw RankCollapseError(msg.str(), smin);
    }
    r(j, j) = norm;
    q.col(j) = v / norm;
  }
  return {Frame(std::move(q)), std::move(r)};
}

SignedDeterminant det_sign(const Matrix& m, double zero_tol) {
  if (m.rows() != m.cols()) throw ContractViolation("det_sign: matrix is not square");
  SignedDeterminant out;
  out.value = m.size() == 0 ? 1.0 : m.determinant();
  if (std::abs(out.value) <= zero_tol) {
    out.sign = 0;
  } else {
    out.sign = out.value > 0.0 ? 1 : -1;
  }
  return out;
}

MatrixSign matrix_sign(const Matrix& a, int max_iterations, double step_tol) {
  if (a.rows() != a.cols()) throw ContractViolation("matrix_sign: matrix is not square");
  const Eigen::Index n = a.rows();
  MatrixSign out;
  out.sign = a;
  if (n == 0) {
    out.converged = true;
    return out;
  }

  bool scaling = true;
  double previous_step = std::numeric_limits<double>::infinity();
  for (int k = 0; k < max_iterations; ++k) {
    Eigen::PartialPivLU<Matrix> lu(out.sign);
    const double det = lu.determinant();
    if (!std::isfinite(det) || det == 0.0) break;
    const Matrix inverse = lu.inverse();
    if (!inverse.allFinite()) break;

    double mu = 1.0;
    if (scaling) mu = std::pow(std::abs(det), -1.0 / static_cast<double>(n));
    Matrix next = 0.5 * (mu * out.sign + inverse / mu);
    const double step = (next - out.sign).norm();
    const double size = next.norm();
    out.sign = std::move(next);
    out.iterations = k + 1;

    if (step <= step_tol * size) {
      out.converged = true;
      break;
    }
    if (step <= 1e-2 * size) scaling = false;
    // Rounding floor: quadratic convergence has stopped making progress.
    if (step <= 1e-7 * size && step >= 0.5 * previous_step) {
      out.converged = true;
      break;
    }
    previous_step = step;
  }
  out.residual = (out.sign * out.sign - Matrix::Identity(n, n)).norm();
  if (out.converged && out.residual > 1e-6 * std::max(1.0, out.sign.squaredNorm())) out.converged = false;
  return out;
}

Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

double smallest_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Vector s = singular_values(m);
  return s(s.size() - 1);
}

double max_principal_angle(const Frame& a, const Frame& b) {
  if (a.dim() != b.dim() || a.size() != b.size()) {
    throw ContractViolation("max_principal_angle: frames have different shapes");
  }
  if (a.empty()) return 0.0;
  const Matrix residual = b.columns() - a.columns() * (a.columns().transpose() * b.columns());
  const double s = std::min(1.0, spectral_norm(residual));
  return std::asin(s);
}

Matrix procrustes_factor(const Frame& reference, const Frame& f) {
  if (reference.dim() != f.dim() || reference.size() != f.size()) {
    throw ContractViolation("procrustes_factor: frames have different shapes");
  }
  const Eigen::Index k = f.size();
  if (k == 0) return Matrix(0, 0);
  const Matrix overlap = reference.columns().transpose() * f.columns();
  if (k == 1) {
    Matrix q(1, 1);
    q(0, 0) = overlap(0, 0) < 0.0 ? -1.0 : 1.0;
    return q;
  }
  Eigen::JacobiSVD<Matrix> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV() * svd.matrixU().transpose();
}

Frame range_basis(const Matrix& m, double rel_tol, double reference_norm) {
  const Eigen::Index n = m.rows();
  Matrix work = m;
  std::vector<bool> used(static_cast<std::size_t>(m.cols()), false);
  double max_norm = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) max_norm = std::max(max_norm, m.col(j).norm());

  max_norm = std::max(max_norm, reference_norm);
  std::vector<Vector> basis;
  if (max_norm == 0.0) return Frame(Matrix(n, 0));
  while (static_cast<Eigen::Index>(basis.size()) < std::min(n, m.cols())) {
    Eigen::Index best = -1;
    double best_norm = 0.0;
    for (Eigen::Index j = 0; j < work.cols(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double norm = work.col(j).norm();
      if (norm > best_norm) {
        best_norm = norm;
        best = j;
      }
    }
    if (best < 0 || best_norm <= rel_tol * max_norm) break;
    used[static_cast<std::size_t>(best)] = true;
    Vector q = work.col(best) / best_norm;
    for (const Vector& prev : basis) q -= prev.dot(q) * prev;
    q.normalize();
    for (Eigen::Index j = 0; j < work.cols(); ++j) {
      if (!used[static_cast<std::size_t>(j)]) work.col(j) -= q.dot(work.col(j)) * q;
    }
    basis.push_back(std::move(q));
  }
  Matrix out(n, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = basis[i];
  return Frame(std::move(out));
}

}  // namespace dichotomy
