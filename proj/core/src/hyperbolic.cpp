#include "dichotomy/hyperbolic.hpp"

#include "dichotomy/errors.hpp"
#include "dichotomy/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dichotomy {

namespace {

// Smallest real part of the spectrum of a matrix whose spectrum lies in Re > 0.
double min_real_part(const Matrix& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return std::numeric_limits<double>::infinity();
  if (n == 1) return a(0, 0);
  if (n == 2) {
    const double half_trace = 0.5 * (a(0, 0) + a(1, 1));
    const double disc = half_trace * half_trace - a.determinant();
    return disc > 0.0 ? half_trace - std::sqrt(disc) : half_trace;
  }
  // All eigenvalues have Re > sigma iff sign(A - sigma I) = I.
  auto all_right_of = [&](double sigma) {
    const MatrixSign s = matrix_sign(a - sigma * Matrix::Identity(n, n));
    return s.converged && (s.sign - Matrix::Identity(n, n)).norm() <= 1e-6;
  };
  double lo = 0.0;
  double hi = spectral_norm(a);
  for (int i = 0; i < 60 && hi - lo > 1e-14 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (all_right_of(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double gap_from_splitting(const Matrix& a, const Frame& stable, const Frame& unstable) {
  const Matrix a_u = unstable.columns().transpose() * a * unstable.columns();
  const Matrix a_s = stable.columns().transpose() * a * stable.columns();
  return std::min(min_real_part(a_u), min_real_part(-a_s));
}

HyperbolicityLossError loss(const std::string& what, double value) {
  std::ostringstream msg;
  msg << "hyperbolicity lost: " << what << " (" << value << ")";
  return HyperbolicityLossError(msg.str(), value);
}

}  // namespace

std::string to_string(EstimateProvenance provenance) {
  switch (provenance) {
    case EstimateProvenance::closed_form: return "closed_form";
    case EstimateProvenance::eigenbasis_conditioning: return "eigenbasis_conditioning";
  }
  return "unknown";
}

HyperbolicSplitting matrix_sign_projector(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) throw ContractViolation("matrix_sign_projector: matrix is not square");
  if (!a.allFinite()) throw ContractViolation("matrix_sign_projector: non-finite entries");
  const Eigen::Index n = a.rows();

  const MatrixSign sign = matrix_sign(a);
  if (!sign.converged) throw loss("sign iteration stagnated, residual ||S^2 - I||", sign.residual);

  HyperbolicSplitting out;
  out.projector = 0.5 * (Matrix::Identity(n, n) + sign.sign);
  // Both ranks are judged on the scale of the projector, so an (I - P) that is
  // zero up to rounding has rank 0.
  const double scale = std::max(1.0, spectral_norm(out.projector));
  out.unstable = range_basis(out.projector, 1e-10, scale);
  out.stable = range_basis(Matrix::Identity(n, n) - out.projector, 1e-10, scale);
  if (out.unstable.size() + out.stable.size() != n) {
    throw loss("projector ranks do not add up to the dimension, rank(P) + rank(I-P) - d",
               static_cast<double>(out.unstable.size() + out.stable.size() - n));
  }
  out.spectral_gap = is_symmetric(a, 1e-12) ? spectral_gap(a, tol) : gap_from_splitting(a, out.stable, out.unstable);
  if (!(out.spectral_gap >= 10.0 * tol)) throw loss("eigenvalue real part too close to zero", out.spectral_gap);
  return out;
}

double spectral_gap(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) throw ContractViolation("spectral_gap: matrix is not square");
  if (a.size() == 0) return std::numeric_limits<double>::infinity();
  if (is_symmetric(a, 1e-12)) {
    const SpectralDecomposition eig = sym_eig(a);
    return eig.eigenvalues.cwiseAbs().minCoeff();
  }
  const HyperbolicSplitting split = matrix_sign_projector(a, tol);
  return split.spectral_gap;
}

HalfLineEstimates dichotomy_constants(const CoefficientFamily& family, const ParameterValue& lambda) {
  if (family.kind() == FamilyKind::perturbed) {
    throw ContractViolation("dichotomy_constants: unsupported family kind 'perturbed'");
  }
  if (const auto* piecewise = dynamic_cast<const PiecewiseScalarFamily*>(&family)) {
    piecewise->check_parameter(lambda);
    const double a_plus = piecewise->profile().a_plus();
    const double t0 = piecewise->profile().t0();
    auto estimate = [&](const Matrix& m) {
      const double mu = sym_eig(m).eigenvalues.cwiseAbs().minCoeff();
      DichotomyEstimate e;
      e.alpha = mu * a_plus;
      e.k = std::exp(e.alpha * t0);
      e.provenance = EstimateProvenance::closed_form;
      return e;
    };
    return {estimate(piecewise->past_matrix(lambda)), estimate(piecewise->future_matrix(lambda))};
  }

  const AsymptoticData data = family.asymptotics(lambda);
  const auto* limits = std::get_if<LimitMatrices>(&data);
  if (!limits) throw ContractViolation("dichotomy_constants: unsupported family kind " + to_string(family.kind()));
  const double t0 = family.asymptotic_time();
  auto estimate = [&](const Matrix& a) {
    const HyperbolicSplitting split = matrix_sign_projector(a);
    Matrix basis(a.rows(), a.cols());
    basis << split.unstable.columns(), split.stable.columns();
    const Vector s = singular_values(basis);
    DichotomyEstimate e;
    e.alpha = split.spectral_gap;
    e.k = std::max(1.0, s(0) / s(s.size() - 1) * std::exp(e.alpha * t0));
    e.provenance = EstimateProvenance::eigenbasis_conditioning;
    return e;
  };
  return {estimate(limits->minus), estimate(limits->plus)};
}

double roughness_bound(double k, double alpha) {
  if (!(k >= 1.0)) throw ContractViolation("roughness_bound: K must be >= 1");
  if (!(alpha > 0.0)) throw ContractViolation("roughness_bound: alpha must be positive");
  return alpha / (4.0 * k * k);
}

DichotomyCheck verify_dichotomy(const CoefficientFamily& family, const ParameterValue& lambda, HalfLine half_line,
                                const Matrix& projector, double k, double alpha, std::span<const double> sample_times,
                                double tol) {
  const int d = family.dimension();
  if (projector.rows() != d || projector.cols() != d) throw ContractViolation("verify_dichotomy: projector shape");
  if (!(k > 0.0) || !(alpha > 0.0)) throw ContractViolation("verify_dichotomy: K and alpha must be positive");
  for (double t : sample_times) {
    const bool ok = half_line == HalfLine::negative ? t <= 1e-12 : t >= -1e-12;
    if (!ok) throw ContractViolation("verify_dichotomy: sample time outside the half-line");
  }

  const Matrix complement = Matrix::Identity(d, d) - projector;
  DichotomyCheck out;
  out.decay_violation = -std::numeric_limits<double>::infinity();
  out.mirror_violation = -std::numeric_limits<double>::infinity();
  for (double s : sample_times) {
    for (double t : sample_times) {
      if (s > t) continue;
      const Matrix forward = transition(family, lambda, t, s, tol);
      const Matrix backward = transition(family, lambda, s, t, tol);
      const double weight = std::exp(alpha * (t - s)) / k;
      out.decay_violation = std::max(out.decay_violation, spectral_norm(forward * projector) * weight - 1.0);
      out.mirror_violation = std::max(out.mirror_violation, spectral_norm(backward * complement) * weight - 1.0);
      const double scale = std::max(1.0, spectral_norm(forward));
      out.invariance_residual =
          std::max(out.invariance_residual, spectral_norm(forward * projector - projector * forward) / scale);
      ++out.pairs;
    }
  }
  return out;
}

}  // namespace dichotomy
