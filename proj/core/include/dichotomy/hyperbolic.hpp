#pragma once

#include "dichotomy/linalg.hpp"
#include "dichotomy/model.hpp"

#include <cstddef>
#include <span>
#include <string>

namespace dichotomy {

/// Spectral splitting of a hyperbolic matrix A into the parts with positive
/// and negative real spectrum.
struct HyperbolicSplitting {
  Matrix projector;     // onto the positive-real-part invariant subspace, along the other
  Frame stable;         // basis of the Re < 0 invariant subspace (range of I - P)
  Frame unstable;       // basis of the Re > 0 invariant subspace (range of P)
  double spectral_gap;  // min |Re mu| over the spectrum
};

/// P = (I + sign(A)) / 2 via the scaled Newton iteration. Throws
/// HyperbolicityLossError when A has spectrum within `tol` of the imaginary axis.
HyperbolicSplitting matrix_sign_projector(const Matrix& a, double tol = 1e-8);

/// min |Re mu| over the spectrum of a hyperbolic matrix. Symmetric input uses
/// the Jacobi eigensolver; otherwise the invariant blocks are bisected with
/// shifted sign iterations.
double spectral_gap(const Matrix& a, double tol = 1e-8);

enum class EstimateProvenance { closed_form, eigenbasis_conditioning };

std::string to_string(EstimateProvenance provenance);

struct DichotomyEstimate {
  double k = 1.0;
  double alpha = 0.0;
  EstimateProvenance provenance = EstimateProvenance::closed_form;
};

struct HalfLineEstimates {
  DichotomyEstimate negative;  // (-infinity, 0]
  DichotomyEstimate positive;  // [0, +infinity)
};

/// Dichotomy constants on both half-lines.
///
/// Piecewise scalar families get the closed forms K = exp(mu a_plus t0),
/// alpha = mu a_plus with mu the smallest |eigenvalue| of B (resp. C). Families
/// with limit matrices get alpha = spectral gap of A^-+ and K = cond of the
/// orthonormalized splitting basis times exp(alpha t0). Perturbed families
/// throw ContractViolation.
HalfLineEstimates dichotomy_constants(const CoefficientFamily& family, const ParameterValue& lambda);

/// Coppel's roughness threshold alpha / (4 K^2).
double roughness_bound(double k, double alpha);

enum class HalfLine { negative, positive };

struct DichotomyCheck {
  double decay_violation = 0.0;   // max ||Phi(t,s) P|| e^{alpha(t-s)} / K - 1
  double mirror_violation = 0.0;  // max ||Phi(s,t) (I-P)|| e^{alpha(t-s)} / K - 1
  double invariance_residual = 0.0;
  std::size_t pairs = 0;

  double max_violation() const noexcept { return decay_violation > mirror_violation ? decay_violation : mirror_violation; }
  bool verified(double slack = 0.0, double invariance_tol = 1e-6) const noexcept {
    return max_violation() <= slack && invariance_residual <= invariance_tol;
  }
};

/// Evaluates both dichotomy inequalities for the time-independent projector
/// candidate P on every pair s <= t of sample times on the half-line (times
/// outside the half-line are rejected). The invariance residual is
/// max ||Phi(t,s) P - P Phi(t,s)|| / max(1, ||Phi(t,s)||).
DichotomyCheck verify_dichotomy(const CoefficientFamily& family, const ParameterValue& lambda, HalfLine half_line,
                                const Matrix& projector, double k, double alpha, std::span<const double> sample_times,
                                double tol = 1e-11);

}  // namespace dichotomy
