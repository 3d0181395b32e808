#pragma once

#include "dichotomy/linalg.hpp"
#include "dichotomy/model.hpp"

#include <cstddef>

namespace dichotomy {

struct IntegrationStats {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  /// Step size proposed for continuing the integration. A positive value on
  /// entry is used as the first trial step.
  double next_step = 0.0;
};

/// Integrates Y' = A_lambda(t) Y from `from` to `to` (either direction) with an
/// adaptive Dormand-Prince 5(4) pair; absolute tolerance tol/10, relative tol
/// (max-norm, relative to each column's size).
/// Restarts at the family's breakpoints. Throws StiffnessError on step underflow.
Matrix integrate_linear(const CoefficientFamily& family, const ParameterValue& lambda, Matrix y, double from,
                        double to, double tol, IntegrationStats* stats = nullptr);

/// Transition matrix Phi_lambda(t, s); Phi(s, s) = I exactly.
Matrix transition(const CoefficientFamily& family, const ParameterValue& lambda, double t, double s,
                  double tol = 1e-10);

struct TransportResult {
  Frame frame;               // orthonormal, spans Phi(t, s) span(F)
  double log_growth = 0.0;   // sum of log|det R| over re-orthonormalizations
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t reorthonormalizations = 0;
};

/// Transports the subspace spanned by an orthonormal frame from time s to
/// time t, re-orthonormalizing every `reortho_interval` time units.
/// Throws RankCollapseError when the transported columns become dependent.
TransportResult transport_frame(const CoefficientFamily& family, const ParameterValue& lambda, const Frame& frame,
                                double s, double t, double reortho_interval = 1.0, double tol = 1e-10);

}  // namespace dichotomy
