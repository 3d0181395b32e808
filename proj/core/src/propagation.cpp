#include "dichotomy/propagation.hpp"

#include "dichotomy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace dichotomy {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                 b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

constexpr std::size_t kMaxSteps = 5'000'000;

// Max-norm error relative to the size of each solution column, so entries of
// a unit column that pass through zero do not force tiny steps.
double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1, double atol, double rtol) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < err.cols(); ++j) {
    const double size = std::max(y0.col(j).cwiseAbs().maxCoeff(), y1.col(j).cwiseAbs().maxCoeff());
    const double scale = atol + rtol * size;
    worst = std::max(worst, err.col(j).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

void integrate_segment(const CoefficientFamily& family, const ParameterValue& lambda, Matrix& y, double from,
                       double to, double tol, IntegrationStats& stats) {
  const double span = to - from;
  if (span == 0.0) return;
  const double direction = span > 0.0 ? 1.0 : -1.0;
  const double atol = tol / 10.0;
  const double rtol = tol;

  const Eigen::Index rows = y.rows(), cols = y.cols();
  Matrix k1(rows, cols), k2(rows, cols), k3(rows, cols), k4(rows, cols), k5(rows, cols), k6(rows, cols),
      k7(rows, cols), stage(rows, cols), y_new(rows, cols), err(rows, cols);
  auto rhs = [&](double time, const Matrix& state, Matrix& out) { out.noalias() = family.evaluate(lambda, time) * state; };

  double t = from;
  rhs(t, y, k1);
  double h = std::abs(stats.next_step);
  if (!(h > 0.0)) {
    const double a_norm = std::max(family.evaluate(lambda, t).cwiseAbs().maxCoeff(), 1e-3);
    h = 0.5 * std::pow(tol, 0.2) / a_norm;
  }
  h = direction * std::min(std::abs(span), h);

  std::size_t steps = 0;
  while (direction * (to - t) > 0.0) {
    if (++steps > kMaxSteps) throw StiffnessError("integrator exceeded the step budget", t);
    const double remaining = to - t;
    bool last = false;
    const double proposed = h;
    if (std::abs(h) >= std::abs(remaining)) {
      h = remaining;
      last = true;
    }
    if (std::abs(h) < 1e-13 * std::max(1.0, std::abs(t))) {
      std::ostringstream msg;
      msg << "step size underflow at t = " << t << " (problem too stiff for the explicit integrator)";
      throw StiffnessError(msg.str(), t);
    }

    stage = y + h * (a21 * k1);
    rhs(t + c2 * h, stage, k2);
    stage = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, stage, k3);
    stage = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, stage, k4);
    stage = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, stage, k5);
    stage = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, stage, k6);
    y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double t_new = last ? to : t + h;
    rhs(t_new, y_new, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double e = error_norm(err, y, y_new, atol, rtol);

    if (!std::isfinite(e) || !y_new.allFinite()) {
      // overflow ends in step underflow below, reported as stiffness
      h *= 0.2;
      ++stats.rejected_steps;
      continue;
    }
    if (e <= 1.0) {
      t = t_new;
      y.swap(y_new);
      k1.swap(k7);
      ++stats.accepted_steps;
      const double factor = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
      // A step shortened to hit the segment end says little about the scale.
      stats.next_step = last ? std::max(std::abs(proposed), factor * std::abs(h)) : factor * std::abs(h);
      h *= factor;
    } else {
      ++stats.rejected_steps;
      h *= std::clamp(0.9 * std::pow(e, -0.2), 0.2, 1.0);
    }
  }
}

}  // namespace

Matrix integrate_linear(const CoefficientFamily& family, const ParameterValue& lambda, Matrix y, double from,
                        double to, double tol, IntegrationStats* stats) {
  if (!std::isfinite(from) || !std::isfinite(to)) throw ContractViolation("integrate_linear: non-finite time");
  if (!(tol > 0.0)) throw ContractViolation("integrate_linear: tolerance must be positive");
  family.check_parameter(lambda);
  IntegrationStats local;
  IntegrationStats& s = stats ? *stats : local;

  std::vector<double> cuts;
  const double lo = std::min(from, to);
  const double hi = std::max(from, to);
  for (double b : family.breakpoints()) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  if (to < from) std::reverse(cuts.begin(), cuts.end());

  double t = from;
  for (double b : cuts) {
    integrate_segment(family, lambda, y, t, b, tol, s);
    t = b;
  }
  integrate_segment(family, lambda, y, t, to, tol, s);
  return y;
}

Matrix transition(const CoefficientFamily& family, const ParameterValue& lambda, double t, double s, double tol) {
  const int d = family.dimension();
  if (t == s) {
    family.check_parameter(lambda);
    return Matrix::Identity(d, d);
  }
  return integrate_linear(family, lambda, Matrix::Identity(d, d), s, t, tol);
}

TransportResult transport_frame(const CoefficientFamily& family, const ParameterValue& lambda, const Frame& frame,
                                double s, double t, double reortho_interval, double tol) {
  if (frame.dim() != family.dimension()) throw ContractViolation("transport_frame: frame dimension mismatch");
  if (!(reortho_interval > 0.0)) throw ContractViolation("transport_frame: reortho_interval must be positive");
  const Eigen::Index k = frame.size();
  if ((frame.columns().transpose() * frame.columns() - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-8) {
    throw ContractViolation("transport_frame: input frame is not orthonormal");
  }

  TransportResult out;
  out.frame = frame;
  if (t == s || k == 0) return out;

  const double direction = t > s ? 1.0 : -1.0;
  double current = s;
  Matrix y = frame.columns();
  IntegrationStats stats;
  while (direction * (t - current) > 0.0) {
    double next = current + direction * reortho_interval;
    if (direction * (next - t) > 0.0 || std::abs(t - next) < 1e-12 * reortho_interval) next = t;
    stats.accepted_steps = stats.rejected_steps = 0;
    y = integrate_linear(family, lambda, std::move(y), current, next, tol, &stats);
    out.accepted_steps += stats.accepted_steps;
    out.rejected_steps += stats.rejected_steps;
    current = next;

    QrFactors qr;
    try {
      qr = orthonormalize(Frame(y));
    } catch (const RankCollapseError& e) {
      std::ostringstream msg;
      msg << "frame transport collapsed near t = " << current
          << "; reduce reortho_interval or the truncation time (" << e.what() << ")";
      throw RankCollapseError(msg.str(), e.smallest_singular_value());
    }
    for (Eigen::Index i = 0; i < k; ++i) out.log_growth += std::log(qr.r(i, i));
    ++out.reorthonormalizations;
    y = qr.q.columns();
  }
  out.frame = Frame(std::move(y));
  return out;
}

}  // namespace dichotomy
