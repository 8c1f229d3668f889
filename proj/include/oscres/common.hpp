#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace oscres {

using cplx = std::complex<double>;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Complex number stored as mantissa * exp(log_scale).
///
/// Determinants of the resonance problem grow like exp(2 L |Im lambda|) in
/// the lower half plane; storing the exponent separately keeps phase and
/// relative magnitude usable far past the double overflow threshold.
struct ScaledComplex {
  cplx mantissa{0.0, 0.0};
  double log_scale = 0.0;

  ScaledComplex() = default;
  ScaledComplex(cplx m, double s = 0.0) : mantissa(m), log_scale(s) { normalize(); }

  void normalize() {
    const double a = std::abs(mantissa);
    if (a == 0.0 || !std::isfinite(a)) return;
    const int e = std::ilogb(a);
    if (e > 64 || e < -64) {
      mantissa = std::ldexp(mantissa.real(), -e) + I * std::ldexp(mantissa.imag(), -e);
      log_scale += e * std::log(2.0);
    }
  }

  [[nodiscard]] bool is_zero() const { return mantissa == cplx{0.0, 0.0}; }
  [[nodiscard]] bool is_finite() const {
    return std::isfinite(mantissa.real()) && std::isfinite(mantissa.imag()) && std::isfinite(log_scale);
  }
  [[nodiscard]] double arg() const { return std::arg(mantissa); }
  /// log|value|; -inf for an exact zero.
  [[nodiscard]] double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
  /// The plain complex value (overflows to inf when the exponent is large).
  [[nodiscard]] cplx value() const { return mantissa * std::exp(log_scale); }
  /// mantissa * exp(log_scale - ref): the value expressed against a common exponent.
  [[nodiscard]] cplx relative_to(double ref) const { return mantissa * std::exp(log_scale - ref); }

  friend ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b) {
    return {a.mantissa * b.mantissa, a.log_scale + b.log_scale};
  }
  friend ScaledComplex operator*(const ScaledComplex& a, cplx b) { return {a.mantissa * b, a.log_scale}; }
};

/// Failure of a numerical procedure (non-convergence, singular systems, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The transmission coefficient has a pole at the evaluation point.
class TransmissionPole : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A linear system is numerically singular (condition above threshold).
class NearSingular : public NumericalError {
 public:
  NearSingular(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  [[nodiscard]] double condition() const { return condition_; }

 private:
  double condition_;
};

/// An iteration ran out of steps or diverged; carries the last residual.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : NumericalError(what), last_residual_(last_residual) {}
  [[nodiscard]] double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace oscres
