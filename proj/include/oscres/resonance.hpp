#pragma once

#include <string_view>

#include "oscres/common.hpp"

namespace oscres {

enum class Method { ode_det, fredholm_det, step_closed_form };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::ode_det: return "ode_det";
    case Method::fredholm_det: return "fredholm_det";
    case Method::step_closed_form: return "step_closed_form";
  }
  return "unknown";
}

/// A located zero of a resonance determinant.
struct Resonance {
  cplx lambda;
  /// |f(lambda)| normalised by the largest |f| on a small ring around lambda.
  double residual = 0.0;
  Method method = Method::ode_det;
  int newton_iterations = 0;
  /// Local winding count; 1 unless an unresolved cluster was returned.
  int multiplicity = 1;
};

}  // namespace oscres
