#pragma once

#include "oscres/common.hpp"
#include "oscres/resonance.hpp"
#include "oscres/roots.hpp"
#include "oscres/scatter.hpp"

namespace oscres {

/// Number of (-1, +1) cell pairs across [-1/2, 1/2].
struct StepIndex {
  int n;
  explicit StepIndex(int value);
};

/// Branch index of the Lambert function.
struct LambertBranch {
  int nu;
  explicit LambertBranch(int value);
};

/// 2n cells of width 1/(2n) on [-1/2, 1/2], valued -1, +1, -1, ...
CellProfile step_profile(StepIndex n);

/// (M_+ M_-)^n applied to (1, -i lambda), paired against (1, i lambda).
/// The pair matrix is raised to the n-th power by repeated squaring with a
/// separate exponent.
ScaledComplex step_determinant(StepIndex n, cplx lambda);

/// Branch nu of w e^w = z by Halley iteration.
cplx lambert_w(LambertBranch branch, cplx z);

/// lambda = i W_nu(sign i / (8n)); checks -i lambda e^{-i lambda} = sign i/(8n).
cplx lambert_prediction(StepIndex n, LambertBranch branch, int sign);

struct StepResonance {
  Resonance resonance;
  cplx prediction;
  /// Zeros of the determinant in the disk of radius r0 around the prediction.
  int disk_count = 0;
  /// False for n < 4, where the asymptotic seed is only a rough guess.
  bool asymptotic_regime = true;
};

inline constexpr double kStepDiskRadius = 0.5;

/// Newton from the nu = 1, + prediction, verified by a zero count on the
/// disk of radius 0.5 around the prediction (must be exactly one).
StepResonance find_step_resonance(StepIndex n, const RootFindConfig& cfg = {});

/// sgn(sin(x/eps)) on [-1/2, 1/2] with breakpoints at the exact sign changes.
CellProfile step_family_profile(double eps);

}  // namespace oscres
