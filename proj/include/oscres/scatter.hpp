#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "oscres/common.hpp"
#include "oscres/potential.hpp"

namespace oscres {

/// 2x2 propagator of (u, u') for u'' = (V - lambda^2) u.
struct TransferMatrix {
  cplx m11{1.0}, m12{0.0}, m21{0.0}, m22{1.0};

  [[nodiscard]] cplx det() const { return m11 * m22 - m12 * m21; }
  [[nodiscard]] std::pair<cplx, cplx> apply(cplx u, cplx du) const {
    return {m11 * u + m12 * du, m21 * u + m22 * du};
  }
  /// Inverse of a unit-determinant matrix.
  [[nodiscard]] TransferMatrix inverse_unimodular() const { return {m22, -m12, -m21, m11}; }

  friend TransferMatrix operator*(const TransferMatrix& a, const TransferMatrix& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }
};

/// Piecewise-constant potential on [a, b]: consecutive cells with given
/// widths and constant values. V is zero outside [a, b].
class CellProfile {
 public:
  CellProfile(double a, std::vector<double> widths, std::vector<cplx> values);

  /// n equal cells on [a, b], each valued at its midpoint.
  static CellProfile midpoint(double a, double b, int n, const std::function<cplx(double)>& v);
  /// One cell per node of f, centred on the node: [x_i - h/2, x_i + h/2].
  static CellProfile from_sampled(const SampledFunction& f);
  /// Cells between consecutive breakpoints (values.size() == breakpoints.size() - 1).
  static CellProfile piecewise(const std::vector<double>& breakpoints, std::vector<cplx> values);

  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] double b() const { return b_; }
  [[nodiscard]] std::size_t size() const { return widths_.size(); }
  [[nodiscard]] const std::vector<double>& widths() const { return widths_; }
  [[nodiscard]] const std::vector<cplx>& values() const { return values_; }
  [[nodiscard]] bool is_real() const;

 private:
  double a_;
  double b_;
  std::vector<double> widths_;
  std::vector<cplx> values_;
};

struct PropagatedState {
  cplx u;
  cplx du;
  /// The true state is (u, du) * exp(log_scale).
  double log_scale = 0.0;
};

struct ScatteringCoefficients {
  cplx lambda;
  cplx t;
  cplx r;
};

/// Exact propagator across a cell of constant potential v.
TransferMatrix cell_propagator(cplx v_const, double length, cplx lambda);

/// Ordered product of all cell propagators of the profile.
TransferMatrix transfer_matrix(const CellProfile& V, cplx lambda);

/// Propagate (u0, du0) from a to b through the cells, renormalising the
/// state whenever its norm leaves [1e-100, 1e100].
PropagatedState propagate(const CellProfile& V, cplx lambda, cplx u0, cplx du0);

/// Sampled-potential form: cells centred on the grid nodes.
std::pair<cplx, cplx> propagate(const SampledFunction& V, cplx lambda, cplx u0, cplx du0);

/// i*lambda*u(b) - u'(b) for the solution leaving a as e^{-i lambda x}.
/// Zeros (lambda != 0) are the resonances of the profile.
ScaledComplex resonance_determinant(const CellProfile& V, cplx lambda);
ScaledComplex resonance_determinant(const SampledFunction& V, cplx lambda);

/// Transmission/reflection for unit amplitude incoming from the left.
/// Throws TransmissionPole when the incoming amplitude vanishes.
ScatteringCoefficients transmission(const CellProfile& V, cplx lambda);
ScatteringCoefficients transmission(const SampledFunction& V, cplx lambda);

/// V_eps sampled at the midpoints of n equal cells on [a, b].
CellProfile oscillatory_profile(const FourierPotential& W, Epsilon eps, double a, double b, int n);

/// Default matching interval [-L - 0.05, L + 0.05].
std::pair<double, double> matching_interval(const FourierPotential& W);

/// Midpoint cells damp a mode by sinc(pi / per_period); at 400 the relative
/// damping is about 1e-5.
inline constexpr int kCellsPerPeriod = 400;

/// Cell count giving at least `per_period` cells per oscillation period
/// 2 pi eps / k_max, and never fewer than `min_cells`.
int cells_for(const FourierPotential& W, Epsilon eps, double a, double b, int per_period = kCellsPerPeriod,
              int min_cells = 4000);

struct TransmissionErrorSample {
  double lambda;
  cplx t_eps;
  cplx t_eff;
  double error;
};

/// |t_eps - t_eff| along real lambda, with V_eps and the effective potential
/// of the given order discretised on the same cells.
std::vector<TransmissionErrorSample> transmission_error_curve(const FourierPotential& W, Epsilon eps,
                                                              int order, const std::vector<double>& lambdas,
                                                              int n_cells = 0);

}  // namespace oscres
