#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "oscres/common.hpp"
#include "oscres/potential.hpp"

namespace oscres {

/// Potential handed to the Nystrom discretisation: a callable plus the
/// breakpoints of its support. Quadrature rules never straddle a breakpoint,
/// so jumps there cost no accuracy.
struct KernelPotential {
  std::function<cplx(double)> v;
  std::vector<double> breakpoints;

  /// Linear interpolant of f on the smallest node interval holding its nonzero values.
  static KernelPotential from_sampled(const SampledFunction& f);
  /// Constant value on [lo, hi].
  static KernelPotential constant(cplx value, double lo, double hi);
  [[nodiscard]] bool is_zero() const { return breakpoints.size() < 2; }
};

struct NystromOperator {
  cplx lambda;
  std::vector<double> nodes;
  std::vector<double> weights;
  /// (i/(2 lambda)) e^{i lambda |x_i - x_j|} V(x_j) w_j
  Eigen::MatrixXcd matrix;
};

inline constexpr int kDefaultNystromNodes = 300;

NystromOperator build_operator(const KernelPotential& V, cplx lambda, int n_nodes = kDefaultNystromNodes);
NystromOperator build_operator(const SampledFunction& V, cplx lambda, int n_nodes = kDefaultNystromNodes);

/// Quadrature of the Nystrom matrix.
///   plain       the Gauss-Legendre matrix of NystromOperator; the kink of
///               e^{i lambda |x - y|} on the diagonal limits it to O(n^-2)
///   richardson  trapezoid nodes including the breakpoints, so the kink sits on
///               nodes and the error expands in even powers of h; Romberg
///               elimination over spacings h, h/2 (and h/4 when n_nodes >= 256)
///               removes the leading even-power terms, the finest level using at
///               most n_nodes nodes
enum class NystromRule { plain, richardson };

/// Det(Id + K_V) by partial-pivot LU, as a scaled value.
ScaledComplex fredholm_det(const KernelPotential& V, cplx lambda, int n_nodes = kDefaultNystromNodes,
                           NystromRule rule = NystromRule::richardson);
ScaledComplex fredholm_det(const SampledFunction& V, cplx lambda, int n_nodes = kDefaultNystromNodes,
                           NystromRule rule = NystromRule::richardson);

/// lambda * Det(Id + K_V); at lambda = 0 the average over the ring |lambda| = 1e-6.
ScaledComplex entire_det(const KernelPotential& V, cplx lambda, int n_nodes = kDefaultNystromNodes,
                         NystromRule rule = NystromRule::richardson);
ScaledComplex entire_det(const SampledFunction& V, cplx lambda, int n_nodes = kDefaultNystromNodes,
                         NystromRule rule = NystromRule::richardson);

/// Average of lambda * d_V over 8 points on |lambda| = radius.
cplx entire_det_ring_average(const KernelPotential& V, double radius, int n_nodes = kDefaultNystromNodes);

inline constexpr double kMaxCondition = 1e12;

/// Tr((Id + K_{W0})^{-1} K_Lam) on a common node set, with the same rule as
/// fredholm_det. Throws NearSingular
/// when the condition estimate of Id + K_{W0} exceeds 1e12.
cplx trace_perturbation(const KernelPotential& W0, const KernelPotential& Lam, cplx lambda,
                        int n_nodes = kDefaultNystromNodes, NystromRule rule = NystromRule::richardson);
cplx trace_perturbation(const SampledFunction& W0, const SampledFunction& Lam, cplx lambda,
                        int n_nodes = kDefaultNystromNodes, NystromRule rule = NystromRule::richardson);

}  // namespace oscres
