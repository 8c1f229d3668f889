#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "oscres/common.hpp"
#include "oscres/resonance.hpp"

namespace oscres {

/// Entire function handle; values carry a separate exponent.
using AnalyticFunction = std::function<ScaledComplex(cplx)>;

struct SearchRegion {
  double re_min, re_max, im_min, im_max;

  SearchRegion(double re_lo, double re_hi, double im_lo, double im_hi);
  [[nodiscard]] double diameter() const;
  [[nodiscard]] cplx center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
  [[nodiscard]] bool contains(cplx z, double slack = 0.0) const;
};

struct ExclusionDisk {
  cplx center;
  double radius;
  [[nodiscard]] bool contains(cplx z) const { return std::abs(z - center) < radius; }
};

struct RootFindConfig {
  int edge_samples = 64;
  int max_depth = 12;
  double newton_tol = 1e-9;
  int newton_max_iter = 60;
  double min_cell = 1e-3;
  std::vector<ExclusionDisk> exclusion_disks;
  /// Seeds the boundary jitter applied when a zero sits on a contour.
  std::uint64_t seed = 0;
  /// Worker threads for batched function evaluation.
  int jobs = 1;

  void validate() const;
};

/// Winding number of f along the boundary of the rectangle (counter-clockwise).
/// Phase increments are refined by bisection until each is below pi/2.
int count_zeros(const AnalyticFunction& f, const SearchRegion& region, const RootFindConfig& cfg = {});

/// Winding number of f along the circle |z - center| = radius.
int count_zeros_disk(const AnalyticFunction& f, cplx center, double radius, const RootFindConfig& cfg = {});

/// Newton iteration with a central-difference derivative. `divergence_radius`
/// bounds |z - z0|; the iteration fails when it is exceeded.
Resonance refine_newton(const AnalyticFunction& f, cplx z0, const RootFindConfig& cfg = {},
                        Method method = Method::ode_det, double divergence_radius = 1e3);

/// |f(z)| / max |f| on the ring of radius 1e-2 max(1, |z|) around z.
double normalized_residual(const AnalyticFunction& f, cplx z);

struct LocateResult {
  std::vector<Resonance> roots;
  /// Winding count of the whole region.
  int total_count = 0;
  /// Zeros counted inside exclusion disks (not located).
  int excluded_count = 0;
  /// Empty when the located multiplicities add up to total_count.
  std::string diagnostic;

  [[nodiscard]] bool consistent() const { return diagnostic.empty(); }
};

/// Recursive quadrisection: zero-count rectangles are dropped, rectangles
/// holding a single zero are tried with Newton from their centre, and
/// clusters below min_cell are returned with their local count as
/// multiplicity.
LocateResult locate_zeros(const AnalyticFunction& f, const SearchRegion& region, const RootFindConfig& cfg = {},
                          Method method = Method::ode_det);

}  // namespace oscres
