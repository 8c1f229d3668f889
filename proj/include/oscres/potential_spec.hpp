#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscres/fredholm.hpp"
#include "oscres/potential.hpp"
#include "oscres/scatter.hpp"

namespace oscres {

/// Malformed or inconsistent potential-spec document.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parsed potential spec: the sampled Fourier data plus closed-form mode
/// evaluators and the jump locations of piecewise-constant families.
struct PotentialSpec {
  FourierPotential sampled;
  std::map<int, std::function<cplx(double)>> exact;
  /// Sorted discontinuities of the modes (step edges).
  std::vector<double> breakpoints;

  [[nodiscard]] double support_radius() const { return sampled.support_radius(); }
};

/// {"L": real, "grid_n": int, "real_valued": bool, "modes": [{"k": int, "family": ..., ...}]}
///
/// Families:
///   bump               a, amplitude, phase, center: amplitude e^{i phase x} exp(-s^2/(a^2-s^2)), s = x - center
///   truncated_gaussian sigma, a, amplitude, phase, center: Gaussian cut off at |s| >= a
///   step               x0, x1, amplitude: amplitude on [x0, x1]
///   tabulated          path: CSV with columns x, re[, im]; linear in between, zero outside
/// amplitude is a number or [re, im]. Entries with equal k are summed.
/// Relative table paths resolve against `base_dir`.
PotentialSpec parse_potential_spec(const std::string& json_text, const std::filesystem::path& base_dir = {});
PotentialSpec load_potential_spec(const std::filesystem::path& path);

/// Sum_k W_k(x) e^{ikx/eps} from the closed-form evaluators (eps = 0: W_0 only).
cplx evaluate_exact(const PotentialSpec& spec, Epsilon eps, double x);

/// Midpoint cells over the matching interval, split at every breakpoint so
/// that jumps fall on cell edges. At least `min_cells` cells and kCellsPerPeriod
/// per period.
CellProfile spec_profile(const PotentialSpec& spec, Epsilon eps, int min_cells = 4000);

/// Fredholm input with Gauss-Legendre panels split at the breakpoints.
KernelPotential spec_kernel(const PotentialSpec& spec, Epsilon eps);

}  // namespace oscres
