#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "oscres/common.hpp"

namespace oscres {

/// Uniform grid x_i = x_min + i*h, i = 0..n-1.
class Grid {
 public:
  Grid(double x_min, double h, int n);
  /// n nodes spanning [a, b] inclusive.
  static Grid spanning(double a, double b, int n);

  [[nodiscard]] double x_min() const { return x_min_; }
  [[nodiscard]] double x_max() const { return x_min_ + h_ * (n_ - 1); }
  [[nodiscard]] double h() const { return h_; }
  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] double node(int i) const { return x_min_ + h_ * i; }
  [[nodiscard]] bool covers(double a, double b) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double x_min_;
  double h_;
  int n_;
};

/// Complex-valued function sampled on a uniform grid; piecewise-linear in
/// between nodes and zero outside [x_min, x_max].
class SampledFunction {
 public:
  SampledFunction(Grid grid, std::vector<cplx> values);
  static SampledFunction zeros(const Grid& grid);
  static SampledFunction sample(const Grid& grid, const std::function<cplx(double)>& f);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] std::span<const cplx> values() const { return values_; }
  [[nodiscard]] cplx operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] cplx at(double x) const;
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] double max_abs_imag() const;

  SampledFunction& operator+=(const SampledFunction& other);
  SampledFunction& operator*=(cplx s);
  friend SampledFunction operator+(SampledFunction a, const SampledFunction& b) { return a += b; }
  friend SampledFunction operator*(cplx s, SampledFunction a) { return a *= s; }

 private:
  Grid grid_;
  std::vector<cplx> values_;
};

/// Oscillation scale of V_eps. Zero is allowed (the homogenised limit).
struct Epsilon {
  double value;
  explicit Epsilon(double v);
};

/// W(x, y) = sum_k W_k(x) e^{iky}, stored as finitely many sampled modes on
/// one shared grid covering [-L, L].
class FourierPotential {
 public:
  FourierPotential(double support_radius, std::map<int, SampledFunction> modes, bool real_valued);

  [[nodiscard]] double support_radius() const { return support_radius_; }
  [[nodiscard]] const std::map<int, SampledFunction>& modes() const { return modes_; }
  [[nodiscard]] bool is_real_valued() const { return real_valued_; }
  [[nodiscard]] const Grid& grid() const { return modes_.begin()->second.grid(); }
  /// W_k, or nullptr when the mode is not stored.
  [[nodiscard]] const SampledFunction* mode(int k) const;
  /// W_0 (identically zero when absent).
  [[nodiscard]] SampledFunction mean() const;
  /// Copy with mode k removed (and -k as well when real-valued, which
  /// requires W_{-k} = conj W_k).
  [[nodiscard]] FourierPotential without_mode(int k) const;

 private:
  double support_radius_;
  std::map<int, SampledFunction> modes_;
  bool real_valued_;
};

/// V_eps(x) = sum_k W_k(x) e^{ikx/eps}; zero outside the grid.
cplx evaluate_oscillatory(const FourierPotential& W, Epsilon eps, double x);

/// Lambda_0 = sum_{k != 0} W_k W_{-k} / k^2, nodewise.
SampledFunction lambda0(const FourierPotential& W);

/// Lambda_1 = -2 sum_{k != 0} W_{-k} (D W_k) / k^3 with D = -i d/dx.
SampledFunction lambda1(const FourierPotential& W);

/// W_0 - eps^2 Lambda_0 (order 2), additionally - eps^3 Lambda_1 (order 3).
SampledFunction effective_potential(const FourierPotential& W, Epsilon eps, int order);

/// Composite Simpson integral over the grid.
cplx integrate(const SampledFunction& f);

/// Fourth-order central first derivative, treating f as zero beyond the grid.
SampledFunction derivative(const SampledFunction& f);

/// Node count of the default grid over [-L - 0.05, L + 0.05].
inline constexpr int kDefaultGridNodes = 4001;
inline constexpr double kGridMargin = 0.05;

Grid default_grid(double support_radius, int n = kDefaultGridNodes);

/// exp(-x^2/(a^2-x^2)) on (-a, a), zero elsewhere.
double bump(double x, double a);

namespace presets {

/// phi(x) (1 + 2 cos(x/2 + y)) with phi = bump(., 1): W_0 = phi,
/// W_{+-1} = phi e^{+-ix/2}.
FourierPotential figure3(int grid_n = kDefaultGridNodes, bool include_mean = true);

}  // namespace presets

}  // namespace oscres
