#include "oscres/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace oscres {

Grid::Grid(double x_min, double h, int n) : x_min_(x_min), h_(h), n_(n) {
  if (!(h > 0.0) || !std::isfinite(h) || !std::isfinite(x_min)) {
    throw std::invalid_argument("Grid: spacing must be positive and finite");
  }
  if (n < 3) throw std::invalid_argument("Grid: at least 3 nodes required");
}

Grid Grid::spanning(double a, double b, int n) {
  if (!(b > a)) throw std::invalid_argument("Grid::spanning: empty interval");
  if (n < 3) throw std::invalid_argument("Grid: at least 3 nodes required");
  return {a, (b - a) / (n - 1), n};
}

bool Grid::covers(double a, double b) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(x_max()) + std::abs(x_min_));
  return x_min_ <= a + slack && x_max() >= b - slack;
}

SampledFunction::SampledFunction(Grid grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(grid_.n())) {
    throw std::invalid_argument("SampledFunction: value count does not match grid");
  }
}

SampledFunction SampledFunction::zeros(const Grid& grid) {
  return {grid, std::vector<cplx>(static_cast<std::size_t>(grid.n()))};
}

SampledFunction SampledFunction::sample(const Grid& grid, const std::function<cplx(double)>& f) {
  std::vector<cplx> v(static_cast<std::size_t>(grid.n()));
  for (int i = 0; i < grid.n(); ++i) v[static_cast<std::size_t>(i)] = f(grid.node(i));
  return {grid, std::move(v)};
}

cplx SampledFunction::at(double x) const {
  const double t = (x - grid_.x_min()) / grid_.h();
  if (!(t >= 0.0) || t > grid_.n() - 1) return {0.0, 0.0};
  const int i = std::min(static_cast<int>(t), grid_.n() - 2);
  const double w = t - i;
  return (1.0 - w) * (*this)[i] + w * (*this)[i + 1];
}

double SampledFunction::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SampledFunction::max_abs_imag() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v.imag()));
  return m;
}

SampledFunction& SampledFunction::operator+=(const SampledFunction& other) {
  if (!(other.grid_ == grid_)) throw std::invalid_argument("SampledFunction: grid mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

SampledFunction& SampledFunction::operator*=(cplx s) {
  for (auto& v : values_) v *= s;
  return *this;
}

Epsilon::Epsilon(double v) : value(v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("Epsilon must be finite and >= 0");
}

FourierPotential::FourierPotential(double support_radius, std::map<int, SampledFunction> modes,
                                   bool real_valued)
    : support_radius_(support_radius), modes_(std::move(modes)), real_valued_(real_valued) {
  if (!(support_radius > 0.0)) throw std::invalid_argument("FourierPotential: L must be positive");
  if (modes_.empty()) throw std::invalid_argument("FourierPotential: empty mode map");
  const Grid& g = modes_.begin()->second.grid();
  if (!g.covers(-support_radius, support_radius)) {
    throw std::invalid_argument("FourierPotential: grid does not cover [-L, L]");
  }
  double scale = 0.0;
  for (const auto& [k, m] : modes_) {
    if (!(m.grid() == g)) throw std::invalid_argument("FourierPotential: modes must share one grid");
    scale = std::max(scale, m.max_abs());
  }
  const double tol = 1e-8 * std::max(scale, 1.0);
  for (const auto& [k, m] : modes_) {
    if (std::abs(m[0]) > tol || std::abs(m[g.n() - 1]) > tol) {
      std::ostringstream os;
      os << "FourierPotential: mode " << k << " does not vanish at the grid endpoints";
      throw std::invalid_argument(os.str());
    }
  }
  if (real_valued_) {
    for (const auto& [k, m] : modes_) {
      const auto it = modes_.find(-k);
      if (it == modes_.end()) {
        throw std::invalid_argument("FourierPotential: real-valued potential is missing mode " +
                                    std::to_string(-k));
      }
      for (int i = 0; i < g.n(); ++i) {
        if (std::abs(it->second[i] - std::conj(m[i])) > tol) {
          throw std::invalid_argument("FourierPotential: modes " + std::to_string(k) + " and " +
                                      std::to_string(-k) + " are not complex conjugates");
        }
      }
    }
  }
}

const SampledFunction* FourierPotential::mode(int k) const {
  const auto it = modes_.find(k);
  return it == modes_.end() ? nullptr : &it->second;
}

SampledFunction FourierPotential::mean() const {
  const auto* w0 = mode(0);
  return w0 ? *w0 : SampledFunction::zeros(grid());
}

FourierPotential FourierPotential::without_mode(int k) const {
  auto modes = modes_;
  modes.erase(k);
  if (real_valued_) modes.erase(-k);
  if (modes.empty()) modes.emplace(k == 0 ? 1 : 0, SampledFunction::zeros(grid()));
  return {support_radius_, std::move(modes), real_valued_};
}

cplx evaluate_oscillatory(const FourierPotential& W, Epsilon eps, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("evaluate_oscillatory: non-finite x");
  cplx sum{0.0, 0.0};
  for (const auto& [k, m] : W.modes()) {
    const cplx w = m.at(x);
    if (k == 0) {
      sum += w;
    } else {
      if (eps.value == 0.0) throw std::invalid_argument("evaluate_oscillatory: eps must be positive");
      sum += w * std::exp(I * (k * x / eps.value));
    }
  }
  return sum;
}

SampledFunction lambda0(const FourierPotential& W) {
  auto out = SampledFunction::zeros(W.grid());
  for (const auto& [k, wk] : W.modes()) {
    if (k == 0) continue;
    const auto* wmk = W.mode(-k);
    if (!wmk) continue;
    std::vector<cplx> v(static_cast<std::size_t>(W.grid().n()));
    const double k2 = static_cast<double>(k) * k;
    for (int i = 0; i < W.grid().n(); ++i) v[static_cast<std::size_t>(i)] = wk[i] * (*wmk)[i] / k2;
    out += SampledFunction(W.grid(), std::move(v));
  }
  return out;
}

SampledFunction derivative(const SampledFunction& f) {
  const Grid& g = f.grid();
  if (g.n() < 5) throw std::invalid_argument("derivative: grid too coarse for the 5-point stencil");
  const int n = g.n();
  auto val = [&](int i) { return (i < 0 || i >= n) ? cplx{} : f[i]; };
  std::vector<cplx> d(static_cast<std::size_t>(n));
  const double inv = 1.0 / (12.0 * g.h());
  for (int i = 0; i < n; ++i) {
    d[static_cast<std::size_t>(i)] = (-val(i + 2) + 8.0 * val(i + 1) - 8.0 * val(i - 1) + val(i - 2)) * inv;
  }
  return {g, std::move(d)};
}

SampledFunction lambda1(const FourierPotential& W) {
  if (W.grid().n() < 5) throw std::invalid_argument("lambda1: grid too coarse for the stencil");
  auto out = SampledFunction::zeros(W.grid());
  for (const auto& [k, wk] : W.modes()) {
    if (k == 0) continue;
    const auto* wmk = W.mode(-k);
    if (!wmk) continue;
    const auto dwk = derivative(wk);
    const double k3 = static_cast<double>(k) * k * k;
    std::vector<cplx> v(static_cast<std::size_t>(W.grid().n()));
    for (int i = 0; i < W.grid().n(); ++i) {
      // D W_k = -i W_k'
      v[static_cast<std::size_t>(i)] = -2.0 * (*wmk)[i] * (-I * dwk[i]) / k3;
    }
    out += SampledFunction(W.grid(), std::move(v));
  }
  return out;
}

SampledFunction effective_potential(const FourierPotential& W, Epsilon eps, int order) {
  if (order != 2 && order != 3) throw std::invalid_argument("effective_potential: order must be 2 or 3");
  const double e = eps.value;
  auto out = W.mean();
  if (e == 0.0) return out;
  out += cplx(-e * e) * lambda0(W);
  if (order == 3) out += cplx(-e * e * e) * lambda1(W);
  return out;
}

cplx integrate(const SampledFunction& f) {
  const Grid& g = f.grid();
  const int intervals = g.n() - 1;
  const double h = g.h();
  // Simpson over an even number of intervals, Simpson 3/8 on the last three
  // when the count is odd.
  const int simpson_end = (intervals % 2 == 0) ? intervals : intervals - 3;
  cplx s{0.0, 0.0};
  if (simpson_end > 0) {
    cplx acc = f[0] + f[simpson_end];
    for (int i = 1; i < simpson_end; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
    s += acc * (h / 3.0);
  }
  if (simpson_end != intervals) {
    const int j = simpson_end;
    s += (3.0 * h / 8.0) * (f[j] + 3.0 * f[j + 1] + 3.0 * f[j + 2] + f[j + 3]);
  }
  return s;
}

Grid default_grid(double support_radius, int n) {
  return Grid::spanning(-support_radius - kGridMargin, support_radius + kGridMargin, n);
}

double bump(double x, double a) {
  if (std::abs(x) >= a) return 0.0;
  return std::exp(-x * x / (a * a - x * x));
}

namespace presets {

FourierPotential figure3(int grid_n, bool include_mean) {
  const Grid g = default_grid(1.0, grid_n);
  std::map<int, SampledFunction> modes;
  if (include_mean) modes.emplace(0, SampledFunction::sample(g, [](double x) { return cplx(bump(x, 1.0)); }));
  modes.emplace(1, SampledFunction::sample(g, [](double x) { return bump(x, 1.0) * std::exp(I * (0.5 * x)); }));
  modes.emplace(-1, SampledFunction::sample(g, [](double x) { return bump(x, 1.0) * std::exp(-I * (0.5 * x)); }));
  return {1.0, std::move(modes), true};
}

}  // namespace presets

}  // namespace oscres
