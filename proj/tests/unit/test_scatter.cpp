#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "oscres/scatter.hpp"

using namespace oscres;

namespace {

CellProfile free_profile(double a, double b, int n) {
  return CellProfile::midpoint(a, b, n, [](double) { return cplx(0.0); });
}

CellProfile smooth_bump(int n) {
  return CellProfile::midpoint(-1.05, 1.05, n, [](double x) { return cplx(1.5 * bump(x, 1.0)); });
}

// Plane-wave matching at the two interfaces of V0 on [x0, x1].
std::pair<cplx, cplx> barrier_oracle(cplx V0, double x0, double x1, double lam) {
  const cplx q = std::sqrt(cplx(lam * lam) - V0);
  auto e = [](cplx k, double x) { return std::exp(I * k * x); };
  Eigen::Matrix4cd M;
  Eigen::Vector4cd rhs;
  // unknowns: r, A, B, t
  M << e(-lam, x0), -e(q, x0), -e(-q, x0), 0.0,
      -I * lam * e(-lam, x0), -I * q * e(q, x0), I * q * e(-q, x0), 0.0,
      0.0, e(q, x1), e(-q, x1), -e(lam, x1),
      0.0, I * q * e(q, x1), -I * q * e(-q, x1), -I * lam * e(lam, x1);
  rhs << -e(lam, x0), -I * lam * e(lam, x0), 0.0, 0.0;
  const Eigen::Vector4cd s = M.partialPivLu().solve(rhs);
  return {s(3), s(0)};
}

}  // namespace

TEST_CASE("cell_propagator closed forms") {
  const cplx lam(0.7, -0.3);
  const auto m = cell_propagator(lam * lam, 0.4, lam);
  CHECK(std::abs(m.m11 - 1.0) < 1e-15);
  CHECK(std::abs(m.m12 - 0.4) < 1e-15);
  CHECK(std::abs(m.m21) < 1e-15);
  CHECK(std::abs(m.m22 - 1.0) < 1e-15);

  const auto h = cell_propagator(0.0, 1.0, I);
  CHECK(std::abs(h.m11 - std::cosh(1.0)) < 1e-14);
  CHECK(std::abs(h.m12 - std::sinh(1.0)) < 1e-14);
  CHECK(std::abs(h.m21 - std::sinh(1.0)) < 1e-14);
  CHECK(std::abs(h.m22 - std::cosh(1.0)) < 1e-14);

  // Series and closed form agree across the switch-over.
  const auto a = cell_propagator(cplx(0.0), 1.0, cplx(0.0099, 0.0));
  const auto b = cell_propagator(cplx(0.0), 1.0, cplx(0.0101, 0.0));
  CHECK(std::abs(a.m21 - b.m21) < 1e-5);

  CHECK_THROWS_AS(cell_propagator(cplx(0.0), 0.0, cplx(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(cell_propagator(cplx(std::nan("")), 1.0, cplx(1.0)), std::invalid_argument);
}

TEST_CASE("transfer matrices have unit determinant") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> len(1e-3, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto m = cell_propagator(cplx(u(rng), u(rng)), len(rng), cplx(u(rng), u(rng)));
    const double scale = std::max({std::abs(m.m11 * m.m22), std::abs(m.m12 * m.m21), 1.0});
    worst = std::max(worst, std::abs(m.det() - 1.0) / scale);
  }
  CHECK(worst < 1e-10);
  const auto prod = transfer_matrix(smooth_bump(200), cplx(1.3, -0.4));
  CHECK(std::abs(prod.det() - 1.0) < 1e-10);
}

TEST_CASE("free propagation") {
  const double a = -1.2, b = 0.9;
  const cplx lam(1.1, -0.6);
  const auto st = propagate(free_profile(a, b, 37), lam, 1.0, -I * lam);
  const cplx sc = std::exp(st.log_scale);
  CHECK(std::abs(st.u * sc - std::exp(-I * lam * (b - a))) < 1e-12);
  CHECK(std::abs(st.du * sc + I * lam * std::exp(-I * lam * (b - a))) < 1e-12);
  const auto st2 = propagate(free_profile(a, b, 37), lam, 1.0, I * lam);
  CHECK(std::abs(st2.u * std::exp(st2.log_scale) - std::exp(I * lam * (b - a))) < 1e-12);

  const cplx d = resonance_determinant(free_profile(a, b, 10), lam).value();
  CHECK(std::abs(d - 2.0 * I * lam * std::exp(-I * lam * (b - a))) < 1e-12);

  const Grid g = Grid::spanning(-1.0, 1.0, 41);
  const auto [u, du] = propagate(SampledFunction::zeros(g), lam, 1.0, -I * lam);
  // Cells are centred on the nodes, so the span is 2 + h.
  CHECK(std::abs(u - std::exp(-I * lam * (2.0 + g.h()))) < 1e-12);
  CHECK(std::abs(du + I * lam * u) < 1e-12);
}

TEST_CASE("propagation converges at second order") {
  const cplx lam(1.0, -0.2);
  auto val = [&](int n) { return propagate(smooth_bump(n), lam, 1.0, -I * lam); };
  auto uval = [&](int n) {
    const auto s = val(n);
    return s.u * std::exp(s.log_scale);
  };
  const cplx u1 = uval(400), u2 = uval(800), u3 = uval(1600);
  const double ratio = std::abs(u1 - u2) / std::abs(u2 - u3);
  CHECK(ratio > 3.8);
  CHECK(ratio < 4.2);

  // Piecewise-constant potentials aligned with the cells are h-independent.
  auto well = [](int per) {
    std::vector<double> bps{-0.6};
    std::vector<cplx> vals;
    for (int i = 1; i <= per; ++i) {
      bps.push_back(-0.5 + 1.0 * i / per);
      vals.push_back(-2.0);
    }
    vals.insert(vals.begin(), 0.0);
    bps.insert(bps.begin() + 1, -0.5);
    bps.push_back(0.6);
    vals.push_back(0.0);
    return CellProfile::piecewise(bps, vals);
  };
  const cplx d1 = resonance_determinant(well(1), lam).value();
  const cplx d8 = resonance_determinant(well(8), lam).value();
  CHECK(std::abs(d1 - d8) < 1e-12 * std::abs(d1));
}

TEST_CASE("determinant conjugation symmetry for real potentials") {
  const auto p = smooth_bump(300);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> r(0.0, 5.0), th(0.0, 2.0 * kPi);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cplx lam = std::polar(r(rng), th(rng));
    const ScaledComplex a = resonance_determinant(p, lam);
    const ScaledComplex b = resonance_determinant(p, -std::conj(lam));
    worst = std::max(worst, std::abs(b.relative_to(a.log_scale) - std::conj(a.mantissa)) / std::abs(a.mantissa));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("transmission") {
  const auto free = free_profile(-1.0, 1.0, 16);
  const auto t0 = transmission(free, 1.7);
  CHECK(std::abs(t0.t - 1.0) < 1e-13);
  CHECK(std::abs(t0.r) < 1e-13);
  CHECK_THROWS_AS(transmission(free, 0.0), std::invalid_argument);

  // Unitarity for a real potential at real lambda.
  for (double lam : {0.3, 1.0, 2.5}) {
    const auto s = transmission(smooth_bump(2000), lam);
    CHECK(std::abs(std::norm(s.t) + std::norm(s.r) - 1.0) < 1e-8);
  }

  const double x0 = -0.3, x1 = 0.45;
  for (cplx V0 : {cplx(2.0), cplx(-3.0), cplx(0.5, 0.2)}) {
    for (double lam : {0.4, 1.3, 3.1}) {
      const auto prof = CellProfile::piecewise({-0.5, x0, x1, 0.6}, {0.0, V0, 0.0});
      const auto s = transmission(prof, lam);
      const auto [t, r] = barrier_oracle(V0, x0, x1, lam);
      CHECK(std::abs(s.t - t) < 1e-10);
      CHECK(std::abs(s.r - r) < 1e-10);
    }
  }
}

TEST_CASE("transmission error curves") {
  const auto fig = presets::figure3();
  const std::vector<double> lams{0.5, 1.0, 2.0};
  for (const auto& s : transmission_error_curve(fig, Epsilon(0.0), 3, lams, 500)) CHECK(s.error == 0.0);

  const auto mean_only = fig.without_mode(1).without_mode(-1);
  for (const auto& s : transmission_error_curve(mean_only, Epsilon(0.05), 2, lams, 500)) CHECK(s.error == 0.0);

  CHECK_THROWS_AS(transmission_error_curve(fig, Epsilon(0.05), 2, {0.0}, 500), std::invalid_argument);

  std::vector<double> sweep;
  for (int i = 0; i <= 45; ++i) sweep.push_back(0.5 + 0.1 * i);
  // At eps = 0.005 the exponentially small remainder of the smooth bump still
  // exceeds the eps^3 term; the acceptance suite reports that comparison. At
  // eps = 0.0025 the eps^3 correction must win clearly.
  double max2 = 0.0, max3 = 0.0;
  for (const auto& s : transmission_error_curve(fig, Epsilon(0.0025), 2, sweep)) max2 = std::max(max2, s.error);
  for (const auto& s : transmission_error_curve(fig, Epsilon(0.0025), 3, sweep)) max3 = std::max(max3, s.error);
  MESSAGE("eps = 0.0025: max |t - t_eff| order 2 = " << max2 << ", order 3 = " << max3);
  CHECK(max3 <= 0.1 * max2);
}
