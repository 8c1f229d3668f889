#include "oscres/scatter.hpp"

#include <algorithm>
#include <cmath>

namespace oscres {

namespace {

constexpr double kSeriesSwitch = 1e-4;
constexpr double kRenormHigh = 1e100;
constexpr double kRenormLow = 1e-100;

// C(z) = cosh(sqrt z), S(z) = sinh(sqrt z)/sqrt z.
void cosh_sinhc(cplx z, cplx& c, cplx& s) {
  if (std::abs(z) < kSeriesSwitch) {
    // 8 terms of the even power series.
    cplx term_c{1.0}, term_s{1.0};
    c = term_c;
    s = term_s;
    for (int k = 1; k < 8; ++k) {
      term_c *= z / static_cast<double>((2 * k - 1) * (2 * k));
      term_s *= z / static_cast<double>((2 * k) * (2 * k + 1));
      c += term_c;
      s += term_s;
    }
    return;
  }
  const cplx r = std::sqrt(z);
  c = std::cosh(r);
  s = std::sinh(r) / r;
}

void check_finite(cplx z, const char* what) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw std::invalid_argument(std::string(what) + ": non-finite input");
  }
}

}  // namespace

CellProfile::CellProfile(double a, std::vector<double> widths, std::vector<cplx> values)
    : a_(a), b_(a), widths_(std::move(widths)), values_(std::move(values)) {
  if (widths_.empty()) throw std::invalid_argument("CellProfile: no cells");
  if (widths_.size() != values_.size()) throw std::invalid_argument("CellProfile: widths/values size mismatch");
  for (double w : widths_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("CellProfile: cell widths must be positive");
    b_ += w;
  }
}

CellProfile CellProfile::midpoint(double a, double b, int n, const std::function<cplx(double)>& v) {
  if (n < 1 || !(b > a)) throw std::invalid_argument("CellProfile::midpoint: empty interval");
  const double h = (b - a) / n;
  std::vector<double> w(static_cast<std::size_t>(n), h);
  std::vector<cplx> vals(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) vals[static_cast<std::size_t>(i)] = v(a + (i + 0.5) * h);
  return {a, std::move(w), std::move(vals)};
}

CellProfile CellProfile::from_sampled(const SampledFunction& f) {
  const Grid& g = f.grid();
  std::vector<double> w(static_cast<std::size_t>(g.n()), g.h());
  return {g.x_min() - 0.5 * g.h(), std::move(w), {f.values().begin(), f.values().end()}};
}

CellProfile CellProfile::piecewise(const std::vector<double>& breakpoints, std::vector<cplx> values) {
  if (breakpoints.size() != values.size() + 1) {
    throw std::invalid_argument("CellProfile::piecewise: need one more breakpoint than values");
  }
  std::vector<double> w(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) w[i] = breakpoints[i + 1] - breakpoints[i];
  return {breakpoints.front(), std::move(w), std::move(values)};
}

bool CellProfile::is_real() const {
  return std::all_of(values_.begin(), values_.end(), [](cplx v) { return v.imag() == 0.0; });
}

TransferMatrix cell_propagator(cplx v_const, double length, cplx lambda) {
  check_finite(v_const, "cell_propagator");
  check_finite(lambda, "cell_propagator");
  if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("cell_propagator: length must be positive");
  const cplx mu = v_const - lambda * lambda;
  cplx c, s;
  cosh_sinhc(length * length * mu, c, s);
  return {c, length * s, length * mu * s, c};
}

TransferMatrix transfer_matrix(const CellProfile& V, cplx lambda) {
  TransferMatrix m;
  for (std::size_t i = 0; i < V.size(); ++i) m = cell_propagator(V.values()[i], V.widths()[i], lambda) * m;
  return m;
}

PropagatedState propagate(const CellProfile& V, cplx lambda, cplx u0, cplx du0) {
  check_finite(lambda, "propagate");
  PropagatedState st{u0, du0, 0.0};
  const cplx lam2 = lambda * lambda;
  for (std::size_t i = 0; i < V.size(); ++i) {
    const double s = V.widths()[i];
    const cplx mu = V.values()[i] - lam2;
    cplx c, sh;
    cosh_sinhc(s * s * mu, c, sh);
    const cplx u = c * st.u + s * sh * st.du;
    const cplx du = s * mu * sh * st.u + c * st.du;
    st.u = u;
    st.du = du;
    const double norm = std::max(std::abs(u), std::abs(du));
    if (norm > kRenormHigh || (norm < kRenormLow && norm > 0.0)) {
      st.u /= norm;
      st.du /= norm;
      st.log_scale += std::log(norm);
    }
  }
  return st;
}

std::pair<cplx, cplx> propagate(const SampledFunction& V, cplx lambda, cplx u0, cplx du0) {
  const auto st = propagate(CellProfile::from_sampled(V), lambda, u0, du0);
  const double f = std::exp(st.log_scale);
  return {st.u * f, st.du * f};
}

ScaledComplex resonance_determinant(const CellProfile& V, cplx lambda) {
  const auto st = propagate(V, lambda, 1.0, -I * lambda);
  return {I * lambda * st.u - st.du, st.log_scale};
}

ScaledComplex resonance_determinant(const SampledFunction& V, cplx lambda) {
  return resonance_determinant(CellProfile::from_sampled(V), lambda);
}

ScatteringCoefficients transmission(const CellProfile& V, cplx lambda) {
  check_finite(lambda, "transmission");
  if (lambda == cplx{0.0, 0.0}) throw std::invalid_argument("transmission: lambda = 0");
  const double a = V.a();
  const double b = V.b();
  const cplx eb = std::exp(I * lambda * b);
  cplx u = eb;
  cplx du = I * lambda * eb;
  double log_scale = 0.0;
  const cplx lam2 = lambda * lambda;
  for (std::size_t i = V.size(); i-- > 0;) {
    const double s = V.widths()[i];
    const cplx mu = V.values()[i] - lam2;
    cplx c, sh;
    cosh_sinhc(s * s * mu, c, sh);
    // inverse of [[c, s sh], [s mu sh, c]]
    const cplx nu = c * u - s * sh * du;
    const cplx ndu = -s * mu * sh * u + c * du;
    u = nu;
    du = ndu;
    const double norm = std::max(std::abs(u), std::abs(du));
    if (norm > kRenormHigh || (norm < kRenormLow && norm > 0.0)) {
      u /= norm;
      du /= norm;
      log_scale += std::log(norm);
    }
  }
  const cplx ratio = du / (I * lambda);
  const cplx in_amp = 0.5 * (u + ratio) * std::exp(-I * lambda * a);
  const cplx refl_amp = 0.5 * (u - ratio) * std::exp(I * lambda * a);
  if (std::abs(in_amp) == 0.0 || !std::isfinite(std::abs(in_amp))) {
    throw TransmissionPole("transmission: incoming amplitude vanishes (pole of t)");
  }
  return {lambda, std::exp(-log_scale) / in_amp, refl_amp / in_amp};
}

ScatteringCoefficients transmission(const SampledFunction& V, cplx lambda) {
  return transmission(CellProfile::from_sampled(V), lambda);
}

CellProfile oscillatory_profile(const FourierPotential& W, Epsilon eps, double a, double b, int n) {
  if (eps.value == 0.0) {
    const auto w0 = W.mean();
    return CellProfile::midpoint(a, b, n, [&](double x) { return w0.at(x); });
  }
  return CellProfile::midpoint(a, b, n, [&](double x) { return evaluate_oscillatory(W, eps, x); });
}

std::pair<double, double> matching_interval(const FourierPotential& W) {
  return {-W.support_radius() - kGridMargin, W.support_radius() + kGridMargin};
}

int cells_for(const FourierPotential& W, Epsilon eps, double a, double b, int per_period, int min_cells) {
  int kmax = 0;
  for (const auto& [k, m] : W.modes()) kmax = std::max(kmax, std::abs(k));
  if (kmax == 0 || eps.value == 0.0) return min_cells;
  const double period = 2.0 * kPi * eps.value / kmax;
  const double n = std::ceil((b - a) / period * per_period);
  return std::max(min_cells, static_cast<int>(n));
}

std::vector<TransmissionErrorSample> transmission_error_curve(const FourierPotential& W, Epsilon eps,
                                                              int order, const std::vector<double>& lambdas,
                                                              int n_cells) {
  const auto [a, b] = matching_interval(W);
  const int n = n_cells > 0 ? n_cells : cells_for(W, eps, a, b);
  const auto v_eps = oscillatory_profile(W, eps, a, b, n);
  const auto v_eff_s = effective_potential(W, eps, order);
  const auto v_eff = CellProfile::midpoint(a, b, n, [&](double x) { return v_eff_s.at(x); });
  std::vector<TransmissionErrorSample> out;
  out.reserve(lambdas.size());
  for (double lam : lambdas) {
    if (lam == 0.0 || !std::isfinite(lam)) throw std::invalid_argument("transmission_error_curve: lambda must be real and nonzero");
    const auto te = transmission(v_eps, lam);
    const auto tf = transmission(v_eff, lam);
    out.push_back({lam, te.t, tf.t, std::abs(te.t - tf.t)});
  }
  return out;
}

}  // namespace oscres
