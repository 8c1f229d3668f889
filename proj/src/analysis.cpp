#include "oscres/analysis.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace oscres {

namespace {

struct LineFit {
  double slope, intercept, r2;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (slope * x[i] + intercept);
    ssr += r * r;
  }
  // A constant series is fitted exactly.
  const double r2 = syy <= 1e-300 ? 1.0 : std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  return {slope, intercept, r2};
}

}  // namespace

OrderFit convergence_order(const std::vector<OrderSample>& samples) {
  if (samples.size() < 3) throw std::invalid_argument("convergence_order: need at least 3 samples");
  std::set<double> seen;
  for (const auto& s : samples) {
    if (!(s.eps > 0.0) || !std::isfinite(s.eps)) throw std::invalid_argument("convergence_order: eps must be positive");
    if (!(s.err >= 0.0) || !std::isfinite(s.err)) throw std::invalid_argument("convergence_order: err must be >= 0");
    if (!seen.insert(s.eps).second) throw std::invalid_argument("convergence_order: repeated eps");
  }
  OrderFit fit;
  fit.samples = samples;
  if (std::any_of(samples.begin(), samples.end(), [](const OrderSample& s) { return s.err == 0.0; })) {
    fit.exponent = std::numeric_limits<double>::infinity();
    fit.r_squared = 1.0;
    return fit;
  }
  std::vector<double> x, y;
  for (const auto& s : samples) {
    x.push_back(std::log(s.eps));
    y.push_back(std::log(s.err));
  }
  const LineFit lf = least_squares(x, y);
  fit.exponent = lf.slope;
  fit.intercept = lf.intercept;
  fit.r_squared = lf.r2;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  fit.reliable = samples.size() >= 4 && *hi - *lo >= std::log(10.0) - 1e-12 && fit.r_squared >= 0.98;
  return fit;
}

ZeroEnergyPrediction zero_energy_prediction(const FourierPotential& W, Epsilon eps) {
  if (const auto* w0 = W.mode(0); w0 != nullptr && w0->max_abs() > 1e-10) {
    throw std::invalid_argument("zero_energy_prediction: W_0 must vanish");
  }
  ZeroEnergyPrediction p;
  p.int_lambda0 = integrate(lambda0(W)).real();
  p.int_lambda1 = integrate(lambda1(W)).real();
  const double e = eps.value;
  p.momentum_order2 = I * (e * e / 2.0) * p.int_lambda0;
  p.momentum = p.momentum_order2 + I * (e * e * e / 2.0) * p.int_lambda1;
  p.energy_series = -std::pow(e, 4) / 4.0 * p.int_lambda0 * p.int_lambda0 -
                    std::pow(e, 5) / 4.0 * p.int_lambda0 * p.int_lambda1;
  p.energy_squared = p.momentum * p.momentum;
  return p;
}

ExpansionPrediction expansion_prediction_general(const FourierPotential& W, cplx lambda0_value,
                                                 const SampledFunction& u, const SampledFunction& v) {
  if (!(u.grid() == W.grid()) || !(v.grid() == W.grid())) {
    throw std::invalid_argument("expansion_prediction_general: u, v must live on the potential grid");
  }
  const auto l0 = lambda0(W);
  const auto l1 = lambda1(W);
  std::vector<cplx> a(l0.values().size()), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cplx uv = u.values()[i] * v.values()[i];
    a[i] = l0.values()[i] * uv;
    b[i] = l1.values()[i] * uv;
  }
  return {lambda0_value, I * integrate(SampledFunction(W.grid(), std::move(a))),
          I * integrate(SampledFunction(W.grid(), std::move(b)))};
}

double Pairing::max_distance() const {
  double m = 0.0;
  for (const auto& p : pairs) m = std::max(m, p.distance);
  return m;
}

Pairing pair_resonances(const std::vector<Resonance>& set_a, const std::vector<Resonance>& set_b) {
  std::vector<bool> used_a(set_a.size()), used_b(set_b.size());
  Pairing out;
  for (;;) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < set_a.size(); ++i) {
      if (used_a[i]) continue;
      for (std::size_t j = 0; j < set_b.size(); ++j) {
        if (used_b[j]) continue;
        const double d = std::abs(set_a[i].lambda - set_b[j].lambda);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (!std::isfinite(best)) break;
    used_a[bi] = used_b[bj] = true;
    out.pairs.push_back({set_a[bi], set_b[bj], best});
  }
  for (std::size_t i = 0; i < set_a.size(); ++i) {
    if (!used_a[i]) out.unpaired_a.push_back(set_a[i]);
  }
  for (std::size_t j = 0; j < set_b.size(); ++j) {
    if (!used_b[j]) out.unpaired_b.push_back(set_b[j]);
  }
  return out;
}

Resonance track_resonance(const AnalyticFunction& f, cplx seed, double verify_radius, const RootFindConfig& cfg) {
  Resonance r = refine_newton(f, seed, cfg, Method::ode_det, std::max(1.0, 10.0 * verify_radius));
  const int count = count_zeros_disk(f, r.lambda, verify_radius, cfg);
  if (count != 1) {
    std::ostringstream os;
    os << "track_resonance: " << count << " zeros within " << verify_radius << " of " << r.lambda;
    throw NumericalError(os.str());
  }
  return r;
}

AnalyticFunction determinant_of(CellProfile profile) {
  return [p = std::move(profile)](cplx z) { return resonance_determinant(p, z); };
}

namespace {

void check_eps_list(const std::vector<double>& eps_list, const char* what) {
  if (eps_list.empty()) throw std::invalid_argument(std::string(what) + ": empty eps list");
  for (double e : eps_list) {
    if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument(std::string(what) + ": eps must be positive");
  }
}

CellProfile midpoint_profile(const SampledFunction& f, double a, double b, int n) {
  return CellProfile::midpoint(a, b, n, [&](double x) { return f.at(x); });
}

}  // namespace

ExpansionStudy expansion_study(const FourierPotential& W, const std::vector<double>& eps_list,
                               const SearchRegion& window, double verify_radius, const RootFindConfig& cfg) {
  check_eps_list(eps_list, "expansion_study");
  const auto [a, b] = matching_interval(W);
  const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
  const int n0 = cells_for(W, Epsilon(eps_min), a, b);
  const LocateResult loc = locate_zeros(determinant_of(midpoint_profile(W.mean(), a, b, n0)), window, cfg);
  if (!loc.consistent()) throw NumericalError("expansion_study: " + loc.diagnostic);
  if (loc.roots.empty()) throw NumericalError("expansion_study: W_0 has no resonance in the window");
  ExpansionStudy out{loc.roots.front(), {}};
  const cplx seed = out.lambda0.lambda;
  for (double eps : eps_list) {
    const Epsilon e(eps);
    const int n = cells_for(W, e, a, b);
    const auto v_eps = determinant_of(oscillatory_profile(W, e, a, b, n));
    const auto v2 = determinant_of(midpoint_profile(effective_potential(W, e, 2), a, b, n));
    const auto v3 = determinant_of(midpoint_profile(effective_potential(W, e, 3), a, b, n));
    const cplx l = track_resonance(v_eps, seed, verify_radius, cfg).lambda;
    out.tracked.push_back({eps, n, l, track_resonance(v2, l, verify_radius, cfg).lambda,
                           track_resonance(v3, l, verify_radius, cfg).lambda});
  }
  return out;
}

std::vector<ZeroEnergySample> zero_energy_study(const FourierPotential& W, const std::vector<double>& eps_list,
                                                const SearchRegion& window, const RootFindConfig& cfg) {
  check_eps_list(eps_list, "zero_energy_study");
  const auto [a, b] = matching_interval(W);
  std::vector<ZeroEnergySample> out;
  for (double eps : eps_list) {
    const Epsilon e(eps);
    const auto p = zero_energy_prediction(W, e);
    const auto f = determinant_of(oscillatory_profile(W, e, a, b, cells_for(W, e, a, b)));
    const LocateResult loc = locate_zeros(f, window, cfg);
    if (!loc.consistent()) throw NumericalError("zero_energy_study: " + loc.diagnostic);
    if (loc.roots.empty()) throw NumericalError("zero_energy_study: no resonance in the window");
    const auto nearest = std::min_element(loc.roots.begin(), loc.roots.end(), [&](const auto& x, const auto& y) {
      return std::abs(x.lambda - p.momentum) < std::abs(y.lambda - p.momentum);
    });
    out.push_back({eps, *nearest, p});
  }
  return out;
}

EscapeFit escape_fit(const ProfileBuilder& build, const std::vector<double>& eps_list, const EscapeConfig& cfg) {
  if (eps_list.size() < 2) throw std::invalid_argument("escape_fit: need at least two eps values");
  EscapeFit fit;
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw std::invalid_argument("escape_fit: eps must be positive");
    const AnalyticFunction f = determinant_of(build(eps));
    RootFindConfig rc = cfg.roots;
    const double radius = std::pow(eps, cfg.disk_exponent);
    rc.exclusion_disks.push_back({0.0, radius});
    const LocateResult loc = locate_zeros(f, cfg.window, rc, Method::ode_det);
    if (!loc.consistent()) throw NumericalError("escape_fit: " + loc.diagnostic);
    EscapeSample s{eps, -std::numeric_limits<double>::infinity(), static_cast<int>(loc.roots.size()), 0, 0, loc.roots};
    for (const auto& r : loc.roots) s.max_im = std::max(s.max_im, r.lambda.imag());
    s.in_disk = count_zeros_disk(f, 0.0, radius, rc);
    fit.samples.push_back(std::move(s));
  }
  std::vector<double> x, y;
  for (const auto& s : fit.samples) {
    if (s.located == 0) continue;
    x.push_back(std::log(1.0 / s.eps));
    y.push_back(s.max_im);
  }
  if (x.size() >= 2) {
    const LineFit lf = least_squares(x, y);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r_squared = lf.r2;
    for (auto& s : fit.samples) {
      const double line = fit.intercept + fit.slope * std::log(1.0 / s.eps);
      s.above_fit = static_cast<int>(std::count_if(s.roots.begin(), s.roots.end(), [&](const Resonance& r) {
        return r.lambda.imag() > line + 1e-9;
      }));
    }
  }
  // Sort by decreasing eps and check strict decrease of max Im.
  auto ordered = fit.samples;
  std::sort(ordered.begin(), ordered.end(), [](const EscapeSample& a, const EscapeSample& b) { return a.eps > b.eps; });
  fit.strictly_decreasing = true;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i].located == 0) fit.strictly_decreasing = false;
    if (i > 0 && !(ordered[i].max_im < ordered[i - 1].max_im)) fit.strictly_decreasing = false;
  }
  return fit;
}

EscapeFit escape_fit(const FourierPotential& W, const std::vector<double>& eps_list, const EscapeConfig& cfg) {
  if (const auto* w0 = W.mode(0); w0 != nullptr && w0->max_abs() > 1e-10) {
    throw std::invalid_argument("escape_fit: W_0 must vanish");
  }
  return escape_fit(
      [&W](double eps) {
        const auto [a, b] = matching_interval(W);
        const Epsilon e(eps);
        return oscillatory_profile(W, e, a, b, cells_for(W, e, a, b));
      },
      eps_list, cfg);
}

cplx resolvent_symbol(int k, double xi, cplx lambda, double eps) {
  const double p = xi + k / eps;
  const cplx d = p * p - lambda * lambda;
  if (d == cplx{0.0, 0.0}) throw std::domain_error("resolvent_symbol: (xi + k/eps)^2 = lambda^2");
  return 1.0 / d;
}

SymbolExpansion resolvent_symbol_expansion(int k, double xi, cplx lambda, double eps, int J) {
  if (k == 0) throw std::invalid_argument("resolvent_symbol_expansion: k must be nonzero");
  if (J < 0) throw std::invalid_argument("resolvent_symbol_expansion: J must be >= 0");
  if (!(eps > 0.0)) throw std::invalid_argument("resolvent_symbol_expansion: eps must be positive");
  const double k2 = static_cast<double>(k) * k;
  const cplx a = 2.0 * k * xi / k2;
  const cplx b = (xi * xi - lambda * lambda) / k2;
  const cplx denom = 1.0 + a * eps + b * eps * eps;
  if (denom == cplx{0.0, 0.0}) throw std::domain_error("resolvent_symbol_expansion: symbol is singular");
  SymbolExpansion out;
  out.u.resize(static_cast<std::size_t>(J) + 2);
  out.u[0] = 1.0;
  out.u[1] = -a;
  for (int j = 2; j <= J + 1; ++j) {
    out.u[static_cast<std::size_t>(j)] = -a * out.u[static_cast<std::size_t>(j - 1)] - b * out.u[static_cast<std::size_t>(j - 2)];
  }
  const double pre = eps * eps / k2;
  cplx sum{0.0};
  double ej = 1.0;
  for (int j = 0; j < J; ++j) {
    sum += out.u[static_cast<std::size_t>(j)] * ej;
    ej *= eps;
  }
  // ej == eps^J here
  const cplx uj = out.u[static_cast<std::size_t>(J)];
  const cplx uj1 = out.u[static_cast<std::size_t>(J) + 1];
  out.partial_sum = pre * sum;
  out.remainder = pre * (uj + uj1 * eps + a * uj * eps) * ej / denom;
  return out;
}

namespace {

nlohmann::ordered_json verdict_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["law"] = v.law;
  j["samples"] = nlohmann::ordered_json::array();
  for (const auto& s : v.samples) j["samples"].push_back({{"eps", s.eps}, {"err", s.err}});
  if (std::isfinite(v.fitted_exponent)) {
    j["fitted_exponent"] = v.fitted_exponent;
  } else {
    j["fitted_exponent"] = "inf";
  }
  j["r2"] = v.r2;
  j["pass"] = v.pass;
  j["threshold"] = v.threshold;
  return j;
}

}  // namespace

std::string to_json(const Verdict& v) { return verdict_json(v).dump(2); }

std::string to_json(const std::vector<Verdict>& vs) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& v : vs) arr.push_back(verdict_json(v));
  return arr.dump(2);
}

}  // namespace oscres
