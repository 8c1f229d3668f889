#include "cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "oscres/analysis.hpp"
#include "oscres/potential_spec.hpp"
#include "oscres/stepmodel.hpp"

namespace oscres::cli {

namespace {

using nlohmann::ordered_json;

constexpr double kPairTolerance = 1e-6;
constexpr double kMeanZeroTolerance = 1e-10;

const std::vector<double> kEscapeEps{0.2, 0.1, 0.05, 0.025};
const std::vector<double> kTrackingEps{0.04, 0.02, 0.01, 0.005};
const std::vector<double> kZeroEnergyEps{0.1, 0.07, 0.05, 0.035};
const std::vector<double> kTransmissionEps{0.005};

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }

  CsvWriter& real(double x) { return field(format_real(x)); }
  CsvWriter& integer(long long x) { return field(std::to_string(x)); }
  CsvWriter& text(const std::string& s) { return field(s); }
  CsvWriter& complex(cplx z) { return real(z.real()).real(z.imag()); }
  void end_row() {
    os_ << '\n';
    first_ = true;
  }
  [[nodiscard]] std::string str() const { return os_.str(); }

 private:
  CsvWriter& field(const std::string& s) {
    os_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }
  std::ostringstream os_;
  bool first_ = true;
};

ordered_json complex_json(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

ordered_json exponent_json(double p) { return std::isfinite(p) ? ordered_json(p) : ordered_json("inf"); }

/// Verdict record for an order fit with exponent in [lo, hi] and, when
/// min_r2 > 0, r^2 >= min_r2.
ordered_json order_verdict(const std::string& law, const OrderFit& fit, double lo, double hi, double min_r2,
                           bool& pass) {
  bool ok = fit.exponent >= lo && fit.exponent <= hi;
  if (min_r2 > 0.0) ok = ok && fit.r_squared >= min_r2;
  pass = pass && ok;
  std::ostringstream th;
  th << "exponent in [" << lo << ", " << hi << "]";
  if (min_r2 > 0.0) th << ", r2 >= " << min_r2;
  ordered_json j;
  j["law"] = law;
  j["samples"] = ordered_json::array();
  for (const auto& s : fit.samples) j["samples"].push_back({{"eps", s.eps}, {"err", s.err}});
  j["fitted_exponent"] = exponent_json(fit.exponent);
  j["r2"] = fit.r_squared;
  j["pass"] = ok;
  j["threshold"] = th.str();
  return j;
}

RootFindConfig root_config(const RunConfig& cfg) {
  RootFindConfig rc;
  rc.jobs = cfg.jobs;
  rc.seed = cfg.seed;
  return rc;
}

const std::vector<double>& eps_or(const RunConfig& cfg, const std::vector<double>& fallback) {
  return cfg.eps_list.empty() ? fallback : cfg.eps_list;
}

PotentialSpec require_spec(const RunConfig& cfg) {
  if (!cfg.potential_spec_path) throw UsageError("this command needs --spec");
  return load_potential_spec(*cfg.potential_spec_path);
}

bool mean_vanishes(const FourierPotential& W) {
  const SampledFunction* w0 = W.mode(0);
  if (w0 == nullptr) return true;
  for (cplx v : w0->values()) {
    if (std::abs(v) > kMeanZeroTolerance) return false;
  }
  return true;
}

void require_positive(const std::vector<double>& eps, std::size_t min_count, const char* what) {
  if (eps.size() < min_count) {
    throw UsageError(std::string(what) + " needs at least " + std::to_string(min_count) + " eps values");
  }
  for (double e : eps) {
    if (!(e > 0.0)) throw UsageError(std::string(what) + " needs positive eps values");
  }
}

// --- commands ------------------------------------------------------------------

CommandOutput cmd_effpot(const RunConfig& cfg) {
  const PotentialSpec spec = require_spec(cfg);
  if (cfg.eps_list.empty()) throw UsageError("effpot needs --eps");
  CsvWriter csv({"eps", "x", "Veff_re", "Veff_im"});
  const Grid& g = spec.sampled.grid();
  for (double eps : cfg.eps_list) {
    const SampledFunction v = effective_potential(spec.sampled, Epsilon(eps), cfg.order);
    const auto vals = v.values();
    for (int i = 0; i < g.n(); ++i) {
      csv.real(eps).real(g.node(i)).complex(vals[static_cast<std::size_t>(i)]);
      csv.end_row();
    }
  }
  return {csv.str(), "", true};
}

LocateResult locate_checked(const AnalyticFunction& f, const SearchRegion& region, const RootFindConfig& rc,
                            Method method, double eps) {
  LocateResult loc = locate_zeros(f, region, rc, method);
  if (!loc.consistent()) {
    ordered_json d;
    d["eps"] = eps;
    d["method"] = std::string(to_string(method));
    d["total_count"] = loc.total_count;
    d["located"] = loc.roots.size();
    d["diagnostic"] = loc.diagnostic;
    throw NumericalError("count/locate mismatch: " + d.dump());
  }
  return loc;
}

CommandOutput cmd_resonances(const RunConfig& cfg) {
  const PotentialSpec spec = require_spec(cfg);
  if (cfg.eps_list.empty()) throw UsageError("resonances needs --eps");
  const SearchRegion region = cfg.region.value_or(SearchRegion(-6.0, 6.0, -6.0, -0.01));
  const RootFindConfig rc = root_config(cfg);
  const bool both = cfg.method == MethodChoice::both;
  std::vector<std::string> header{"eps", "method", "re", "im", "residual", "mult"};
  if (both) header.emplace_back("paired_distance");
  CsvWriter csv(header);
  ordered_json per_eps = ordered_json::array();
  bool pass = true;
  for (double eps : cfg.eps_list) {
    const Epsilon e(eps);
    std::vector<Resonance> ode, fred;
    if (cfg.method != MethodChoice::fredholm) {
      ode = locate_checked(determinant_of(spec_profile(spec, e)), region, rc, Method::ode_det, eps).roots;
    }
    if (cfg.method != MethodChoice::ode) {
      const KernelPotential K = spec_kernel(spec, e);
      const int nodes = cfg.nodes;
      const AnalyticFunction f = [K, nodes](cplx z) { return entire_det(K, z, nodes); };
      fred = locate_checked(f, region, rc, Method::fredholm_det, eps).roots;
    }
    if (!both) {
      for (const auto& r : ode.empty() ? fred : ode) {
        csv.real(eps).text(std::string(to_string(r.method))).complex(r.lambda).real(r.residual).integer(r.multiplicity);
        csv.end_row();
      }
      continue;
    }
    const Pairing pairing = pair_resonances(ode, fred);
    const auto row = [&](const Resonance& r, double dist) {
      csv.real(eps).text(std::string(to_string(r.method))).complex(r.lambda).real(r.residual).integer(r.multiplicity);
      csv.real(dist).end_row();
    };
    for (const auto& p : pairing.pairs) {
      row(p.a, p.distance);
      row(p.b, p.distance);
    }
    for (const auto& r : pairing.unpaired_a) row(r, std::numeric_limits<double>::quiet_NaN());
    for (const auto& r : pairing.unpaired_b) row(r, std::numeric_limits<double>::quiet_NaN());
    const bool ok =
        pairing.unpaired_a.empty() && pairing.unpaired_b.empty() && pairing.max_distance() < kPairTolerance;
    pass = pass && ok;
    per_eps.push_back({{"eps", eps},
                       {"paired", pairing.pairs.size()},
                       {"unpaired", pairing.unpaired_a.size() + pairing.unpaired_b.size()},
                       {"max_distance", pairing.max_distance()},
                       {"pass", ok}});
  }
  std::string summary;
  if (both) {
    ordered_json j;
    j["law"] = "ODE and Fredholm resonance sets pair off";
    j["samples"] = per_eps;
    j["pass"] = pass;
    j["threshold"] = "no unpaired roots, max distance < 1e-6";
    summary = j.dump(2);
  }
  return {csv.str(), summary, pass};
}

CommandOutput cmd_step(const RunConfig& cfg) {
  CsvWriter csv({"n", "re", "im", "prediction_re", "prediction_im", "residual", "disk_count", "im_over_log_n"});
  std::vector<double> ratios;
  bool disks_ok = true;
  for (int n : cfg.step_n) {
    const StepResonance s = find_step_resonance(StepIndex(n), root_config(cfg));
    const double ratio = s.resonance.lambda.imag() / -std::log(static_cast<double>(n));
    ratios.push_back(ratio);
    disks_ok = disks_ok && s.disk_count == 1;
    csv.integer(n).complex(s.resonance.lambda).complex(s.prediction).real(s.resonance.residual).integer(s.disk_count);
    csv.real(ratio).end_row();
  }
  bool monotone = true;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    monotone = monotone && std::abs(ratios[i] - 1.0) < std::abs(ratios[i - 1] - 1.0);
  }
  const bool in_band = ratios.back() >= 0.8 && ratios.back() <= 1.3;
  const bool pass = disks_ok && monotone && in_band;
  ordered_json j;
  j["law"] = "Im lambda_n / (-ln n) tends to 1";
  j["samples"] = ordered_json::array();
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    j["samples"].push_back({{"n", cfg.step_n[i]}, {"im_over_log_n", ratios[i]}});
  }
  j["pass"] = pass;
  j["threshold"] = "one zero per verification disk, monotone toward 1, last value in [0.8, 1.3]";
  return {csv.str(), j.dump(2), pass};
}

CommandOutput cmd_transmission(const RunConfig& cfg) {
  const PotentialSpec spec = require_spec(cfg);
  const auto& eps_list = eps_or(cfg, kTransmissionEps);
  require_positive(eps_list, 1, "transmission");
  const FourierPotential& W = spec.sampled;
  const auto [a, b] = matching_interval(W);
  const std::vector<double> lambdas = cfg.sweep.values();
  CsvWriter csv({"eps", "lambda", "t_re", "t_im", "r_re", "r_im", "err"});
  ordered_json samples = ordered_json::array();
  bool pass = true;
  for (double eps : eps_list) {
    const Epsilon e(eps);
    const int n = cells_for(W, e, a, b);
    const CellProfile v_eps = oscillatory_profile(W, e, a, b, n);
    const auto curve = transmission_error_curve(W, e, cfg.order, lambdas, n);
    const int other = cfg.order == 3 ? 2 : 3;
    double max_this = 0.0, max_other = 0.0;
    for (const auto& s : curve) {
      const ScatteringCoefficients c = transmission(v_eps, s.lambda);
      csv.real(eps).real(s.lambda).complex(s.t_eps).complex(c.r).real(s.error).end_row();
      max_this = std::max(max_this, s.error);
    }
    for (const auto& s : transmission_error_curve(W, e, other, lambdas, n)) max_other = std::max(max_other, s.error);
    const double max3 = cfg.order == 3 ? max_this : max_other;
    const double max2 = cfg.order == 3 ? max_other : max_this;
    const bool ok = max3 <= max2;
    pass = pass && ok;
    samples.push_back({{"eps", eps}, {"max_err_order2", max2}, {"max_err_order3", max3}, {"pass", ok}});
  }
  ordered_json j;
  j["law"] = "order-3 effective potential transmits at least as accurately as order 2";
  j["samples"] = samples;
  j["pass"] = pass;
  j["threshold"] = "max |t - t_eff| order 3 <= order 2";
  return {csv.str(), j.dump(2), pass};
}

CommandOutput cmd_escape(const RunConfig& cfg) {
  const auto& eps_list = eps_or(cfg, kEscapeEps);
  require_positive(eps_list, 2, "escape");
  EscapeConfig ec;
  ec.window = cfg.region.value_or(SearchRegion(-6.0, 6.0, -12.0, 0.0));
  ec.roots = root_config(cfg);
  EscapeFit fit;
  if (cfg.potential_spec_path) {
    const PotentialSpec spec = load_potential_spec(*cfg.potential_spec_path);
    if (!mean_vanishes(spec.sampled)) throw SpecError("escape needs a spec whose k = 0 mode vanishes");
    fit = escape_fit([&spec](double eps) { return spec_profile(spec, Epsilon(eps)); }, eps_list, ec);
  } else {
    fit = escape_fit(step_family_profile, eps_list, ec);
  }
  CsvWriter csv({"eps", "re", "im", "residual", "mult"});
  ordered_json samples = ordered_json::array();
  bool one_in_disk = true;
  for (const auto& s : fit.samples) {
    for (const auto& r : s.roots) {
      csv.real(s.eps).complex(r.lambda).real(r.residual).integer(r.multiplicity).end_row();
    }
    one_in_disk = one_in_disk && s.in_disk == 1;
    samples.push_back({{"eps", s.eps},
                       {"max_im", s.max_im},
                       {"located", s.located},
                       {"in_disk", s.in_disk},
                       {"above_fit", s.above_fit}});
  }
  const bool pass = fit.strictly_decreasing && fit.slope < -0.05 && one_in_disk;
  ordered_json j;
  j["law"] = "max Im lambda decreases in ln(1/eps)";
  j["samples"] = samples;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r2"] = fit.r_squared;
  j["pass"] = pass;
  j["threshold"] = "strictly decreasing, slope < -0.05, one resonance in each origin disk";
  return {csv.str(), j.dump(2), pass};
}

CommandOutput expansion_tracking(const RunConfig& cfg, const FourierPotential& W) {
  const auto& eps_list = eps_or(cfg, kTrackingEps);
  require_positive(eps_list, 3, "expansion");
  const SearchRegion window = cfg.region.value_or(SearchRegion(-4.0, 4.0, -1.5, 1.0));
  const ExpansionStudy study = expansion_study(W, eps_list, window, 0.1, root_config(cfg));
  std::vector<OrderSample> d0, d2, d3;
  ordered_json tracked = ordered_json::array();
  for (const auto& t : study.tracked) {
    d0.push_back({t.eps, std::abs(t.lambda_eps - study.lambda0.lambda)});
    d2.push_back({t.eps, std::abs(t.lambda_eps - t.mu2)});
    d3.push_back({t.eps, std::abs(t.lambda_eps - t.mu3)});
    tracked.push_back({{"eps", t.eps},
                       {"cells", t.cells},
                       {"lambda_eps", complex_json(t.lambda_eps)},
                       {"mu_order2", complex_json(t.mu2)},
                       {"mu_order3", complex_json(t.mu3)}});
  }
  bool pass = true;
  ordered_json verdicts = ordered_json::array();
  verdicts.push_back(order_verdict("|lambda_eps - lambda_0| = O(eps^2)", convergence_order(d0), 1.7, 2.3, 0.98, pass));
  verdicts.push_back(order_verdict("|lambda_eps - mu_eps| = O(eps^4), order-3 effective potential",
                                   convergence_order(d3), 3.5, 4.5, 0.0, pass));
  verdicts.push_back(order_verdict("|lambda_eps - mu_eps| = O(eps^3), order-2 effective potential",
                                   convergence_order(d2), 2.5, 3.5, 0.0, pass));
  ordered_json j;
  j["mode"] = "tracking";
  j["lambda0"] = complex_json(study.lambda0.lambda);
  j["tracked"] = tracked;
  j["verdicts"] = verdicts;
  j["pass"] = pass;
  return {j.dump(2), "", pass};
}

CommandOutput expansion_zero_energy(const RunConfig& cfg, const FourierPotential& W) {
  const auto& eps_list = eps_or(cfg, kZeroEnergyEps);
  require_positive(eps_list, 3, "expansion");
  const SearchRegion window = cfg.region.value_or(SearchRegion(-0.25, 0.25, -0.25, 0.25));
  const auto study = zero_energy_study(W, eps_list, window, root_config(cfg));
  std::vector<OrderSample> m2, m3, e_series, e_squared;
  ordered_json samples = ordered_json::array();
  for (const auto& s : study) {
    const cplx l = s.located.lambda;
    m2.push_back({s.eps, std::abs(l - s.prediction.momentum_order2)});
    m3.push_back({s.eps, std::abs(l - s.prediction.momentum)});
    e_series.push_back({s.eps, std::abs(l * l - s.prediction.energy_series)});
    e_squared.push_back({s.eps, std::abs(l * l - s.prediction.energy_squared)});
    samples.push_back({{"eps", s.eps},
                       {"located", complex_json(l)},
                       {"momentum_order2", complex_json(s.prediction.momentum_order2)},
                       {"momentum", complex_json(s.prediction.momentum)},
                       {"energy_series", complex_json(s.prediction.energy_series)},
                       {"energy_squared", complex_json(s.prediction.energy_squared)}});
  }
  const OrderFit f2 = convergence_order(m2);
  const OrderFit f3 = convergence_order(m3);
  bool pass = true;
  ordered_json verdicts = ordered_json::array();
  verdicts.push_back(order_verdict("|lambda - i(eps^2/2) int Lambda_0| = O(eps^3)", f2, 2.7,
                                   std::numeric_limits<double>::infinity(), 0.0, pass));
  const bool gain = f3.exponent - f2.exponent >= 0.5;
  pass = pass && gain;
  ordered_json g;
  g["law"] = "adding i(eps^3/2) int Lambda_1 raises the error exponent";
  g["samples"] = ordered_json::array();
  for (const auto& s : f3.samples) g["samples"].push_back({{"eps", s.eps}, {"err", s.err}});
  g["fitted_exponent"] = exponent_json(f3.exponent);
  g["r2"] = f3.r_squared;
  g["pass"] = gain;
  g["threshold"] = "exponent gain >= 0.5";
  verdicts.push_back(g);

  int series_closer = 0;
  for (std::size_t i = 0; i < e_series.size(); ++i) series_closer += e_series[i].err < e_squared[i].err ? 1 : 0;
  ordered_json energy;
  energy["series_exponent"] = exponent_json(convergence_order(e_series).exponent);
  energy["squared_momentum_exponent"] = exponent_json(convergence_order(e_squared).exponent);
  energy["series_closer"] = series_closer;
  energy["samples"] = e_series.size();
  energy["favored"] = 2 * series_closer > static_cast<int>(e_series.size())   ? "series"
                      : 2 * series_closer < static_cast<int>(e_series.size()) ? "squared_momentum"
                                                                                : "undecided";
  ordered_json j;
  j["mode"] = "zero_energy";
  j["int_lambda0"] = study.front().prediction.int_lambda0;
  j["int_lambda1"] = study.front().prediction.int_lambda1;
  j["samples"] = samples;
  j["verdicts"] = verdicts;
  j["energy_convention"] = energy;
  j["pass"] = pass;
  return {j.dump(2), "", pass};
}

CommandOutput cmd_expansion(const RunConfig& cfg) {
  const PotentialSpec spec = require_spec(cfg);
  return mean_vanishes(spec.sampled) ? expansion_zero_energy(cfg, spec.sampled)
                                     : expansion_tracking(cfg, spec.sampled);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::filesystem::filesystem_error("cannot open output", path, std::make_error_code(std::errc::io_error));
  out << content;
  out.close();
  if (!out) throw std::filesystem::filesystem_error("cannot write output", path, std::make_error_code(std::errc::io_error));
}

void report(std::ostream& err, const char* kind, const std::string& message) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump(2) << '\n';
}

}  // namespace

std::vector<double> LambdaSweep::values() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return out;
}

void RunConfig::validate() const {
  for (double e : eps_list) {
    if (!std::isfinite(e) || e < 0.0) throw UsageError("--eps values must be finite and nonnegative");
  }
  if (order != 2 && order != 3) throw UsageError("--order must be 2 or 3");
  if (nodes < 8) throw UsageError("--nodes must be >= 8");
  if (jobs < 1) throw UsageError("--jobs must be >= 1");
  if (step_n.empty()) throw UsageError("--n needs at least one value");
  for (int n : step_n) {
    if (n < 1) throw UsageError("--n values must be >= 1");
  }
  if (!std::isfinite(sweep.lo) || !std::isfinite(sweep.hi) || !(sweep.hi >= sweep.lo) || sweep.count < 1) {
    throw UsageError("--lambda needs finite lo <= hi and a positive count");
  }
  if (sweep.lo <= 0.0) throw UsageError("--lambda needs positive momenta");
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

CommandOutput run_command(const RunConfig& cfg) {
  cfg.validate();
  switch (cfg.command) {
    case Command::effpot: return cmd_effpot(cfg);
    case Command::resonances: return cmd_resonances(cfg);
    case Command::step: return cmd_step(cfg);
    case Command::transmission: return cmd_transmission(cfg);
    case Command::escape: return cmd_escape(cfg);
    case Command::expansion: return cmd_expansion(cfg);
  }
  throw UsageError("unknown command");
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  CommandOutput result;
  try {
    result = run_command(cfg);
  } catch (const SpecError& e) {
    report(err, "parse", e.what());
    return kParseError;
  } catch (const std::invalid_argument& e) {
    report(err, "parse", e.what());
    return kParseError;
  } catch (const NumericalError& e) {
    report(err, "numerical", e.what());
    return kNumericalError;
  } catch (const std::exception& e) {
    report(err, "numerical", e.what());
    return kNumericalError;
  }
  try {
    if (cfg.output_path) {
      write_file(*cfg.output_path, result.content);
      if (!result.summary.empty()) out << result.summary << '\n';
    } else {
      out << result.content;
      if (!result.summary.empty()) err << result.summary << '\n';
    }
  } catch (const std::exception& e) {
    report(err, "io", e.what());
    return kIoError;
  }
  if (cfg.strict && !result.pass) return kVerdictFail;
  return kOk;
}

}  // namespace oscres::cli
