#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "oscres/common.hpp"
#include "oscres/potential.hpp"
#include "oscres/resonance.hpp"
#include "oscres/roots.hpp"
#include "oscres/scatter.hpp"

namespace oscres {

struct OrderSample {
  double eps;
  double err;
};

/// Least-squares fit of log err = exponent * log eps + intercept.
struct OrderFit {
  std::vector<OrderSample> samples;
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  /// At least 4 samples spanning a decade with r^2 >= 0.98.
  bool reliable = false;
};

/// Throws on fewer than 3 samples, repeated or nonpositive eps, negative err.
/// Any zero error yields exponent = +inf.
OrderFit convergence_order(const std::vector<OrderSample>& samples);

struct ZeroEnergyPrediction {
  double int_lambda0 = 0.0;
  double int_lambda1 = 0.0;
  /// i(eps^2/2) int Lambda_0
  cplx momentum_order2;
  /// i(eps^2/2) int Lambda_0 + i(eps^3/2) int Lambda_1
  cplx momentum;
  /// -(eps^4/4)(int Lambda_0)^2 - (eps^5/4) int Lambda_0 int Lambda_1
  cplx energy_series;
  /// momentum^2
  cplx energy_squared;
};

/// Momentum and energy predictions for the bound state emerging from 0
/// when W_0 vanishes (u = v = 1/sqrt 2). Throws if max |W_0| > 1e-10.
ZeroEnergyPrediction zero_energy_prediction(const FourierPotential& W, Epsilon eps);

struct ExpansionPrediction {
  cplx lambda0;
  cplx c2;
  cplx c3;
  [[nodiscard]] cplx prediction(double eps) const { return lambda0 + c2 * eps * eps + c3 * eps * eps * eps; }
};

/// c2 = i int Lambda_0 u v, c3 = i int Lambda_1 u v.
ExpansionPrediction expansion_prediction_general(const FourierPotential& W, cplx lambda0, const SampledFunction& u,
                                                 const SampledFunction& v);

struct ResonancePair {
  Resonance a;
  Resonance b;
  double distance;
};

struct Pairing {
  std::vector<ResonancePair> pairs;
  std::vector<Resonance> unpaired_a;
  std::vector<Resonance> unpaired_b;
  [[nodiscard]] double max_distance() const;
};

/// Repeatedly pairs the globally closest remaining (a, b); each such pair is
/// mutually nearest among what is left.
Pairing pair_resonances(const std::vector<Resonance>& set_a, const std::vector<Resonance>& set_b);

/// Newton from `seed`, then a zero count on the disk of radius
/// `verify_radius` around the root, which must be 1.
Resonance track_resonance(const AnalyticFunction& f, cplx seed, double verify_radius,
                          const RootFindConfig& cfg = {});

/// Determinant handle of a cell profile.
AnalyticFunction determinant_of(CellProfile profile);

struct TrackedResonance {
  double eps;
  int cells;
  /// Resonance of V_eps.
  cplx lambda_eps;
  /// Resonances of the order-2 and order-3 effective potentials on the same cells.
  cplx mu2;
  cplx mu3;
};

struct ExpansionStudy {
  /// Resonance of W_0 with the largest Im in the window.
  Resonance lambda0;
  std::vector<TrackedResonance> tracked;
};

/// Locates lambda_0 for W_0 in `window` (cells of the smallest eps), then
/// tracks it for every eps with track_resonance on V_eps and on both
/// effective potentials.
ExpansionStudy expansion_study(const FourierPotential& W, const std::vector<double>& eps_list,
                               const SearchRegion& window, double verify_radius = 0.1,
                               const RootFindConfig& cfg = {});

struct ZeroEnergySample {
  double eps;
  /// Located zero of V_eps in the window nearest to the momentum prediction.
  Resonance located;
  ZeroEnergyPrediction prediction;
};

/// Near-origin resonances of V_eps for W_0 = 0, one per eps.
std::vector<ZeroEnergySample> zero_energy_study(const FourierPotential& W, const std::vector<double>& eps_list,
                                                const SearchRegion& window, const RootFindConfig& cfg = {});

struct EscapeConfig {
  SearchRegion window{-6.0, 6.0, -6.0, 0.0};
  /// The disk around 0 of radius eps^disk_exponent is masked.
  double disk_exponent = 0.25;
  RootFindConfig roots;
};

struct EscapeSample {
  double eps;
  double max_im;
  int located;
  int in_disk;
  /// Located resonances strictly above the fitted line.
  int above_fit = 0;
  std::vector<Resonance> roots;
};

struct EscapeFit {
  std::vector<EscapeSample> samples;
  /// Fit of max Im lambda against ln(1/eps).
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool strictly_decreasing = false;
};

using ProfileBuilder = std::function<CellProfile(double eps)>;

EscapeFit escape_fit(const ProfileBuilder& build, const std::vector<double>& eps_list, const EscapeConfig& cfg = {});
/// W must have W_0 = 0; V_eps is sampled with cells_for(W, eps, ...).
EscapeFit escape_fit(const FourierPotential& W, const std::vector<double>& eps_list, const EscapeConfig& cfg = {});

struct SymbolExpansion {
  cplx partial_sum;
  cplx remainder;
  std::vector<cplx> u;
};

/// ((xi + k/eps)^2 - lambda^2)^{-1} split as (eps^2/k^2) sum_{j<J} u_j eps^j plus
/// the closed-form tail, with u_j = -a u_{j-1} - b u_{j-2}, a = 2 xi/k, b = (xi^2 - lambda^2)/k^2.
SymbolExpansion resolvent_symbol_expansion(int k, double xi, cplx lambda, double eps, int J);

/// Direct value ((xi + k/eps)^2 - lambda^2)^{-1}.
cplx resolvent_symbol(int k, double xi, cplx lambda, double eps);

struct Verdict {
  std::string law;
  std::vector<OrderSample> samples;
  double fitted_exponent = 0.0;
  double r2 = 0.0;
  bool pass = false;
  std::string threshold;
};

/// Pretty-printed JSON record.
std::string to_json(const Verdict& v);
std::string to_json(const std::vector<Verdict>& v);

}  // namespace oscres
