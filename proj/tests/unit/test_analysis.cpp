#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "oscres/analysis.hpp"
#include "oscres/stepmodel.hpp"

using namespace oscres;

TEST_CASE("convergence_order") {
  std::vector<OrderSample> cubic;
  for (double e : {1e-1, 1e-2, 1e-3}) cubic.push_back({e, 7.0 * e * e * e});
  const auto f = convergence_order(cubic);
  CHECK(std::abs(f.exponent - 3.0) < 1e-9);
  CHECK(f.r_squared == doctest::Approx(1.0));

  std::vector<OrderSample> mixed;
  for (double e : {1e-1, 5e-2, 2e-2, 1e-2}) mixed.push_back({e, e * e + std::pow(e, 5)});
  const auto g = convergence_order(mixed);
  CHECK(g.exponent > 1.9);
  CHECK(g.exponent < 2.1);
  CHECK(g.reliable);

  std::vector<OrderSample> flat{{0.1, 2.0}, {0.2, 2.0}, {0.4, 2.0}};
  CHECK(std::abs(convergence_order(flat).exponent) < 1e-9);

  // Rescaling every error leaves the slope unchanged.
  auto scaled = mixed;
  for (auto& s : scaled) s.err *= 1234.5;
  CHECK(std::abs(convergence_order(scaled).exponent - g.exponent) < 1e-12);

  CHECK(std::isinf(convergence_order({{0.1, 0.0}, {0.2, 1.0}, {0.3, 2.0}}).exponent));
  CHECK_THROWS_AS(convergence_order({{0.1, 1.0}, {0.2, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(convergence_order({{0.1, 1.0}, {0.1, 2.0}, {0.3, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(convergence_order({{0.1, -1.0}, {0.2, 1.0}, {0.3, 1.0}}), std::invalid_argument);
}

TEST_CASE("zero energy prediction") {
  const auto W = presets::figure3().without_mode(0);
  const auto p0 = zero_energy_prediction(W, Epsilon(0.0));
  CHECK(p0.momentum == cplx(0.0));
  CHECK(p0.energy_series == cplx(0.0));

  const double eps = 0.05;
  const auto p = zero_energy_prediction(W, Epsilon(eps));
  CHECK(p.int_lambda0 > 0.0);
  CHECK(p.momentum_order2.real() == 0.0);
  CHECK(p.momentum_order2.imag() > 0.0);
  const double lead = -std::pow(eps, 4) / 4.0 * p.int_lambda0 * p.int_lambda0;
  CHECK(std::abs(p.energy_series - (lead - std::pow(eps, 5) / 4.0 * p.int_lambda0 * p.int_lambda1)) < 1e-18);
  CHECK(std::abs(p.energy_squared - p.momentum * p.momentum) < 1e-18);
  // Lambda_1 = -Lambda_0 for this potential.
  CHECK(p.int_lambda1 == doctest::Approx(-p.int_lambda0).epsilon(1e-8));

  CHECK_THROWS_AS(zero_energy_prediction(presets::figure3(), Epsilon(eps)), std::invalid_argument);
}

TEST_CASE("expansion_prediction_general") {
  const auto W = presets::figure3().without_mode(0);
  const auto half = SampledFunction::sample(W.grid(), [](double) { return cplx(1.0 / std::sqrt(2.0)); });
  const auto e = expansion_prediction_general(W, 0.0, half, half);
  const auto z = zero_energy_prediction(W, Epsilon(0.03));
  CHECK(std::abs(e.prediction(0.03) - z.momentum) < 1e-14);
  CHECK(e.prediction(0.0) == cplx(0.0));

  const auto mean_only = presets::figure3().without_mode(1).without_mode(-1);
  const auto zero = expansion_prediction_general(mean_only, cplx(0.0, -1.0), half, half);
  CHECK(zero.c2 == cplx(0.0));
  CHECK(zero.c3 == cplx(0.0));

  // Flipping the Lambda_1 convention (W_k <-> W_-k) flips c3.
  const Grid& g = W.grid();
  std::map<int, SampledFunction> swapped;
  swapped.emplace(1, *W.mode(-1));
  swapped.emplace(-1, *W.mode(1));
  const FourierPotential Ws(1.0, swapped, true);
  const auto es = expansion_prediction_general(Ws, 0.0, half, half);
  CHECK(std::abs(es.c3 + e.c3) < 1e-12);
  CHECK(std::abs(es.c2 - e.c2) < 1e-14);
  CHECK_THROWS_AS(expansion_prediction_general(W, 0.0, SampledFunction::zeros(Grid::spanning(-2, 2, 11)), half),
                  std::invalid_argument);
  (void)g;
}

TEST_CASE("pair_resonances") {
  auto mk = [](std::vector<cplx> zs) {
    std::vector<Resonance> out;
    for (cplx z : zs) out.push_back({z, 0.0, Method::ode_det, 0, 1});
    return out;
  };
  const auto a = mk({cplx(1, -1), cplx(2, -0.5), cplx(-3, -2)});
  const auto same = pair_resonances(a, a);
  CHECK(same.pairs.size() == 3);
  CHECK(same.max_distance() == 0.0);

  const cplx d(1e-3, 2e-3);
  const auto b = mk({cplx(1, -1) + d, cplx(2, -0.5) + d, cplx(-3, -2) + d, cplx(9, 9)});
  const auto p = pair_resonances(a, b);
  CHECK(p.pairs.size() == 3);
  for (const auto& q : p.pairs) CHECK(q.distance == doctest::Approx(std::abs(d)));
  CHECK(p.unpaired_b.size() == 1);
  const auto r = pair_resonances(b, a);
  CHECK(r.unpaired_a.size() == 1);
  CHECK(r.max_distance() == doctest::Approx(p.max_distance()));
}

TEST_CASE("resolvent symbol expansion") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> kd(1, 5), Jd(0, 8);
  std::uniform_real_distribution<double> xi(-2.0, 2.0), le(std::log(1e-3), std::log(0.2)), li(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int k = kd(rng) * (i % 2 ? 1 : -1);
    const double x = xi(rng), eps = std::exp(le(rng));
    const cplx lam(li(rng), li(rng));
    const int J = Jd(rng);
    const auto s = resolvent_symbol_expansion(k, x, lam, eps, J);
    const cplx R = resolvent_symbol(k, x, lam, eps);
    worst = std::max(worst, std::abs(s.partial_sum + s.remainder - R) / std::abs(R));
  }
  CHECK(worst < 1e-12);

  // Terms through eps^4 (j < 3).
  const int k = 2;
  const double x = 0.7, eps = 0.01;
  const cplx lam(0.3, -0.4);
  const auto s = resolvent_symbol_expansion(k, x, lam, eps, 3);
  const double k2 = k * k;
  const cplx lead = eps * eps / k2 - 2.0 * std::pow(eps, 3) * k * x / (k2 * k2) -
                    std::pow(eps, 4) * (x * x - lam * lam) / (k2 * k2) + 4.0 * std::pow(eps, 4) * (k * x) * (k * x) / (k2 * k2 * k2);
  CHECK(std::abs(s.partial_sum - lead) < 1e-15 * std::abs(lead));

  const auto z = resolvent_symbol_expansion(3, 0.0, 0.0, 0.1, 6);
  CHECK(z.u[1] == cplx(0.0));
  CHECK(z.u[3] == cplx(0.0));
  CHECK_THROWS_AS(resolvent_symbol_expansion(0, 0.0, 0.0, 0.1, 3), std::invalid_argument);
}

TEST_CASE("verdict json") {
  Verdict v{"order", {{0.1, 0.01}, {0.05, 0.0025}}, 2.0, 1.0, true, "[1.7, 2.3]"};
  const auto j = nlohmann::json::parse(to_json(v));
  CHECK(j.at("law") == "order");
  CHECK(j.at("samples").size() == 2);
  CHECK(j.at("pass") == true);
  CHECK(j.at("fitted_exponent") == 2.0);
}

TEST_CASE("escape fit on the step family") {
  EscapeConfig cfg;
  cfg.window = SearchRegion(-6.0, 6.0, -8.0, 0.0);
  const auto fit = escape_fit([](double e) { return step_family_profile(e); }, {0.2, 0.1}, cfg);
  REQUIRE(fit.samples.size() == 2);
  for (const auto& s : fit.samples) {
    CHECK(s.located > 0);
    CHECK(s.in_disk == 1);
  }
  CHECK(fit.samples[1].max_im < fit.samples[0].max_im);
}
