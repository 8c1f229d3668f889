#include "oscres/roots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <thread>
#include <utility>

namespace oscres {

namespace {

constexpr double kMaxPhaseStep = kPi / 2.0;
constexpr double kIntegerSlack = 0.05;
constexpr double kJitter = 1e-9;
constexpr int kLatticeBits = 40;

// A zero sits on (or numerically at) the contour.
struct BoundaryZero {};

void check_value(const ScaledComplex& v) {
  if (!v.is_finite()) throw NumericalError("count_zeros: non-finite function value");
}

double phase_step(const ScaledComplex& a, const ScaledComplex& b) {
  if (a.is_zero() || b.is_zero()) throw BoundaryZero{};
  return std::arg(b.mantissa / a.mantissa);
}

int rounded_winding(double total_phase) {
  const double w = total_phase / (2.0 * kPi);
  const double r = std::round(w);
  if (std::abs(w - r) >= kIntegerSlack) {
    std::ostringstream os;
    os << "count_zeros: accumulated phase/2pi = " << w << " is not near an integer";
    throw NumericalError(os.str());
  }
  if (r < 0) throw NumericalError("count_zeros: negative winding number for an entire function");
  return static_cast<int>(r);
}

template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

using Coord = std::pair<std::int64_t, std::int64_t>;

// Integer lattice over the search region: identical lattice points map to
// bit-identical complex numbers, so subrectangles share cached values.
class LatticeEvaluator {
 public:
  LatticeEvaluator(const AnalyticFunction& f, const SearchRegion& r, int jobs)
      : f_(f),
        re0_(r.re_min),
        im0_(r.im_min),
        dre_((r.re_max - r.re_min) / static_cast<double>(kFull)),
        dim_((r.im_max - r.im_min) / static_cast<double>(kFull)),
        jobs_(jobs) {}

  static constexpr std::int64_t kFull = std::int64_t{1} << kLatticeBits;

  [[nodiscard]] cplx point(Coord c) const {
    return {re0_ + static_cast<double>(c.first) * dre_, im0_ + static_cast<double>(c.second) * dim_};
  }

  const ScaledComplex& operator()(Coord c) {
    auto it = cache_.find(c);
    if (it != cache_.end()) return it->second;
    ScaledComplex v = f_(point(c));
    check_value(v);
    return cache_.emplace(c, v).first->second;
  }

  void prefetch(const std::vector<Coord>& pts) {
    std::vector<Coord> missing;
    for (const auto& c : pts) {
      if (!cache_.count(c)) missing.push_back(c);
    }
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::vector<ScaledComplex> vals(missing.size());
    parallel_for(missing.size(), jobs_, [&](std::size_t i) { vals[i] = f_(point(missing[i])); });
    for (std::size_t i = 0; i < missing.size(); ++i) {
      check_value(vals[i]);
      cache_.emplace(missing[i], vals[i]);
    }
  }

  [[nodiscard]] std::size_t evaluations() const { return cache_.size(); }

 private:
  const AnalyticFunction& f_;
  double re0_, im0_, dre_, dim_;
  int jobs_;
  std::map<Coord, ScaledComplex> cache_;
};

struct Box {
  std::int64_t i0, i1, j0, j1;
};

// Phase change from a to b (lattice points on one axis-aligned segment),
// bisecting until every step is below pi/2.
double segment_phase(LatticeEvaluator& ev, Coord a, Coord b) {
  double total = 0.0;
  std::vector<std::pair<Coord, Coord>> stack{{a, b}};
  // Process left-to-right so the order of evaluation is deterministic.
  while (!stack.empty()) {
    auto [p, q] = stack.back();
    stack.pop_back();
    const double d = phase_step(ev(p), ev(q));
    if (std::abs(d) < kMaxPhaseStep) {
      total += d;
      continue;
    }
    const std::int64_t len = std::max(std::abs(q.first - p.first), std::abs(q.second - p.second));
    if (len <= 1) throw BoundaryZero{};
    const Coord m{p.first + (q.first - p.first) / 2, p.second + (q.second - p.second) / 2};
    stack.push_back({m, q});
    stack.push_back({p, m});
  }
  return total;
}

std::vector<Coord> edge_points(Coord a, Coord b, int samples) {
  const std::int64_t len = std::max(std::abs(b.first - a.first), std::abs(b.second - a.second));
  const std::int64_t n = std::max<std::int64_t>(1, std::min<std::int64_t>(samples, len));
  std::vector<Coord> pts;
  pts.reserve(static_cast<std::size_t>(n) + 1);
  for (std::int64_t k = 0; k <= n; ++k) {
    pts.push_back({a.first + (b.first - a.first) / n * k, a.second + (b.second - a.second) / n * k});
  }
  pts.back() = b;
  return pts;
}

int box_winding(LatticeEvaluator& ev, const Box& box, int samples) {
  const Coord c00{box.i0, box.j0}, c10{box.i1, box.j0}, c11{box.i1, box.j1}, c01{box.i0, box.j1};
  const std::pair<Coord, Coord> edges[4] = {{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}};
  std::vector<std::vector<Coord>> pts;
  std::vector<Coord> all;
  for (const auto& [a, b] : edges) {
    pts.push_back(edge_points(a, b, samples));
    all.insert(all.end(), pts.back().begin(), pts.back().end());
  }
  ev.prefetch(all);
  double total = 0.0;
  for (const auto& e : pts) {
    for (std::size_t k = 0; k + 1 < e.size(); ++k) total += segment_phase(ev, e[k], e[k + 1]);
  }
  return rounded_winding(total);
}

SearchRegion jittered(const SearchRegion& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double s = kJitter * std::max(1.0, r.diameter());
  return {r.re_min + s * u(rng), r.re_max + s * u(rng), r.im_min + s * u(rng), r.im_max + s * u(rng)};
}

}  // namespace

SearchRegion::SearchRegion(double re_lo, double re_hi, double im_lo, double im_hi)
    : re_min(re_lo), re_max(re_hi), im_min(im_lo), im_max(im_hi) {
  if (!(re_lo < re_hi) || !(im_lo < im_hi) || !std::isfinite(re_hi - re_lo) || !std::isfinite(im_hi - im_lo)) {
    throw std::invalid_argument("SearchRegion: need re_min < re_max and im_min < im_max");
  }
}

double SearchRegion::diameter() const { return std::hypot(re_max - re_min, im_max - im_min); }

bool SearchRegion::contains(cplx z, double slack) const {
  return z.real() >= re_min - slack && z.real() <= re_max + slack && z.imag() >= im_min - slack &&
         z.imag() <= im_max + slack;
}

void RootFindConfig::validate() const {
  if (edge_samples < 4) throw std::invalid_argument("RootFindConfig: edge_samples must be >= 4");
  if (max_depth < 1) throw std::invalid_argument("RootFindConfig: max_depth must be >= 1");
  if (!(newton_tol > 0.0) || newton_max_iter < 1 || !(min_cell > 0.0)) {
    throw std::invalid_argument("RootFindConfig: tolerances must be positive");
  }
  for (const auto& d : exclusion_disks) {
    if (!(d.radius > 0.0)) throw std::invalid_argument("RootFindConfig: exclusion radius must be positive");
  }
}

int count_zeros(const AnalyticFunction& f, const SearchRegion& region, const RootFindConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  SearchRegion r = region;
  for (int attempt = 0; attempt < 4; ++attempt) {
    try {
      LatticeEvaluator ev(f, r, cfg.jobs);
      const std::int64_t full = LatticeEvaluator::kFull;
      return box_winding(ev, {0, full, 0, full}, cfg.edge_samples);
    } catch (const BoundaryZero&) {
      r = jittered(region, rng);
    }
  }
  throw NumericalError("count_zeros: phase step irreducible below pi/2 (zero on the contour)");
}

int count_zeros_disk(const AnalyticFunction& f, cplx center, double radius, const RootFindConfig& cfg) {
  cfg.validate();
  if (!(radius > 0.0)) throw std::invalid_argument("count_zeros_disk: radius must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double rho = radius;
  for (int attempt = 0; attempt < 4; ++attempt) {
    try {
      auto eval = [&](double t) {
        const ScaledComplex v = f(center + rho * std::exp(I * (2.0 * kPi * t)));
        check_value(v);
        return v;
      };
      const int n = 4 * cfg.edge_samples;
      std::vector<double> ts(static_cast<std::size_t>(n) + 1);
      std::vector<ScaledComplex> vs(ts.size());
      for (int k = 0; k <= n; ++k) ts[static_cast<std::size_t>(k)] = static_cast<double>(k) / n;
      parallel_for(ts.size() - 1, cfg.jobs, [&](std::size_t k) { vs[k] = eval(ts[k]); });
      vs.back() = vs.front();
      double total = 0.0;
      for (int k = 0; k < n; ++k) {
        std::vector<std::tuple<double, ScaledComplex, double, ScaledComplex>> stack{
            {ts[static_cast<std::size_t>(k)], vs[static_cast<std::size_t>(k)], ts[static_cast<std::size_t>(k) + 1],
             vs[static_cast<std::size_t>(k) + 1]}};
        while (!stack.empty()) {
          auto [ta, fa, tb, fb] = stack.back();
          stack.pop_back();
          const double d = phase_step(fa, fb);
          if (std::abs(d) < kMaxPhaseStep) {
            total += d;
            continue;
          }
          if (tb - ta < 1e-13) throw BoundaryZero{};
          const double tm = 0.5 * (ta + tb);
          const ScaledComplex fm = eval(tm);
          stack.emplace_back(tm, fm, tb, fb);
          stack.emplace_back(ta, fa, tm, fm);
        }
      }
      return rounded_winding(total);
    } catch (const BoundaryZero&) {
      rho = radius * (1.0 + kJitter * u(rng));
    }
  }
  throw NumericalError("count_zeros_disk: zero on the circle");
}

double normalized_residual(const AnalyticFunction& f, cplx z) {
  const ScaledComplex fz = f(z);
  if (fz.is_zero()) return 0.0;
  const double rho = 1e-2 * std::max(1.0, std::abs(z));
  double ring = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    const cplx p = z + rho * std::exp(I * (kPi / 8.0 + k * kPi / 2.0));
    ring = std::max(ring, f(p).log_abs());
  }
  return std::exp(fz.log_abs() - ring);
}

Resonance refine_newton(const AnalyticFunction& f, cplx z0, const RootFindConfig& cfg, Method method,
                        double divergence_radius) {
  if (!std::isfinite(z0.real()) || !std::isfinite(z0.imag())) {
    throw std::invalid_argument("refine_newton: non-finite seed");
  }
  cplx z = z0;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= cfg.newton_max_iter; ++it) {
    const double h = 1e-6 * std::max(1.0, std::abs(z));
    const ScaledComplex fz = f(z);
    if (!fz.is_finite()) throw NumericalError("refine_newton: non-finite function value");
    if (fz.is_zero()) return {z, 0.0, method, it - 1, 1};
    const double ref = fz.log_scale;
    const cplx fp = (f(z + h).relative_to(ref) - f(z - h).relative_to(ref)) / (2.0 * h);
    if (fp == cplx{0.0, 0.0} || !std::isfinite(std::abs(fp))) {
      throw ConvergenceError("refine_newton: vanishing derivative", residual);
    }
    const cplx dz = fz.mantissa / fp;
    z -= dz;
    if (std::abs(z - z0) > divergence_radius || !std::isfinite(std::abs(z))) {
      throw ConvergenceError("refine_newton: iteration diverged", residual);
    }
    const double scale = std::max(1.0, std::abs(z));
    if (std::abs(dz) < 1e-6 * scale) {
      residual = normalized_residual(f, z);
      if (residual < cfg.newton_tol) return {z, residual, method, it, 1};
      if (std::abs(dz) < 1e-15 * scale) break;
    }
  }
  throw ConvergenceError("refine_newton: no convergence within the iteration limit", residual);
}

LocateResult locate_zeros(const AnalyticFunction& f, const SearchRegion& region, const RootFindConfig& cfg,
                          Method method) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  LocateResult result;
  std::ostringstream diag;
  const double divergence = 10.0 * region.diameter();

  SearchRegion r = region;
  std::unique_ptr<LatticeEvaluator> ev;
  const std::int64_t full = LatticeEvaluator::kFull;
  for (int attempt = 0;; ++attempt) {
    ev = std::make_unique<LatticeEvaluator>(f, r, cfg.jobs);
    try {
      result.total_count = box_winding(*ev, {0, full, 0, full}, cfg.edge_samples);
      break;
    } catch (const BoundaryZero&) {
      if (attempt == 3) throw NumericalError("locate_zeros: zero on the region boundary");
      r = jittered(region, rng);
    }
  }

  auto in_exclusion = [&](cplx z) {
    return std::any_of(cfg.exclusion_disks.begin(), cfg.exclusion_disks.end(),
                       [&](const ExclusionDisk& d) { return d.contains(z); });
  };
  auto box_inside_exclusion = [&](const Box& b) {
    const cplx c[4] = {ev->point({b.i0, b.j0}), ev->point({b.i1, b.j0}), ev->point({b.i1, b.j1}),
                       ev->point({b.i0, b.j1})};
    return std::any_of(cfg.exclusion_disks.begin(), cfg.exclusion_disks.end(), [&](const ExclusionDisk& d) {
      return std::all_of(std::begin(c), std::end(c), [&](cplx z) { return d.contains(z); });
    });
  };
  auto accept = [&](const Resonance& res) {
    if (in_exclusion(res.lambda)) {
      result.excluded_count += res.multiplicity;
    } else {
      result.roots.push_back(res);
    }
  };

  struct Task {
    Box box;
    int count;
    int depth;
    int samples;
  };
  std::vector<Task> stack{{{0, full, 0, full}, result.total_count, 0, cfg.edge_samples}};
  std::uniform_real_distribution<double> shift(-0.2, 0.2);
  while (!stack.empty()) {
    const Task t = stack.back();
    stack.pop_back();
    if (t.count == 0) continue;
    const Box& b = t.box;
    if (box_inside_exclusion(b)) {
      result.excluded_count += t.count;
      continue;
    }
    const cplx lo = ev->point({b.i0, b.j0});
    const cplx hi = ev->point({b.i1, b.j1});
    const cplx center = 0.5 * (lo + hi);
    const double diameter = std::abs(hi - lo);
    const SearchRegion rect(lo.real(), hi.real(), lo.imag(), hi.imag());

    if (t.count == 1) {
      try {
        Resonance res = refine_newton(f, center, cfg, method, divergence);
        if (rect.contains(res.lambda, 1e-12 * std::max(1.0, std::abs(res.lambda)))) {
          accept(res);
          continue;
        }
      } catch (const NumericalError&) {
        // fall through to subdivision
      }
    }
    const bool too_small = diameter < cfg.min_cell || t.depth >= cfg.max_depth || (b.i1 - b.i0) < 4 ||
                           (b.j1 - b.j0) < 4;
    if (too_small) {
      try {
        Resonance res = refine_newton(f, center, cfg, method, divergence);
        res.multiplicity = t.count;
        accept(res);
      } catch (const NumericalError& e) {
        diag << "unrefined cluster of " << t.count << " near " << center << ": " << e.what() << "; ";
      }
      continue;
    }

    const int child_samples = std::max(8, t.samples / 2);
    std::vector<Task> children;
    bool split_ok = false;
    for (int attempt = 0; attempt < 6 && !split_ok; ++attempt) {
      const double fi = attempt == 0 ? 0.0 : shift(rng);
      const double fj = attempt == 0 ? 0.0 : shift(rng);
      const std::int64_t half_i = (b.i1 - b.i0) / 2;
      const std::int64_t half_j = (b.j1 - b.j0) / 2;
      const std::int64_t mi = b.i0 + half_i + static_cast<std::int64_t>(fi * static_cast<double>(half_i));
      const std::int64_t mj = b.j0 + half_j + static_cast<std::int64_t>(fj * static_cast<double>(half_j));
      const Box quads[4] = {{b.i0, mi, b.j0, mj}, {mi, b.i1, b.j0, mj}, {b.i0, mi, mj, b.j1}, {mi, b.i1, mj, b.j1}};
      try {
        children.clear();
        int sum = 0;
        for (const auto& q : quads) {
          const int c = box_winding(*ev, q, child_samples);
          sum += c;
          children.push_back({q, c, t.depth + 1, child_samples});
        }
        if (sum != t.count) {
          diag << "subdivision count mismatch near " << center << " (" << sum << " vs " << t.count << "); ";
        }
        split_ok = true;
      } catch (const BoundaryZero&) {
      }
    }
    if (!split_ok) {
      diag << "could not split rectangle around " << center << " away from a zero; ";
      continue;
    }
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(*it);
  }

  // Deduplicate.
  std::vector<Resonance> unique;
  for (const auto& res : result.roots) {
    const bool dup = std::any_of(unique.begin(), unique.end(), [&](const Resonance& u) {
      return std::abs(u.lambda - res.lambda) <= 10.0 * cfg.newton_tol * std::max(1.0, std::abs(res.lambda));
    });
    if (!dup) unique.push_back(res);
  }
  std::sort(unique.begin(), unique.end(), [](const Resonance& a, const Resonance& b) {
    if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() > b.lambda.imag();
    return a.lambda.real() < b.lambda.real();
  });
  result.roots = std::move(unique);

  int located = result.excluded_count;
  for (const auto& res : result.roots) located += res.multiplicity;
  if (located != result.total_count) {
    diag << "located " << located << " zeros (with multiplicity, incl. excluded) but the region count is "
         << result.total_count << "; ";
  }
  result.diagnostic = diag.str();
  return result;
}

}  // namespace oscres
