#include "oscres/fredholm.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

namespace oscres {

namespace {

struct Rule {
  std::vector<double> x;  // on [-1, 1]
  std::vector<double> w;
};

const Rule& gauss_legendre(int m) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[m];
  if (!slot) {
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(m));
    if (t == nullptr) throw std::runtime_error("gauss_legendre: table allocation failed");
    auto rule = std::make_unique<Rule>();
    rule->x.resize(static_cast<std::size_t>(m));
    rule->w.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      gsl_integration_glfixed_point(-1.0, 1.0, static_cast<std::size_t>(i), &rule->x[static_cast<std::size_t>(i)],
                                    &rule->w[static_cast<std::size_t>(i)], t);
    }
    gsl_integration_glfixed_table_free(t);
    slot = std::move(rule);
  }
  return *slot;
}

struct Discretization {
  std::vector<double> x;
  std::vector<double> w;
  /// Points at which V is sampled: x nudged into its breakpoint interval, so
  /// nodes on a jump see the one-sided limit.
  std::vector<double> v_at;
};

// Node counts per breakpoint interval, proportional to its length, summing to n.
std::vector<int> interval_counts(const std::vector<double>& bps, int n, int min_count) {
  const std::size_t gaps = bps.size() - 1;
  const double total = bps.back() - bps.front();
  std::vector<int> counts(gaps);
  int used = 0;
  for (std::size_t p = 0; p < gaps; ++p) {
    counts[p] = std::max(min_count, static_cast<int>(std::lround(n * (bps[p + 1] - bps[p]) / total)));
    used += counts[p];
  }
  // Absorb rounding in the largest interval.
  auto big = std::max_element(counts.begin(), counts.end());
  *big += n - used;
  if (*big < min_count) throw std::invalid_argument("fredholm: too few nodes for the number of breakpoint intervals");
  return counts;
}

Discretization gauss_nodes(const std::vector<double>& bps, int n) {
  Discretization d;
  const auto counts = interval_counts(bps, n, 1);
  for (std::size_t p = 0; p + 1 < bps.size(); ++p) {
    const Rule& r = gauss_legendre(counts[p]);
    const double c = 0.5 * (bps[p] + bps[p + 1]);
    const double h = 0.5 * (bps[p + 1] - bps[p]);
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      d.x.push_back(c + h * r.x[i]);
      d.w.push_back(h * r.w[i]);
    }
  }
  d.v_at = d.x;
  return d;
}

// Three levels once the coarsest keeps 64 nodes; below that the h^4 term is
// not yet asymptotic for kernels with steep profiles.
int romberg_levels(int n) { return n >= 256 ? 3 : 2; }

// Coarsest trapezoid counts c whose finest refinement (c - 1) 2^(levels - 1) + 1
// stays within n nodes.
std::vector<int> coarse_counts(const std::vector<double>& bps, int n) {
  const int stride = 1 << (romberg_levels(n) - 1);
  auto counts = interval_counts(bps, n, stride + 1);
  for (int& c : counts) c = (c - 1) / stride + 1;
  return counts;
}

// Trapezoid nodes on every breakpoint interval, ends included, with the
// coarse spacing halved `level` times.
Discretization trapezoid_nodes(const std::vector<double>& bps, const std::vector<int>& counts, int level) {
  Discretization d;
  for (std::size_t p = 0; p + 1 < bps.size(); ++p) {
    const double a = bps[p], b = bps[p + 1];
    const int m = ((counts[p] - 1) << level) + 1;
    const double h = (b - a) / (m - 1);
    const double nudge = 1e-12 * (b - a);
    for (int i = 0; i < m; ++i) {
      const double x = i == m - 1 ? b : a + i * h;
      d.x.push_back(x);
      d.w.push_back(i == 0 || i == m - 1 ? 0.5 * h : h);
      d.v_at.push_back(i == 0 ? a + nudge : i == m - 1 ? b - nudge : x);
    }
  }
  return d;
}

// Romberg elimination of the h^2, h^4, ... terms; t[j] is the value at spacing h / 2^j.
cplx romberg(std::vector<cplx> t) {
  double f = 1.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    f *= 4.0;
    for (std::size_t j = t.size() - 1; j >= k; --j) t[j] = (f * t[j] - t[j - 1]) / (f - 1.0);
  }
  return t.back();
}

void check_lambda(cplx lambda, const char* what) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) {
    throw std::invalid_argument(std::string(what) + ": non-finite lambda");
  }
  if (lambda == cplx{0.0, 0.0}) throw std::invalid_argument(std::string(what) + ": lambda = 0");
}

Eigen::MatrixXcd kernel_matrix(const Discretization& d, const std::function<cplx(double)>& v, cplx lambda) {
  const auto n = static_cast<Eigen::Index>(d.x.size());
  Eigen::MatrixXcd m(n, n);
  const cplx pre = I / (2.0 * lambda);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    const cplx col = pre * v(d.v_at[sj]) * d.w[sj];
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, j) = col * std::exp(I * lambda * std::abs(d.x[static_cast<std::size_t>(i)] - d.x[sj]));
    }
  }
  return m;
}

ScaledComplex lu_determinant(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) {
  ScaledComplex d(static_cast<double>(lu.permutationP().determinant()));
  const auto& u = lu.matrixLU();
  for (Eigen::Index i = 0; i < u.rows(); ++i) d = d * ScaledComplex(u(i, i));
  return d;
}

ScaledComplex lu_det(const Discretization& d, const std::function<cplx(double)>& v, cplx lambda) {
  Eigen::MatrixXcd a = kernel_matrix(d, v, lambda);
  a.diagonal().array() += 1.0;
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  return lu_determinant(lu);
}

std::vector<double> merged_breakpoints(const KernelPotential& a, const KernelPotential& b) {
  std::vector<double> out(a.breakpoints);
  out.insert(out.end(), b.breakpoints.begin(), b.breakpoints.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

KernelPotential KernelPotential::from_sampled(const SampledFunction& f) {
  const auto vals = f.values();
  int first = -1, last = -1;
  for (int i = 0; i < static_cast<int>(vals.size()); ++i) {
    if (vals[static_cast<std::size_t>(i)] != cplx{0.0, 0.0}) {
      if (first < 0) first = i;
      last = i;
    }
  }
  KernelPotential k{[f](double x) { return f.at(x); }, {}};
  if (first < 0) return k;
  const Grid& g = f.grid();
  // The linear interpolant is nonzero on (x_{first-1}, x_{last+1}).
  const double lo = g.node(std::max(first - 1, 0));
  const double hi = g.node(std::min(last + 1, g.n() - 1));
  k.breakpoints = {lo, hi};
  return k;
}

KernelPotential KernelPotential::constant(cplx value, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("KernelPotential::constant: empty interval");
  return {[value, lo, hi](double x) { return x >= lo && x <= hi ? value : cplx{0.0}; }, {lo, hi}};
}

NystromOperator build_operator(const KernelPotential& V, cplx lambda, int n_nodes) {
  check_lambda(lambda, "build_operator");
  if (n_nodes < 8) throw std::invalid_argument("build_operator: n_nodes must be >= 8");
  NystromOperator op{lambda, {}, {}, {}};
  if (V.is_zero()) {
    // Any interval will do; the matrix is zero.
    const Rule& r = gauss_legendre(n_nodes);
    op.nodes = r.x;
    op.weights = r.w;
    op.matrix = Eigen::MatrixXcd::Zero(n_nodes, n_nodes);
    return op;
  }
  auto d = gauss_nodes(V.breakpoints, n_nodes);
  op.matrix = kernel_matrix(d, V.v, lambda);
  op.nodes = std::move(d.x);
  op.weights = std::move(d.w);
  return op;
}

NystromOperator build_operator(const SampledFunction& V, cplx lambda, int n_nodes) {
  return build_operator(KernelPotential::from_sampled(V), lambda, n_nodes);
}

ScaledComplex fredholm_det(const KernelPotential& V, cplx lambda, int n_nodes, NystromRule rule) {
  check_lambda(lambda, "fredholm_det");
  if (n_nodes < 8) throw std::invalid_argument("fredholm_det: n_nodes must be >= 8");
  if (V.is_zero()) return {1.0};
  if (rule == NystromRule::plain) return lu_det(gauss_nodes(V.breakpoints, n_nodes), V.v, lambda);
  const auto counts = coarse_counts(V.breakpoints, n_nodes);
  std::vector<ScaledComplex> levels;
  double ref = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < romberg_levels(n_nodes); ++l) {
    levels.push_back(lu_det(trapezoid_nodes(V.breakpoints, counts, l), V.v, lambda));
    ref = std::max(ref, levels.back().log_scale);
  }
  std::vector<cplx> t;
  for (const auto& d : levels) t.push_back(d.relative_to(ref));
  return {romberg(std::move(t)), ref};
}

ScaledComplex fredholm_det(const SampledFunction& V, cplx lambda, int n_nodes, NystromRule rule) {
  return fredholm_det(KernelPotential::from_sampled(V), lambda, n_nodes, rule);
}

cplx entire_det_ring_average(const KernelPotential& V, double radius, int n_nodes) {
  if (!(radius > 0.0)) throw std::invalid_argument("entire_det_ring_average: radius must be positive");
  constexpr int kRing = 8;
  cplx sum{0.0};
  for (int k = 0; k < kRing; ++k) {
    const cplx z = radius * std::exp(I * (2.0 * kPi * (k + 0.5) / kRing));
    sum += (fredholm_det(V, z, n_nodes) * z).value();
  }
  return sum / static_cast<double>(kRing);
}

ScaledComplex entire_det(const KernelPotential& V, cplx lambda, int n_nodes, NystromRule rule) {
  if (lambda == cplx{0.0, 0.0}) return {entire_det_ring_average(V, 1e-6, n_nodes)};
  return fredholm_det(V, lambda, n_nodes, rule) * lambda;
}

ScaledComplex entire_det(const SampledFunction& V, cplx lambda, int n_nodes, NystromRule rule) {
  return entire_det(KernelPotential::from_sampled(V), lambda, n_nodes, rule);
}

cplx trace_perturbation(const KernelPotential& W0, const KernelPotential& Lam, cplx lambda, int n_nodes,
                        NystromRule rule) {
  check_lambda(lambda, "trace_perturbation");
  if (n_nodes < 8) throw std::invalid_argument("trace_perturbation: n_nodes must be >= 8");
  if (Lam.is_zero()) return 0.0;
  const auto bps = merged_breakpoints(W0, Lam);
  const auto trace_on = [&](const Discretization& d) {
    Eigen::MatrixXcd a = kernel_matrix(d, W0.v, lambda);
    a.diagonal().array() += 1.0;
    const Eigen::MatrixXcd k = kernel_matrix(d, Lam.v, lambda);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const double rc = lu.rcond();
    if (!(rc > 1.0 / kMaxCondition)) {
      throw NearSingular("trace_perturbation: Id + K_W0 is numerically singular (lambda near a resonance of W0)",
                         rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity());
    }
    return cplx(lu.solve(k).trace());
  };
  if (rule == NystromRule::plain) return trace_on(gauss_nodes(bps, n_nodes));
  const auto counts = coarse_counts(bps, n_nodes);
  std::vector<cplx> t;
  for (int l = 0; l < romberg_levels(n_nodes); ++l) t.push_back(trace_on(trapezoid_nodes(bps, counts, l)));
  return romberg(std::move(t));
}

cplx trace_perturbation(const SampledFunction& W0, const SampledFunction& Lam, cplx lambda, int n_nodes,
                        NystromRule rule) {
  return trace_perturbation(KernelPotential::from_sampled(W0), KernelPotential::from_sampled(Lam), lambda, n_nodes,
                            rule);
}

}  // namespace oscres
