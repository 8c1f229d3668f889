#include "oscres/stepmodel.hpp"

#include <quadmath.h>

#include <cmath>
#include <sstream>

namespace oscres {

namespace {

constexpr int kLambertMaxIter = 64;

// Quad-precision 2x2 transfer matrices. Near deep resonances D is a small
// difference of entries of size e^{2|Im lambda|}, which double cannot resolve.
using qreal = __float128;
using qcplx = __complex128;

qcplx to_q(cplx z) {
  qcplx q;
  __real__ q = static_cast<qreal>(z.real());
  __imag__ q = static_cast<qreal>(z.imag());
  return q;
}

cplx to_d(qcplx q) { return {static_cast<double>(crealq(q)), static_cast<double>(cimagq(q))}; }

struct QMatrix {
  qcplx m11, m12, m21, m22;
  double log_scale = 0.0;

  void normalize() {
    const qreal s = fmaxq(fmaxq(cabsq(m11), cabsq(m12)), fmaxq(cabsq(m21), cabsq(m22)));
    if (s == 0 || !finiteq(s)) return;
    m11 /= s;
    m12 /= s;
    m21 /= s;
    m22 /= s;
    log_scale += static_cast<double>(logq(s));
  }
};

QMatrix multiply(const QMatrix& a, const QMatrix& b) {
  QMatrix r{a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22, a.m21 * b.m11 + a.m22 * b.m21,
            a.m21 * b.m12 + a.m22 * b.m22, a.log_scale + b.log_scale};
  r.normalize();
  return r;
}

QMatrix identity() {
  const qcplx one = to_q(1.0), zero = to_q(0.0);
  return {one, zero, zero, one};
}

// Exact propagator of u'' = (v - lambda^2) u over a cell of width s.
QMatrix quad_cell(double v, double s, qcplx lambda) {
  const qcplx mu = to_q(v) - lambda * lambda;
  const qreal sq = static_cast<qreal>(s);
  const qcplx z = sq * sq * mu;
  qcplx c, sh;  // cosh sqrt z and sinh sqrt z / sqrt z
  if (cabsq(z) < static_cast<qreal>(1e-6)) {
    const qreal one = 1;
    c = one + z / 2 + z * z / 24 + z * z * z / 720 + z * z * z * z / 40320;
    sh = one + z / 6 + z * z / 120 + z * z * z / 5040 + z * z * z * z / 362880;
  } else {
    const qcplx k = csqrtq(z);
    c = ccoshq(k);
    sh = csinhq(k) / k;
  }
  return {c, sq * sh, sq * mu * sh, c};
}

cplx lambert_seed(int nu, cplx z) {
  if (nu == 0) {
    const cplx q = z + std::exp(-1.0);
    if (std::abs(q) < 0.3) {
      // Series around the branch point -1/e.
      const cplx p = std::sqrt(2.0 * std::exp(1.0) * q);
      return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    }
    if (std::abs(z) < 0.3) return z - z * z;
    if (std::abs(z) < 3.0) return std::log(1.0 + z);
  }
  const cplx l1 = std::log(z) + 2.0 * kPi * I * static_cast<double>(nu);
  return l1 - std::log(l1);
}

}  // namespace

StepIndex::StepIndex(int value) : n(value) {
  if (value < 1) throw std::invalid_argument("StepIndex: n must be >= 1");
}

LambertBranch::LambertBranch(int value) : nu(value) {
  if (std::abs(value) > 64) throw std::invalid_argument("LambertBranch: |nu| must be <= 64");
}

CellProfile step_profile(StepIndex n) {
  const int cells = 2 * n.n;
  std::vector<double> w(static_cast<std::size_t>(cells), 1.0 / cells);
  std::vector<cplx> v(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) v[static_cast<std::size_t>(i)] = i % 2 == 0 ? -1.0 : 1.0;
  return {-0.5, std::move(w), std::move(v)};
}

ScaledComplex step_determinant(StepIndex n, cplx lambda) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) {
    throw std::invalid_argument("step_determinant: non-finite lambda");
  }
  const double s = 1.0 / (2.0 * n.n);
  const qcplx lq = to_q(lambda);
  // e^{A_+ s} e^{A_- s}: the -1 cell acts first.
  QMatrix base = multiply(quad_cell(1.0, s, lq), quad_cell(-1.0, s, lq));
  QMatrix acc = identity();
  for (int e = n.n; e > 0; e >>= 1) {
    if (e & 1) acc = multiply(base, acc);
    if (e > 1) base = multiply(base, base);
  }
  const qcplx il = to_q(I) * lq;
  // Initial state (1, -i lambda).
  const qcplx u = acc.m11 - acc.m12 * il;
  const qcplx du = acc.m21 - acc.m22 * il;
  return {to_d(il * u - du), acc.log_scale};
}

cplx lambert_w(LambertBranch branch, cplx z) {
  const int nu = branch.nu;
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw std::invalid_argument("lambert_w: non-finite z");
  if (z == cplx{0.0, 0.0}) {
    if (nu == 0) return 0.0;
    throw std::invalid_argument("lambert_w: z = 0 lies at the logarithmic singularity of branch nu != 0");
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(z));
  cplx w = lambert_seed(nu, z);
  double residual = std::abs(w * std::exp(w) - z);
  for (int it = 0; it < kLambertMaxIter; ++it) {
    const cplx ew = std::exp(w);
    const cplx f = w * ew - z;
    residual = std::abs(f);
    const cplx wp1 = w + 1.0;
    const cplx dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= dw;
    if (std::abs(dw) <= 1e-15 * std::max(1.0, std::abs(w))) {
      residual = std::abs(w * std::exp(w) - z);
      if (residual <= tol) return w;
    }
  }
  residual = std::abs(w * std::exp(w) - z);
  if (residual <= tol) return w;
  std::ostringstream os;
  os << "lambert_w: no convergence on branch " << nu << " at z = " << z;
  throw ConvergenceError(os.str(), residual);
}

cplx lambert_prediction(StepIndex n, LambertBranch branch, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("lambert_prediction: sign must be +1 or -1");
  const cplx z = static_cast<double>(sign) * I / (8.0 * n.n);
  const cplx lambda = I * lambert_w(branch, z);
  const cplx check = -I * lambda * std::exp(-I * lambda);
  if (std::abs(check - z) > 1e-10 * std::max(1.0, std::abs(z))) {
    throw NumericalError("lambert_prediction: defining identity violated");
  }
  return lambda;
}

StepResonance find_step_resonance(StepIndex n, const RootFindConfig& cfg) {
  StepResonance out;
  out.asymptotic_regime = n.n >= 4;
  out.prediction = lambert_prediction(n, LambertBranch(1), 1);
  const AnalyticFunction f = [n](cplx z) { return step_determinant(n, z); };
  out.resonance = refine_newton(f, out.prediction, cfg, Method::step_closed_form, 10.0);
  out.disk_count = count_zeros_disk(f, out.prediction, kStepDiskRadius, cfg);
  if (out.disk_count != 1) {
    std::ostringstream os;
    os << "find_step_resonance: disk of radius " << kStepDiskRadius << " around the prediction holds "
       << out.disk_count << " zeros";
    throw NumericalError(os.str());
  }
  if (std::abs(out.resonance.lambda - out.prediction) >= kStepDiskRadius) {
    throw NumericalError("find_step_resonance: Newton left the verification disk");
  }
  return out;
}

CellProfile step_family_profile(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("step_family_profile: eps must be positive");
  const double period = kPi * eps;
  std::vector<double> bps{-0.5};
  for (auto m = static_cast<long>(std::ceil(-0.5 / period)); m * period < 0.5; ++m) {
    const double x = m * period;
    if (x > -0.5) bps.push_back(x);
  }
  bps.push_back(0.5);
  std::vector<cplx> vals;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    const double mid = 0.5 * (bps[i] + bps[i + 1]);
    vals.push_back(std::sin(mid / eps) > 0.0 ? 1.0 : -1.0);
  }
  return CellProfile::piecewise(bps, std::move(vals));
}

}  // namespace oscres
