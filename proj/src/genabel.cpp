#include "gabi/genabel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gabi::genabel {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kRefineFloor = 1e-6;
constexpr double kPeriodGuard = 200.0;

std::size_t default_grid(double T) {
  std::size_t n = 2048;
  while (n < static_cast<std::size_t>(64.0 * T)) n *= 2;
  return n;
}

Complex pow_model(double h) {
  // h^{(1-i)/2}, principal branch on h > 0
  return std::exp(Complex(0.5, -0.5) * std::log(h));
}
}  // namespace

TriangularRep rep_product(const TriangularRep& w, const TriangularRep& v) {
  return {w.lambda * v.lambda,
          w.theta_plus * v.lambda + v.theta_plus / w.lambda,
          w.theta_minus / v.lambda + v.theta_minus * w.lambda,
          w.phi * v.lambda + v.phi * w.lambda + w.theta_minus * v.theta_plus};
}

TriangularRep rep_inverse(const TriangularRep& w) {
  return {1.0 / w.lambda, -w.theta_plus, -w.theta_minus,
          (w.theta_plus * w.theta_minus - w.phi / w.lambda) / w.lambda};
}

Complex psi(const TriangularRep& w) {
  const Complex den = w.lambda * w.lambda - 1.0;
  if (std::abs(den) < 1e-12) {
    throw std::domain_error("psi: lambda^2 - 1 is singular");
  }
  return w.theta_plus * w.theta_minus / den + w.phi / w.lambda;
}

Complex psi_tilde(const TriangularRep& w) {
  const Complex den = w.lambda * w.lambda - 1.0;
  if (std::abs(den) < 1e-9) {
    // unit-determinant stratum (commutators land here)
    return w.theta_plus * w.theta_minus;
  }
  return den * psi(w);
}

double cocycle_residual(const TriangularRep& w, const TriangularRep& v) {
  const double al = std::abs(w.lambda), av = std::abs(v.lambda),
               alv = std::abs(w.lambda * v.lambda);
  if (std::abs(al - 1.0) < 1e-9 || std::abs(av - 1.0) < 1e-9 || std::abs(alv - 1.0) < 1e-9) {
    throw std::domain_error("cocycle_residual: |lambda|, |mu|, |lambda mu| must differ from 1");
  }
  const Complex l2 = w.lambda * w.lambda;
  const Complex m2 = v.lambda * v.lambda;
  const TriangularRep comm =
      rep_product(rep_product(w, v), rep_product(rep_inverse(w), rep_inverse(v)));
  const Complex correction =
      l2 * m2 / ((l2 - 1.0) * (m2 - 1.0) * (l2 * m2 - 1.0)) * psi_tilde(comm);
  return std::abs(psi(rep_product(w, v)) - psi(w) - psi(v) - correction);
}

double OrbitSpectrum::omega(int m) const { return 2.0 * kPi * m / period; }

namespace {
// sum over m of modes[m + M] * e^{i m phase} by rotation recurrence,
// optionally weighted by (i m w1) for the derivative.
Complex mode_sum(const std::vector<Complex>& modes, int M, double phase, double w1,
                 bool derivative) {
  const Complex rot = std::exp(Complex(0.0, phase));
  Complex e = std::exp(Complex(0.0, -phase * M));
  Complex s = 0.0;
  for (int m = -M; m <= M; ++m) {
    Complex term = modes[static_cast<std::size_t>(m + M)] * e;
    if (derivative) term *= Complex(0.0, m * w1);
    s += term;
    e *= rot;
  }
  return s;
}
}  // namespace

Complex OrbitSpectrum::value(double t) const {
  return mode_sum(modes, max_mode, 2.0 * kPi * t / period, 0.0, false);
}

OrbitSpectrum orbit_spectrum(const elliptic::Orbit& orbit) {
  const std::size_t n = orbit.size();
  const double T = orbit.period;
  // (1 - x1) is analytic in a strip of half-width ~ pi/(2 sqrt(3)); modes
  // beyond ~6.5 T / (2 pi) * 2 pi are at roundoff. Keep a safety margin.
  const int M = std::min<int>(static_cast<int>(n) / 2 - 1,
                              static_cast<int>(std::ceil(8.0 * T)) + 16);
  OrbitSpectrum sp;
  sp.h = orbit.h;
  sp.period = T;
  sp.anchor = orbit.anchor;
  sp.max_mode = M;
  sp.modes.resize(2 * M + 1);
  for (int m = -M; m <= M; ++m) {
    Complex acc = 0.0;
    const double dphi = -2.0 * kPi * m / static_cast<double>(n);
    const Complex rot = std::exp(Complex(0.0, dphi));
    Complex e = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += (1.0 - orbit.samples[j].x1) * e;
      e *= rot;
      if ((j & 255u) == 255u) {  // cap rotation roundoff accumulation
        e = std::exp(Complex(0.0, dphi * static_cast<double>(j + 1)));
      }
    }
    sp.modes[static_cast<std::size_t>(m + M)] = acc / static_cast<double>(n);
  }
  return sp;
}

Complex NormalVariation::value(double t) const {
  return mode_sum(modes, max_mode, 2.0 * kPi * t / period, 0.0, false);
}

Complex NormalVariation::derivative(double t) const {
  return mode_sum(modes, max_mode, 2.0 * kPi * t / period, 2.0 * kPi / period, true);
}

NormalVariation normal_variation(const OrbitSpectrum& xi, Complex a) {
  NormalVariation g;
  g.period = xi.period;
  g.a = a;
  g.max_mode = xi.max_mode;
  g.modes.resize(xi.modes.size());
  for (int m = -xi.max_mode; m <= xi.max_mode; ++m) {
    g.modes[static_cast<std::size_t>(m + xi.max_mode)] =
        xi.coeff(m) / (Complex(0.0, xi.omega(m)) - a);
  }
  return g;
}

std::vector<Complex> normal_variation_solution(const elliptic::Orbit& orbit, Complex a) {
  const NormalVariation g = normal_variation(orbit_spectrum(orbit), a);
  std::vector<Complex> out(orbit.size());
  for (std::size_t j = 0; j < orbit.size(); ++j) {
    out[j] = g.value(orbit.samples[j].t);
  }
  return out;
}

namespace {
// Shared modal sums. With S+ = sum c_m/(a + i w_m), S- = sum c_m/(i w_m - a):
//   int_0^T xi e^{a t} dt           = (e^{aT} - 1) S+
//   int_0^T xi e^{-a t} dt          = (e^{-aT} - 1) S-
//   int_0^T dt int_0^t ds xi(t) xi(s) e^{a(t-s)}
//       = T sum_m c_m c_{-m} / (-i w_m - a) - (e^{aT} - 1) S+ S-
// Exponentials are combined analytically so nothing exceeds the magnitude of
// the monodromy components themselves (~ e^{sqrt(3) T / 2}).
struct ModalSums {
  Complex splus, sminus, diag, dbl;
};

ModalSums modal_sums(const OrbitSpectrum& xi, Complex a) {
  ModalSums ms{};
  for (int m = -xi.max_mode; m <= xi.max_mode; ++m) {
    const Complex iw(0.0, xi.omega(m));
    const Complex cm = xi.coeff(m);
    ms.splus += cm / (a + iw);
    ms.sminus += cm / (iw - a);
    ms.diag += cm * xi.coeff(-m) / (-iw - a);
  }
  const Complex eaT = std::exp(a * xi.period);
  ms.dbl = xi.period * ms.diag - (eaT - 1.0) * ms.splus * ms.sminus;
  return ms;
}

void check_period_guard(double T) {
  if (T > kPeriodGuard) {
    throw std::range_error("monodromy components exceed representable range for period " +
                           std::to_string(T));
  }
}
}  // namespace

TriangularRep rep_matrix(const OrbitSpectrum& xi, Complex a) {
  check_period_guard(xi.period);
  const ModalSums ms = modal_sums(xi, a);
  const double T = xi.period;
  const Complex lam = std::exp(-a * T / 2.0);
  // theta+ = lambda (e^{aT}-1) S+ = (e^{aT/2} - e^{-aT/2}) S+
  const Complex th_p = (std::exp(a * T / 2.0) - lam) * ms.splus;
  // theta- = (e^{-aT/2} - e^{aT/2}) S-  (lambda^{-1} (e^{-aT}-1) combined)
  const Complex th_m = (lam - std::exp(a * T / 2.0)) * ms.sminus;
  return {lam, th_p, th_m, lam * ms.dbl};
}

TriangularRep rep_matrix(const elliptic::Orbit& orbit, Complex a) {
  return rep_matrix(orbit_spectrum(orbit), a);
}

PsiTerms psi_gamma_terms(const OrbitSpectrum& xi, Complex a) {
  check_period_guard(xi.period);
  const ModalSums ms = modal_sums(xi, a);
  const double T = xi.period;
  PsiTerms out;
  out.t_gamma = T;
  out.boundary_integral = (std::exp(a * T / 2.0) - std::exp(-a * T / 2.0)) * ms.splus;
  out.double_integral = ms.dbl;
  out.psi = out.boundary_integral * out.boundary_integral / (std::exp(-a * T) - 1.0) +
            out.double_integral;
  return out;
}

PsiTerms psi_gamma_terms(const elliptic::Orbit& orbit, Complex a) {
  return psi_gamma_terms(orbit_spectrum(orbit), a);
}

namespace {
struct PsiWithGrid {
  PsiTerms terms;
  double err = 0.0;
  elliptic::Orbit orbit;       // the finer grid actually used
  OrbitSpectrum spectrum;
};

PsiWithGrid psi_with_doubling(double h, Complex a, double tol) {
  if (!(h >= 1e-7 && h < 4.0)) {
    throw std::domain_error("psi_gamma: requires 1e-7 <= h < 4");
  }
  std::size_t n = default_grid(elliptic::period(h));
  PsiTerms prev =
      psi_gamma_terms(elliptic::orbit_sample(h, n, elliptic::Anchor::MiddleRoot), a);
  for (; n <= (1u << 16); n *= 2) {
    auto orbit = elliptic::orbit_sample(h, 2 * n, elliptic::Anchor::MiddleRoot);
    auto sp = orbit_spectrum(orbit);
    const PsiTerms cur = psi_gamma_terms(sp, a);
    const double diff = std::abs(cur.psi - prev.psi);
    if (diff <= tol) {
      return {cur, diff, std::move(orbit), std::move(sp)};
    }
    prev = cur;
  }
  throw std::runtime_error("psi_gamma: grid too coarse at n = 65536; try n >= " +
                           std::to_string(1u << 17));
}
}  // namespace

Complex psi_gamma(double h, Complex a, double tol, double* err_estimate) {
  const PsiWithGrid r = psi_with_doubling(h, a, tol);
  if (err_estimate) *err_estimate = r.err;
  return r.terms.psi;
}

GenAbelianResult j_integral(double h, const specfun::ModelConstants& mc) {
  const PsiWithGrid pw = psi_with_doubling(h, mc.a, 1e-9);
  const Complex psi_val = pw.terms.psi;
  const auto ab = elliptic::abelian_pair(h);
  const Complex bracket = mc.a * psi_val + 2.0 * (ab.i0 - ab.i1);
  const double h4 = h * h * h * h;
  const double j = h4 * std::real(std::conj(mc.kappa) * bracket);

  // direct route: h^4 int Re(conj(kappa) g) dx1 over the loop, dx1 = -2 x2 dt
  const NormalVariation g = normal_variation(pw.spectrum, mc.a);
  double acc = 0.0;
  for (const auto& p : pw.orbit.samples) {
    acc += std::real(std::conj(mc.kappa) * g.value(p.t)) * (-2.0 * p.x2);
  }
  const double j_direct = h4 * acc * pw.orbit.period / static_cast<double>(pw.orbit.size());

  const double scale =
      h4 * (std::abs(std::conj(mc.kappa) * mc.a * psi_val) +
            2.0 * std::abs(mc.kappa) * std::abs(ab.i0 - ab.i1));
  if (std::abs(j - j_direct) > 1e-7 * scale) {
    throw std::runtime_error("j_integral: route disagreement " +
                             std::to_string(std::abs(j - j_direct)) + " at h = " +
                             std::to_string(h));
  }
  return {h, pw.terms.t_gamma, psi_val, j, ab.i0, ab.i1, pw.err};
}

double AsymptoticModel::j_model(double h) const {
  return R * std::pow(h, 4.5) * std::cos(std::log(std::sqrt(h)) - alpha0);
}

Complex AsymptoticModel::psi_model(double h) const { return c0 + c1 * pow_model(h); }

std::vector<double> AsymptoticModel::zeros(int n_max) const {
  std::vector<double> out;
  for (int n = 1; static_cast<int>(out.size()) < n_max; ++n) {
    const double h = std::exp(2.0 * (alpha0 + kPi / 2.0 - n * kPi));
    if (h < 4.0) out.push_back(h);
    if (n > n_max + 8) break;  // alpha0 only shifts the admissible window by O(1)
  }
  return out;
}

AsymptoticModel asymptotic_model(const specfun::ModelConstants& mc) {
  return {mc.R, mc.alpha0, mc.c0, mc.c1};
}

namespace {
// Brent-style bracketed root refinement on f; a, b must straddle a sign change.
template <class F>
double brent(F&& f, double a, double b, double fa, double fb, double xtol) {
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  return b;
}
}  // namespace

std::vector<ZeroEntry> zero_sequence(const specfun::ModelConstants& mc, int n_max) {
  if (n_max < 1) throw std::invalid_argument("zero_sequence: n_max >= 1");
  const AsymptoticModel model = asymptotic_model(mc);
  const auto model_zeros = model.zeros(n_max);
  std::vector<ZeroEntry> out;
  for (double hm : model_zeros) {
    if (hm < kRefineFloor) {
      out.push_back({hm, ZeroSource::ModelOnly});
      continue;
    }
    const double lo = hm * std::exp(-kPi / 2.0);
    const double hi = std::min(hm * std::exp(kPi / 2.0), 4.0 - 1e-7);
    auto jf = [&mc](double x) { return j_integral(x, mc).j_value; };
    const double flo = jf(lo), fhi = jf(hi);
    if ((flo > 0.0) == (fhi > 0.0)) {
      char msg[256];
      std::snprintf(msg, sizeof msg,
                    "zero_sequence: no sign change of J in [%.6g, %.6g] around model zero "
                    "%.6g (J = %.6g and %.6g at the edges)",
                    lo, hi, hm, flo, fhi);
      throw ZeroBracketAnomaly(msg);
    }
    out.push_back({brent(jf, lo, hi, flo, fhi, 1e-12 * hm), ZeroSource::Refined});
  }
  return out;
}

std::pair<Complex, Complex> fit_psi_model(const std::vector<double>& hs,
                                          const std::vector<Complex>& psis) {
  if (hs.size() != psis.size() || hs.size() < 2) {
    throw std::invalid_argument("fit_psi_model: need >= 2 matched samples");
  }
  // complex normal equations for basis {1, h^{(1-i)/2}}
  Complex s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const Complex u = pow_model(hs[k]);
    s11 += 1.0;
    s12 += u;
    s22 += std::conj(u) * u;
    b1 += psis[k];
    b2 += std::conj(u) * psis[k];
  }
  // [n, s12; conj(s12), s22] [c0; c1] = [b1; b2]
  const Complex det = s11 * s22 - s12 * std::conj(s12);
  const Complex c0 = (s22 * b1 - s12 * b2) / det;
  const Complex c1 = (s11 * b2 - std::conj(s12) * b1) / det;
  return {c0, c1};
}

specfun::ModelConstants fit_constants(Complex a) {
  constexpr int kPoints = 25;
  std::vector<double> hs(kPoints);
  std::vector<Complex> psis(kPoints);
  const double lmin = std::log(1e-5), lmax = std::log(1e-3);
  for (int k = 0; k < kPoints; ++k) {
    hs[k] = std::exp(lmin + (lmax - lmin) * k / (kPoints - 1));
    psis[k] = psi_gamma(hs[k], a);
  }
  auto [c0, c1] = fit_psi_model(hs, psis);
  // re-anchor the constant term deep in the tail where the power term is tiny
  const double h_deep = 1e-7;
  c0 = psi_gamma(h_deep, a) - c1 * pow_model(h_deep);
  const Complex kappa = Complex(0.0, 1.0) * (4.0 * kSqrt3 + a * c0);
  specfun::ModelConstants mc = specfun::model_constants(a, kappa);
  mc.c0 = c0;
  mc.c1 = c1;
  const Complex zr = std::conj(kappa) * a * c1;
  mc.R = std::abs(zr);
  mc.alpha0 = std::arg(zr);
  return mc;
}

}  // namespace gabi::genabel
