#include "gabi/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "gabi/elliptic.hpp"
#include "gabi/genabel.hpp"
#include "gabi/odesim.hpp"
#include "gabi/reference.hpp"

namespace gabi::verify {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;

struct Sub {
  std::ostringstream out;
  bool ok = true;

  void check(bool cond, const std::string& text) {
    ok = ok && cond;
    out << "\n    " << (cond ? "ok  " : "FAIL") << " " << text;
  }
  void note(const std::string& text) { out << "\n    note " << text; }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string fmtc(Complex v) {
  std::ostringstream os;
  os.precision(10);
  os << v.real() << (v.imag() < 0 ? " - " : " + ") << std::abs(v.imag()) << "i";
  return os.str();
}

template <class F>
CheckResult timed(int id, std::string name, double budget_s, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Sub sub;
  body(sub);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0) {
    sub.check(secs < budget_s, "runtime " + fmt(secs) + " s < " + fmt(budget_s) + " s");
  }
  return {id, std::move(name), sub.ok, sub.out.str(), secs};
}

std::vector<std::pair<double, Complex>> psi_fit_samples(Complex a) {
  std::vector<std::pair<double, Complex>> out;
  const double lmin = std::log(1e-5), lmax = std::log(1e-3);
  constexpr int kPoints = 25;
  for (int k = 0; k < kPoints; ++k) {
    const double h = std::exp(lmin + (lmax - lmin) * k / (kPoints - 1));
    out.emplace_back(h, genabel::psi_gamma(h, a));
  }
  return out;
}
}  // namespace

std::vector<CheckResult> run(Level level, const specfun::ModelConstants& mc) {
  std::vector<CheckResult> results;
  const auto suite_t0 = std::chrono::steady_clock::now();

  results.push_back(timed(1, "kappa reproduction", 1.0, [&](Sub& s) {
    const Complex expect(-0.56, 4.57);
    s.check(std::abs(mc.kappa.real() - expect.real()) < 0.005,
            "|Re kappa - (-0.56)| = " + fmt(std::abs(mc.kappa.real() - expect.real())) +
                " < 0.005");
    s.check(std::abs(mc.kappa.imag() - expect.imag()) < 0.005,
            "|Im kappa - 4.57| = " + fmt(std::abs(mc.kappa.imag() - expect.imag())) + " < 0.005");
    s.note("kappa = " + fmtc(mc.kappa));
  }));

  results.push_back(timed(2, "kappa identity", 0.0, [&](Sub& s) {
    const Complex rhs = Complex(0, 1) * (4.0 * kSqrt3 + mc.a * mc.c0);
    const double d = std::abs(mc.kappa - rhs);
    s.check(d < 1e-12, "|kappa - i(4 sqrt3 + a C0)| = " + fmt(d) + " < 1e-12");
    const double re = std::abs(std::real(std::conj(mc.kappa) * (mc.a * mc.c0 + 4.0 * kSqrt3)));
    s.check(re < 1e-10, "|Re[conj(kappa)(a C0 + 4 sqrt3)]| = " + fmt(re) + " < 1e-10");
  }));

  results.push_back(timed(3, "trigamma vs series oracle", 0.0, [&](Sub& s) {
    std::mt19937 rng(20240901u);
    std::uniform_real_distribution<double> span(-8.0, 8.0);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      Complex z;
      do {
        z = Complex(span(rng), span(rng));
      } while (z.real() < 0.75 && std::abs(z.imag()) < 0.1 &&
               std::abs(z.real() - std::round(z.real())) < 0.1);
      const Complex ref = reference::trigamma_series(z);
      worst = std::max(worst, std::abs(specfun::trigamma(z) - ref) / std::abs(ref));
    }
    s.check(worst < 1e-10, "max rel err vs series on 50 points = " + fmt(worst) + " < 1e-10");

    double worst_refl = 0.0;
    std::uniform_real_distribution<double> re_d(-3.0, 4.0), im_d(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
      Complex z;
      do {
        z = Complex(re_d(rng), im_d(rng));
      } while (std::abs(z.real() - std::round(z.real())) < 0.05);
      const Complex sz = std::sin(kPi * z);
      const Complex lhs = specfun::trigamma(z) + specfun::trigamma(1.0 - z);
      worst_refl = std::max(worst_refl, std::abs(lhs - kPi * kPi / (sz * sz)));
    }
    s.check(worst_refl < 1e-10, "max reflection defect on 50 points = " + fmt(worst_refl) +
                                    " < 1e-10");
  }));

  results.push_back(timed(4, "F(w) closed form vs quadrature", 0.0, [&](Sub& s) {
    std::mt19937 rng(77u);
    std::uniform_real_distribution<double> re_d(-2.8, -0.11), im_d(-1.2, 1.2);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const Complex w(re_d(rng), im_d(rng));
      worst = std::max(worst,
                       std::abs(specfun::f_integral(w) - reference::f_integral_quad(w)));
    }
    s.check(worst < 1e-8, "max |closed - quadrature| on 10 points = " + fmt(worst) + " < 1e-8");
  }));

  results.push_back(timed(5, "Picard-Fuchs residuals", 10.0, [&](Sub& s) {
    for (double h : {0.1, 0.5, 1.0, 2.0, 3.0, 3.5}) {
      const double step = std::max(1e-5, 1e-3 * h);
      const auto [r0, r1] = elliptic::picard_fuchs_residual(h, step);
      s.check(r0 < 1e-6 && r1 < 1e-6,
              "h = " + fmt(h) + ": residuals " + fmt(r0) + ", " + fmt(r1) + " < 1e-6");
    }
  }));

  results.push_back(timed(6, "period and Abelian asymptotics", 0.0, [&](Sub& s) {
    const double h = 1e-4;
    const double t_res =
        std::abs(elliptic::period(h) + std::log(h) / (2.0 * kSqrt3) - 0.5 * kSqrt3 * std::log(12.0));
    s.check(t_res < 0.01, "|T + log(h)/(2 sqrt3) - (sqrt3/2) log 12| = " + fmt(t_res) + " < 0.01");
    const auto ab = elliptic::abelian_pair(h);
    const double a_res = std::abs(ab.i0 - ab.i1 - 2.0 * kSqrt3);
    s.check(a_res < 1e-3, "|I0 - I1 - 2 sqrt3| = " + fmt(a_res) + " < 1e-3");
  }));

  results.push_back(timed(7, "Psi limits near the separatrix", 60.0, [&](Sub& s) {
    const double h = 1e-5;
    const auto orbit = elliptic::orbit_sample(h, 8192, elliptic::Anchor::MiddleRoot);
    const auto terms = genabel::psi_gamma_terms(orbit, mc.a);
    const Complex sqrt_c1 = kPi * mc.a / std::sin(kPi * mc.a / (2.0 * kSqrt3));
    const double d_first = std::abs(terms.boundary_integral - sqrt_c1);
    s.check(d_first < 1e-3,
            "|inner integral - pi a/sin(pi a/2 sqrt3)| = " + fmt(d_first) + " < 1e-3");
    s.note("inner integral converges like ~0.68 h^{1/4}: measured " + fmt(d_first) +
           ", h^{1/4} = " + fmt(std::pow(h, 0.25)));
    const double d_second = std::abs(terms.double_integral - mc.c0);
    s.check(d_second < 1e-2, "|double integral - C0| = " + fmt(d_second) + " < 1e-2");
    s.note("double integral = " + fmtc(terms.double_integral) + "; distance to sqrt(2 pi) C0 = " +
           fmt(std::abs(terms.double_integral - std::sqrt(2.0 * kPi) * mc.c0)));
  }));

  results.push_back(timed(8, "monodromy representation suite", 0.0, [&](Sub& s) {
    for (double h : {0.5, 1.0, 2.0, 3.0}) {
      const auto orbit = elliptic::orbit_sample(
          h, 4096, elliptic::Anchor::MiddleRoot);
      const double d = std::abs(genabel::psi(genabel::rep_matrix(orbit, mc.a)) -
                                genabel::psi_gamma_terms(orbit, mc.a).psi);
      s.check(d < 1e-8, "psi(rep) vs Psi at h = " + fmt(h) + ": " + fmt(d) + " < 1e-8");
    }
    for (double h : {1.0, 2.0}) {
      const auto orbit = elliptic::orbit_sample(h, 4096, elliptic::Anchor::MiddleRoot);
      elliptic::Orbit doubled;
      doubled.h = h;
      doubled.period = 2.0 * orbit.period;
      doubled.anchor = orbit.anchor;
      doubled.samples = orbit.samples;
      for (const auto& p : orbit.samples) {
        doubled.samples.push_back({p.t + orbit.period, p.x1, p.x2});
      }
      const auto w1 = genabel::rep_matrix(orbit, mc.a);
      const auto w2 = genabel::rep_matrix(doubled, mc.a);
      const auto sq = genabel::rep_product(w1, w1);
      auto rel = [](Complex got, Complex ref) {
        return std::abs(got - ref) / std::max(1e-30, std::abs(ref));
      };
      const double worst =
          std::max({rel(w2.lambda, sq.lambda), rel(w2.theta_plus, sq.theta_plus),
                    rel(w2.theta_minus, sq.theta_minus), rel(w2.phi, sq.phi)});
      s.check(worst < 1e-7, "doubled-orbit squaring at h = " + fmt(h) + ": max rel " +
                                fmt(worst) + " < 1e-7");
    }
    std::mt19937 rng(13u);
    std::uniform_real_distribution<double> mag(0.2, 5.0), ang(0.0, 2.0 * kPi), cmp(-2.0, 2.0);
    double worst = 0.0;
    int done = 0;
    while (done < 1000) {
      auto rnd_rep = [&] {
        double m;
        do {
          m = mag(rng);
        } while (std::abs(m - 1.0) < 1e-3);
        return genabel::TriangularRep{std::polar(m, ang(rng)), Complex(cmp(rng), cmp(rng)),
                                      Complex(cmp(rng), cmp(rng)), Complex(cmp(rng), cmp(rng))};
      };
      const auto w = rnd_rep();
      const auto v = rnd_rep();
      if (std::abs(std::abs(w.lambda * v.lambda) - 1.0) < 1e-3) continue;
      worst = std::max(worst, genabel::cocycle_residual(w, v));
      ++done;
    }
    s.check(worst < 1e-12, "cocycle identity, 1000 random pairs: max residual " + fmt(worst) +
                               " < 1e-12");
  }));

  results.push_back(timed(9, "asymptotic model fit and zero sequence", 0.0, [&](Sub& s) {
    const auto samples = psi_fit_samples(mc.a);
    std::vector<double> hs;
    std::vector<Complex> psis;
    for (const auto& [h, p] : samples) {
      hs.push_back(h);
      psis.push_back(p);
    }
    const auto [c0_fit, c1_fit] = genabel::fit_psi_model(hs, psis);
    const double e0 = std::abs(c0_fit - mc.c0) / std::abs(mc.c0);
    const double e1 = std::abs(c1_fit - mc.c1) / std::abs(mc.c1);
    s.check(e0 < 0.02, "fit C0 rel distance to closed form = " + fmt(e0) + " < 0.02");
    s.check(e1 < 0.02, "fit C1 rel distance to closed form = " + fmt(e1) + " < 0.02");
    s.note("fit C0 = " + fmtc(c0_fit) + "; sqrt(2 pi) C0_closed = " +
           fmtc(std::sqrt(2.0 * kPi) * mc.c0));
    s.note("fit C1 = " + fmtc(c1_fit) + "; C1_closed * 12^{(-3+3i)/2} = " +
           fmtc(mc.c1 * std::pow(Complex(12.0, 0.0), Complex(-1.5, 1.5))));

    const auto model = genabel::asymptotic_model(mc);
    const auto zeros = model.zeros(6);
    bool ratio_ok = zeros.size() >= 2;
    for (std::size_t k = 0; k + 1 < zeros.size(); ++k) {
      ratio_ok = ratio_ok &&
                 std::abs(zeros[k + 1] / zeros[k] - std::exp(-2.0 * kPi)) < 1e-15;
    }
    s.check(ratio_ok, "model zero ratio h_{n+1}/h_n = e^{-2 pi} exactly");

    try {
      const auto seq = genabel::zero_sequence(mc, 3);
      bool found = false;
      for (std::size_t k = 0; k < seq.size(); ++k) {
        if (seq[k].source == genabel::ZeroSource::Refined) {
          const double ratio = seq[k].h / zeros[k];
          const double lim = std::exp(kPi / 4.0);
          s.check(ratio < lim && ratio > 1.0 / lim,
                  "first refined zero " + fmt(seq[k].h) + " vs model " + fmt(zeros[k]) +
                      ": factor " + fmt(std::max(ratio, 1.0 / ratio)) + " < e^{pi/4}");
          found = true;
          break;
        }
      }
      if (!found) s.check(false, "no refined zero produced");
    } catch (const genabel::ZeroBracketAnomaly& e) {
      s.check(false, std::string("zero refinement anomaly: ") + e.what());
      s.note("J(h)/h^4 tends to Re[conj(kappa)(a Psi(0) + 4 sqrt3)] = " +
             fmt(std::real(std::conj(mc.kappa) *
                           (mc.a * genabel::psi_gamma(1e-7, mc.a) + 4.0 * kSqrt3))) +
             ", which does not vanish for these constants; no sign change exists");
    }
  }));

  if (level == Level::Full) {
    results.push_back(timed(10, "return-map dynamics", 0.0, [&](Sub& s) {
      const double eps = 1e-3;
      const auto params = odesim::SystemParams::with_kappa(mc.kappa, eps);

      // Delta H / eps matches J with log-log slope >= 4.5
      std::vector<double> lh, le;
      for (double h : {0.2, 0.1, 0.05}) {
        const auto rec = odesim::section_return(h, params, 5);
        const double j = genabel::j_integral(h, mc).j_value;
        const double diff = std::abs(rec.delta_h / eps - j);
        lh.push_back(std::log(h));
        le.push_back(std::log(diff));
        s.note("h = " + fmt(h) + ": Delta H/eps = " + fmt(rec.delta_h / eps) + ", J = " + fmt(j) +
               ", |diff| = " + fmt(diff));
      }
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t k = 0; k < lh.size(); ++k) {
        sx += lh[k];
        sy += le[k];
        sxx += lh[k] * lh[k];
        sxy += lh[k] * le[k];
      }
      const double n = static_cast<double>(lh.size());
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      s.check(slope >= 4.5, "log-log slope of |Delta H/eps - J| = " + fmt(slope) + " >= 4.5");

      // sign change across the first model-zero bracket, then bisection
      const auto model = genabel::asymptotic_model(mc);
      const auto zeros = model.zeros(1);
      const double h1 = zeros.empty() ? 7e-3 : zeros.front();
      const double lo = h1 * std::exp(-kPi / 2.0), hi = h1 * std::exp(kPi / 2.0);
      bool sign_change_all = true;
      for (double e : {1e-3, 5e-4}) {
        const auto pe = odesim::SystemParams::with_kappa(mc.kappa, e);
        const auto rl = odesim::section_return(lo, pe, 5);
        const auto rh = odesim::section_return(hi, pe, 5);
        const bool change = (rl.delta_h > 0.0) != (rh.delta_h > 0.0);
        sign_change_all = sign_change_all && change;
        s.check(change, "eps = " + fmt(e) + ": Delta H(" + fmt(lo) + ") = " + fmt(rl.delta_h) +
                            ", Delta H(" + fmt(hi) + ") = " + fmt(rh.delta_h) +
                            (change ? ": sign change" : ": same sign"));
        s.note("eps*J at bracket edges: " + fmt(e * genabel::j_integral(lo, mc).j_value) + ", " +
               fmt(e * genabel::j_integral(hi, mc).j_value) +
               " (lower edge is below the ~6e-13 energy-integration floor)");
      }
      if (sign_change_all) {
        try {
          const auto cyc = odesim::limit_cycle_locate(params, lo, hi);
          s.check(cyc.residual < eps * 1e-10, "located h = " + fmt(cyc.h) + " with |Delta H| = " +
                                                  fmt(cyc.residual) + " < eps*1e-10");
        } catch (const std::exception& e) {
          s.check(false, std::string("cycle location failed: ") + e.what());
        }
      } else {
        s.check(false, "bisection skipped: no sign change bracket");
      }

      // surface residual scales like eps^2 under eps-halving
      const double r1 = odesim::surface_residual(params, 0.1);
      const double r2 =
          odesim::surface_residual(odesim::SystemParams::with_kappa(mc.kappa, eps / 2.0), 0.1);
      const double ratio = r1 / r2;
      s.check(ratio > 4.0 / 1.5 && ratio < 4.0 * 1.5,
              "surface residual ratio under eps-halving = " + fmt(ratio) +
                  " within [2.67, 6] (residuals " + fmt(r1) + ", " + fmt(r2) + ")");

      const double total =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_t0).count();
      s.check(total < 1800.0, "full-suite elapsed " + fmt(total) + " s < 1800 s");
    }));
  }

  results.push_back(timed(11, "saddle spectrum", 0.0, [&](Sub& s) {
    for (double eps : {0.0, 1e-3}) {
      const auto spec = odesim::saddle_spectrum(odesim::SystemParams::with_kappa(mc.kappa, eps));
      const Complex expect[4] = {Complex(2.0 * kSqrt3, 0.0), Complex(-2.0 * kSqrt3, 0.0),
                                 Complex(-kSqrt3, kSqrt3), Complex(-kSqrt3, -kSqrt3)};
      double worst = 0.0;
      for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(spec[k] - expect[k]));
      s.check(worst < 1e-10,
              "eps = " + fmt(eps) + ": max eigenvalue defect " + fmt(worst) + " < 1e-10");
    }
    const auto spec = odesim::saddle_spectrum(odesim::SystemParams::with_kappa(mc.kappa, 0.0));
    s.check(-2.0 * kSqrt3 < -kSqrt3 && -kSqrt3 < 0.0 && 0.0 < 2.0 * kSqrt3 &&
                spec[2].real() > spec[1].real(),
            "normal rate -sqrt3 dominated by tangential -2 sqrt3 (ordering holds)");
  }));

  return results;
}

std::string format_report(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  int failures = 0;
  for (const auto& r : results) {
    os << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << r.detail << "\n";
    if (!r.pass) ++failures;
  }
  os << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed")
     << "\n";
  return os.str();
}

}  // namespace gabi::verify
