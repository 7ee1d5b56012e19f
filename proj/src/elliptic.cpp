#include "gabi/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gabi/quadrature.hpp"
#include "gabi/rk45.hpp"

namespace gabi::elliptic {

namespace {
constexpr double kPi = std::numbers::pi;

void require_oval(double h, const char* who) {
  if (!(h > 0.0 && h < 4.0)) {
    throw std::domain_error(std::string(who) + ": requires 0 < h < 4, got h = " +
                            std::to_string(h) + (h <= 0.0 ? " (period diverges at h = 0)"
                                                          : " (orbit degenerates at h = 4)"));
  }
}

double cubic(double x, double h) { return x * x * x - 3.0 * x + 2.0 - h; }

// Integrand of the bounded-segment representation after x = x1 + (x2-x1) sin^2(theta):
// both inverse-square-root endpoint singularities cancel.
struct SegIntegrand {
  CubicRoots r;
  double weight_x;  // 0: period; 1: x-weighted (I1)
  double operator()(double th) const {
    const double s = std::sin(th);
    const double x = r.x1 + (r.x2 - r.x1) * s * s;
    const double g = 2.0 / std::sqrt(r.x3 - x);
    return weight_x == 0.0 ? g : g * x;
  }
};
}  // namespace

double hamiltonian(double x1, double x2) { return x1 * x1 * x1 - 3.0 * x1 - x2 * x2 + 2.0; }

CubicRoots cubic_roots(double h) {
  if (!(h >= 0.0 && h <= 4.0)) {
    throw std::domain_error("cubic_roots: no three real roots outside 0 <= h <= 4, got h = " +
                            std::to_string(h));
  }
  // x = 2 cos(phi_k), cos(3 phi) = (h-2)/2
  const double phi = std::acos(std::clamp((h - 2.0) / 2.0, -1.0, 1.0)) / 3.0;
  double r[3] = {2.0 * std::cos(phi + 2.0 * kPi / 3.0), 2.0 * std::cos(phi + 4.0 * kPi / 3.0),
                 2.0 * std::cos(phi)};
  std::sort(r, r + 3);
  for (double& x : r) {
    const double d = 3.0 * x * x - 3.0;
    if (std::abs(d) > 1e-8) x -= cubic(x, h) / d;
  }
  return {r[0], r[1], r[2]};
}

double period(double h) {
  require_oval(h, "period");
  return quad::integrate(SegIntegrand{cubic_roots(h), 0.0}, 0.0, 0.5 * kPi, 1e-13).value;
}

double period_outer(double h) {
  require_oval(h, "period_outer");
  const CubicRoots r = cubic_roots(h);
  // x = x3 + tan^2(phi); integrand becomes
  // 2 / sqrt((sin^2 + cos^2 (x3-x1))(sin^2 + cos^2 (x3-x2))), smooth on [0, pi/2].
  const double d1 = r.x3 - r.x1, d2 = r.x3 - r.x2;
  auto f = [d1, d2](double phi) {
    const double s2 = std::sin(phi) * std::sin(phi);
    const double c2 = 1.0 - s2;
    return 2.0 / std::sqrt((s2 + c2 * d1) * (s2 + c2 * d2));
  };
  return quad::integrate(f, 0.0, 0.5 * kPi, 1e-13).value;
}

AbelianPair abelian_pair(double h) {
  require_oval(h, "abelian_pair");
  const CubicRoots r = cubic_roots(h);
  const double i0 = quad::integrate(SegIntegrand{r, 0.0}, 0.0, 0.5 * kPi, 1e-13).value;
  const double i1 = quad::integrate(SegIntegrand{r, 1.0}, 0.0, 0.5 * kPi, 1e-13).value;
  return {i0, i1};
}

std::pair<double, double> picard_fuchs_residual(double h, double step) {
  require_oval(h, "picard_fuchs_residual");
  if (step > h / 10.0) {
    throw std::invalid_argument("picard_fuchs_residual: step > h/10 loses precision");
  }
  auto d_richardson = [h](auto&& f, double s) {
    const double d1 = (f(h + s) - f(h - s)) / (2.0 * s);
    const double d2 = (f(h + 0.5 * s) - f(h - 0.5 * s)) / s;
    return (4.0 * d2 - d1) / 3.0;
  };
  auto I0 = [](double x) { return abelian_pair(x).i0; };
  auto I1 = [](double x) { return abelian_pair(x).i1; };
  const AbelianPair ab = abelian_pair(h);
  const double lhs = 6.0 * h * (h - 4.0);
  const double r0 = lhs * d_richardson(I0, step) + (h - 2.0) * ab.i0 + 2.0 * ab.i1;
  const double r1 = lhs * d_richardson(I1, step) - 2.0 * ab.i0 - (h - 2.0) * ab.i1;
  return {std::abs(r0) / std::abs(ab.i0), std::abs(r1) / std::abs(ab.i0)};
}

Orbit orbit_sample(double h, std::size_t n, Anchor anchor) {
  require_oval(h, "orbit_sample");
  if (n < 64) throw std::invalid_argument("orbit_sample: n >= 64 required");

  const CubicRoots r = cubic_roots(h);
  const double T = period(h);
  const double x0 = (anchor == Anchor::MiddleRoot) ? r.x2 : r.x1;

  auto rhs = [](double, const rk::State<2>& s) {
    return rk::State<2>{-2.0 * s[1], 3.0 * (1.0 - s[0] * s[0])};
  };
  rk::Options opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-14;

  Orbit orbit;
  orbit.h = h;
  orbit.period = T;
  orbit.anchor = anchor;
  orbit.samples.resize(n);
  orbit.samples[0] = {0.0, x0, 0.0};

  std::size_t next = 1;
  const double dt_grid = T / static_cast<double>(n);
  rk::integrate<2>(rhs, {x0, 0.0}, 0.0, T, opt,
                   [&](const rk::DenseStep<2>& ds, double t_new, const rk::State<2>&) {
                     while (next < n && next * dt_grid <= t_new + 1e-12 * T) {
                       const double tq = next * dt_grid;
                       const auto y = ds.eval(tq);
                       orbit.samples[next] = {tq, y[0], y[1]};
                       ++next;
                     }
                     return true;
                   });

  double drift = 0.0;
  for (const auto& p : orbit.samples) {
    drift = std::max(drift, std::abs(hamiltonian(p.x1, p.x2) - h));
  }
  if (drift > 1e-8) {
    throw std::runtime_error("orbit_sample: energy drift " + std::to_string(drift) +
                             " exceeds 1e-8; tighten integrator tolerance");
  }
  return orbit;
}

double homoclinic_profile(double t) {
  const double c = std::cosh(std::numbers::sqrt3 * t);
  return 3.0 / (c * c);
}

double phase_on_oval(double x1, double x2) {
  const double h = hamiltonian(x1, x2);
  require_oval(h, "phase_on_oval");
  const CubicRoots r = cubic_roots(h);
  const double T = period(h);
  const double u = std::clamp((x1 - r.x1) / (r.x2 - r.x1), 0.0, 1.0);
  const double theta_u = std::asin(std::sqrt(u));
  const double q =
      theta_u == 0.0
          ? 0.0
          : quad::integrate(
                [&r](double th) {
                  const double s = std::sin(th);
                  return 1.0 / std::sqrt(r.x3 - (r.x1 + (r.x2 - r.x1) * s * s));
                },
                0.0, theta_u, 1e-12)
                .value;
  // lower half (x2 <= 0) runs from the left root forward in time
  return x2 <= 0.0 ? q : T - q;
}

}  // namespace gabi::elliptic
