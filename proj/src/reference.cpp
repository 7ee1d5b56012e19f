#include "gabi/reference.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gabi/elliptic.hpp"
#include "gabi/quadrature.hpp"

namespace gabi::reference {

namespace {
constexpr double kPi = std::numbers::pi;

// z^2 / sinh^2 z, series-switched near the removable point
double sinh_ratio(double z) {
  if (std::abs(z) < 1e-2) {
    const double z2 = z * z;
    return 1.0 - z2 / 3.0 + z2 * z2 / 15.0;
  }
  const double s = z / std::sinh(z);
  return s * s;
}
}  // namespace

Complex trigamma_series(Complex z, int terms) {
  Complex sum = 0.0;
  for (int n = 0; n < terms; ++n) {
    const Complex d = z + static_cast<double>(n);
    sum += 1.0 / (d * d);
  }
  // Euler-Maclaurin tail of sum_{n>=N} 1/(z+n)^2
  const Complex zn = z + static_cast<double>(terms);
  sum += 1.0 / zn + 0.5 / (zn * zn) + 1.0 / (6.0 * zn * zn * zn);
  return sum;
}

Complex f_integral_quad(Complex w) {
  if (!(w.real() < 0.0)) throw std::domain_error("f_integral_quad: Re w < 0");
  const Complex pole = kPi * Complex(0.0, 1.0) * w;
  auto re_part = [&](double z) { return std::real(sinh_ratio(z) / (z - pole)); };
  auto im_part = [&](double z) { return std::imag(sinh_ratio(z) / (z - pole)); };
  const double re = quad::integrate(re_part, -40.0, 40.0, 1e-13, 1e-12).value;
  const double im = quad::integrate(im_part, -40.0, 40.0, 1e-13, 1e-12).value;
  return {re, im};
}

double sech2_fourier_quad(double k) {
  auto f = [k](double t) {
    const double c = std::cosh(t);
    return std::cos(k * t) / (c * c);
  };
  return quad::integrate(f, -20.0, 20.0, 1e-13).value / std::sqrt(2.0 * kPi);
}

double period_tanh_sinh(double h, double tol) {
  const auto r = elliptic::cubic_roots(h);
  const double c = 0.5 * (r.x1 + r.x2);
  const double half = 0.5 * (r.x2 - r.x1);

  // u = tanh((pi/2) sinh t); 1 -+ u computed in stable exponential form
  auto f = [&](double t) {
    const double s = 0.5 * kPi * std::sinh(t);
    const double em = std::exp(-2.0 * s);
    const double one_minus_u = 2.0 * em / (1.0 + em);      // 1 - tanh(s)
    const double one_plus_u = 2.0 / (1.0 + em);            // 1 + tanh(s)
    const double u = std::tanh(s);
    const double x = c + half * u;
    const double p = (half * one_plus_u) * (half * one_minus_u) * (r.x3 - x);
    const double wgt = 0.5 * kPi * std::cosh(t) / std::pow(std::cosh(s), 2);
    return wgt / std::sqrt(p);
  };

  const double tmax = 4.0;
  double step = 0.5;
  auto trap = [&](double dt) {
    double s = f(0.0);
    for (double t = dt; t <= tmax; t += dt) s += f(t) + f(-t);
    return s * dt * half;
  };
  double prev = trap(step);
  for (int lvl = 0; lvl < 8; ++lvl) {
    step *= 0.5;
    const double cur = trap(step);
    if (std::abs(cur - prev) <= tol * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace gabi::reference
