#include "gabi/specfun.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gabi::specfun {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;

bool is_pole(Complex z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}
}  // namespace

Complex trigamma(Complex z) {
  if (is_pole(z)) {
    throw std::domain_error("trigamma: pole at z = " + std::to_string(z.real()));
  }
  Complex acc = 0.0;
  while (z.real() < 10.0) {
    acc += 1.0 / (z * z);
    z += 1.0;
  }
  // psi'(z) ~ 1/z + 1/(2z^2) + sum_k B_{2k} z^{-2k-1}
  static constexpr double kBernoulli[] = {1.0 / 6.0,  -1.0 / 30.0,   1.0 / 42.0,
                                          -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0};
  const Complex iz = 1.0 / z;
  const Complex iz2 = iz * iz;
  Complex sum = iz + 0.5 * iz2;
  Complex pw = iz * iz2;
  for (double b : kBernoulli) {
    sum += b * pw;
    pw *= iz2;
  }
  return acc + sum;
}

Complex f_integral(Complex w) {
  if (!(w.real() < 0.0)) {
    throw std::domain_error("f_integral: requires Re w < 0");
  }
  const Complex i(0.0, 1.0);
  return kPi * i * (1.0 - 2.0 * w - 2.0 * w * w * trigamma(-w));
}

double sech2_fourier(double k) {
  const double x = 0.5 * kPi * k;
  double ratio;  // k / sinh(k*pi/2)
  if (std::abs(k) < 1e-4) {
    const double x2 = x * x;
    ratio = (2.0 / kPi) * (1.0 - x2 / 6.0 + 7.0 * x2 * x2 / 360.0);
  } else {
    ratio = k / std::sinh(x);
  }
  return std::sqrt(0.5 * kPi) * ratio;
}

Complex kappa_constant() {
  const Complex psi1 = trigamma(Complex(0.5, -0.5));
  return Complex(0.0, 4.0 * kSqrt3) +
         Complex(3.0, -3.0) * std::sqrt(6.0) / std::sqrt(kPi) * (Complex(1.0, 2.0) - psi1);
}

std::pair<Complex, Complex> c_constants(Complex a) {
  if (!(a.real() > -2.0 * kSqrt3 && a.real() < 0.0)) {
    throw std::domain_error("c_constants: requires -2*sqrt(3) < Re a < 0");
  }
  const Complex w = a / (2.0 * kSqrt3);
  const Complex s = std::sin(kPi * w);
  const Complex c1 = (kPi * a) * (kPi * a) / (s * s);
  const Complex c0 =
      3.0 * std::sqrt(2.0) / std::sqrt(kPi) * (-1.0 + 2.0 * w + 2.0 * w * w * trigamma(-w));
  return {c0, c1};
}

ModelConstants model_constants(Complex a, Complex kappa) {
  auto [c0, c1] = c_constants(a);
  const Complex zr = std::conj(kappa) * a * c1;
  return ModelConstants{a, kappa, c0, c1, std::abs(zr), std::arg(zr)};
}

ModelConstants model_constants() {
  return model_constants(Complex(-kSqrt3, kSqrt3), kappa_constant());
}

}  // namespace gabi::specfun
