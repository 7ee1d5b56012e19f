#ifndef GABI_REFERENCE_HPP
#define GABI_REFERENCE_HPP

#include <complex>

namespace gabi::reference {

using Complex = std::complex<double>;

/// Brute-force trigamma: partial sum of 1/(z+n)^2 with an Euler-Maclaurin
/// tail (error < 1e-20 for the default depth). Independent of the
/// recurrence/asymptotic implementation.
Complex trigamma_series(Complex z, int terms = 20000);

/// int_R z^2/sinh^2(z) dz/(z - pi i w) by adaptive panels on [-40, 40]
/// (tail < 1e-14 by the z^2 e^{-2|z|} envelope), Re w < 0.
Complex f_integral_quad(Complex w);

/// (1/sqrt(2 pi)) int_R e^{i k t} / cosh^2 t dt, truncated at |t| = 20.
double sech2_fourier_quad(double k);

/// Period integral with raw inverse-square-root endpoint singularities via
/// tanh-sinh (double-exponential) quadrature; no smoothing substitution.
double period_tanh_sinh(double h, double tol = 1e-12);

}  // namespace gabi::reference

#endif
