#ifndef GABI_SPECFUN_HPP
#define GABI_SPECFUN_HPP

#include <complex>
#include <utility>

namespace gabi {

using Complex = std::complex<double>;

namespace specfun {

/// Closed-form constants of the coupled system at a = -rho + i*omega,
/// plus the derived amplitude/phase of the oscillatory zero model.
struct ModelConstants {
  Complex a;       // -rho + i*omega
  Complex kappa;   // coupling constant; default from kappa_constant()
  Complex c0;      // constant term of the asymptotic model
  Complex c1;      // coefficient of h^{(1-i)/2}
  double R;        // |conj(kappa) * a * c1|
  double alpha0;   // arg(conj(kappa) * a * c1), radians
};

/// Trigamma psi'(z) for complex z off the poles (non-positive integers).
/// Upward recurrence psi'(z) = psi'(z+1) + 1/z^2 until Re z >= 10, then the
/// asymptotic series truncated after the B_12 term. Relative error <= ~1e-13
/// in that regime.
Complex trigamma(Complex z);

/// The resolvent-type integral of the sech^2 spectral density,
///   F(w) = \int_R z^2/sinh^2(z) dz/(z - pi*i*w),  Re w < 0,
/// via its closed form pi*i*(1 - 2w - 2w^2 psi'(-w)).
Complex f_integral(Complex w);

/// Unitary Fourier transform of 1/cosh^2 at frequency k:
/// sqrt(pi/2) * k / sinh(k*pi/2), with the k -> 0 limit handled by series.
double sech2_fourier(double k);

/// The coupling constant kappa evaluated from its trigamma closed form.
Complex kappa_constant();

/// (C0, C1) closed forms at parameter a with -2*sqrt(3) < Re a < 0.
std::pair<Complex, Complex> c_constants(Complex a);

/// Constants bundle at the default a = -sqrt(3) + i*sqrt(3).
ModelConstants model_constants();

/// Constants bundle with an explicit kappa (testing/override hook); c0, c1
/// stay the closed forms of `a`, R and alpha0 follow the supplied kappa.
ModelConstants model_constants(Complex a, Complex kappa);

}  // namespace specfun
}  // namespace gabi

#endif
