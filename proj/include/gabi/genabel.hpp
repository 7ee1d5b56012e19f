#ifndef GABI_GENABEL_HPP
#define GABI_GENABEL_HPP

#include <complex>
#include <stdexcept>
#include <vector>

#include "gabi/elliptic.hpp"
#include "gabi/specfun.hpp"

namespace gabi::genabel {

/// Element (lambda, theta+, theta-, phi) of the group of upper-triangular
/// matrices [[l, th-, phi], [0, 1/l, th+], [0, 0, l]], lambda != 0.
struct TriangularRep {
  Complex lambda;
  Complex theta_plus;
  Complex theta_minus;
  Complex phi;
};

TriangularRep rep_product(const TriangularRep& w, const TriangularRep& v);
TriangularRep rep_inverse(const TriangularRep& w);

/// psi(W) = theta+ theta- / (lambda^2 - 1) + phi / lambda. Throws for
/// |lambda^2 - 1| < 1e-12.
Complex psi(const TriangularRep& w);

/// psi_tilde(W) = (lambda^2 - 1) psi(W); reduces to theta+ theta- on the
/// unit-determinant stratum (used for commutators).
Complex psi_tilde(const TriangularRep& w);

/// Defect of the product rule
///   psi(WV) = psi(W) + psi(V)
///           + l^2 m^2 / ((l^2-1)(m^2-1)(l^2 m^2-1)) * psi_tilde([W,V]).
/// Preconditions |lambda|, |mu|, |lambda mu| != 1.
double cocycle_residual(const TriangularRep& w, const TriangularRep& v);

/// Trigonometric spectrum of (1 - x1) along an orbit: coefficients c_m,
/// m = -max_mode..max_mode, of the uniform-grid DFT. The underlying function
/// is analytic and periodic, so the tail is cut where it reaches roundoff.
struct OrbitSpectrum {
  double h = 0.0;
  double period = 0.0;
  elliptic::Anchor anchor = elliptic::Anchor::MiddleRoot;
  int max_mode = 0;
  std::vector<Complex> modes;  // size 2*max_mode+1, index m + max_mode

  Complex coeff(int m) const { return modes[static_cast<std::size_t>(m + max_mode)]; }
  double omega(int m) const;
  Complex value(double t) const;  // (1 - x1)(t)
};

OrbitSpectrum orbit_spectrum(const elliptic::Orbit& orbit);

/// Periodic solution of X_H(g) = a g + (1 - x1) restricted to the orbit,
/// as a trigonometric spectrum (mode-wise division; |Re a| > 0 keeps every
/// denominator away from zero).
struct NormalVariation {
  double period = 0.0;
  Complex a;
  std::vector<Complex> modes;
  int max_mode = 0;

  Complex value(double t) const;
  Complex derivative(double t) const;
};

NormalVariation normal_variation(const OrbitSpectrum& xi, Complex a);

/// g sampled on the orbit grid (convenience over normal_variation).
std::vector<Complex> normal_variation_solution(const elliptic::Orbit& orbit, Complex a);

/// Monodromy representation matrix of the orbit loop. Throws range_error for
/// period > 200 (components ~ e^{sqrt(3) T / 2} leave the representable range).
TriangularRep rep_matrix(const elliptic::Orbit& orbit, Complex a);
TriangularRep rep_matrix(const OrbitSpectrum& xi, Complex a);

/// The two terms of the shifted-window representation of Psi_gamma on a
/// MiddleRoot orbit: boundary = int_{-T/2}^{T/2} xi e^{a t} dt and the
/// ordered double integral; psi = boundary^2/(e^{-aT}-1) + double_integral.
struct PsiTerms {
  double t_gamma = 0.0;
  Complex boundary_integral;
  Complex double_integral;
  Complex psi;
};

PsiTerms psi_gamma_terms(const OrbitSpectrum& xi, Complex a);
PsiTerms psi_gamma_terms(const elliptic::Orbit& orbit, Complex a);

/// Psi_gamma(h) with automatic grid choice and one doubling step; the
/// doubling discrepancy is returned through *err_estimate when non-null.
/// Throws a precision error naming the suggested n if doubling disagrees
/// beyond tol. Domain 1e-7 <= h < 4.
Complex psi_gamma(double h, Complex a, double tol = 1e-9, double* err_estimate = nullptr);

struct GenAbelianResult {
  double h = 0.0;
  double t_gamma = 0.0;
  Complex psi;
  double j_value = 0.0;
  double i0 = 0.0;
  double i1 = 0.0;
  double psi_err = 0.0;  // grid-doubling discrepancy actually achieved
};

/// J(h) via j = h^4 Re[conj(kappa)(a Psi + 2(I0-I1))], cross-checked against
/// the direct quadrature of h^4 * int Re(conj(kappa) g) dx1 on the orbit.
/// Throws on cross-check disagreement beyond 1e-7 of the natural magnitude.
GenAbelianResult j_integral(double h, const specfun::ModelConstants& mc);

struct AsymptoticModel {
  double R = 0.0;
  double alpha0 = 0.0;
  Complex c0;
  Complex c1;

  double j_model(double h) const;        // R h^{9/2} cos(ln sqrt(h) - alpha0)
  Complex psi_model(double h) const;     // c0 + c1 h^{(1-i)/2}, principal branch
  std::vector<double> zeros(int n_max) const;  // h_n = exp(2(alpha0 + pi/2 - n pi)) < 4
};

AsymptoticModel asymptotic_model(const specfun::ModelConstants& mc);

enum class ZeroSource { Refined, ModelOnly };

struct ZeroEntry {
  double h;
  ZeroSource source;
};

/// Raised when a bracket predicted to contain a sign change of J has none.
struct ZeroBracketAnomaly : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Model zeros h_n; those above the 1e-6 refinement floor are polished
/// against the actual J by bracketed root finding (Refined), the rest are
/// reported ModelOnly. Throws ZeroBracketAnomaly when a predicted sign
/// change is absent.
std::vector<ZeroEntry> zero_sequence(const specfun::ModelConstants& mc, int n_max);

/// Least-squares fit of Psi(h) ~ c0 + c1 h^{(1-i)/2} over the given samples.
std::pair<Complex, Complex> fit_psi_model(const std::vector<double>& hs,
                                          const std::vector<Complex>& psis);

/// Constants calibrated from the computed Psi itself: (c0, c1) by the model
/// fit on a log grid of [1e-5, 1e-3] with c0 re-anchored at h = 1e-7, and
/// kappa = i(4 sqrt(3) + a c0), which restores the leading-order
/// cancellation in J measured by this build.
specfun::ModelConstants fit_constants(Complex a);

}  // namespace gabi::genabel

#endif
