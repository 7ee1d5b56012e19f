#ifndef GABI_ELLIPTIC_HPP
#define GABI_ELLIPTIC_HPP

#include <cstddef>
#include <vector>

namespace gabi::elliptic {

// H = x1^3 - 3*x1 - x2^2 + 2. Critical values: H(1,0)=0 (saddle, separatrix),
// H(-1,0)=4 (center). Closed ovals gamma_h fill 0 < h < 4.

struct CubicRoots {
  double x1, x2, x3;  // ascending roots of x^3 - 3x + 2 - h
};

enum class Anchor { MiddleRoot, LeftRoot };

struct OrbitPoint {
  double t, x1, x2;
};

/// A periodic orbit of X_H at energy h, sampled on a uniform Hamiltonian-time
/// grid t_j = j*period/n, j = 0..n-1. Immutable after construction.
struct Orbit {
  double h = 0.0;
  double period = 0.0;
  Anchor anchor = Anchor::MiddleRoot;
  std::vector<OrbitPoint> samples;

  std::size_t size() const { return samples.size(); }
};

struct AbelianPair {
  double i0;  // period integral
  double i1;  // -x1 weighted companion
};

double hamiltonian(double x1, double x2);

/// Trigonometric closed-form roots, ascending, one Newton polish each.
/// Valid for 0 <= h <= 4 (double roots at the endpoints).
CubicRoots cubic_roots(double h);

/// Period of gamma_h as the bounded-segment integral with the sin^2
/// substitution removing both endpoint singularities. 0 < h < 4.
double period(double h);

/// Same period from the unbounded representation over [x3, infinity),
/// mapped to a finite smooth integral. Cross-check route.
double period_outer(double h);

AbelianPair abelian_pair(double h);

/// Residuals of the two first-order equations linking (I0, I1) and their
/// h-derivatives, relative to |I0|. Derivatives by Richardson-extrapolated
/// central differences with the given step.
std::pair<double, double> picard_fuchs_residual(double h, double step);

/// Integrate X_H from the anchor root for exactly period(h) and resample on
/// a uniform n-grid. Throws if energy drift along the samples exceeds 1e-8.
Orbit orbit_sample(double h, std::size_t n, Anchor anchor);

/// Limit profile of 1 - x1 along the separatrix loop: 3 / cosh^2(sqrt(3) t).
double homoclinic_profile(double t);

/// Hamiltonian time from the LeftRoot anchor to the oval point (x1, x2) on
/// its own level H(x1,x2); in [0, period).
double phase_on_oval(double x1, double x2);

}  // namespace gabi::elliptic

#endif
