#ifndef GABI_ODESIM_HPP
#define GABI_ODESIM_HPP

#include <array>
#include <complex>
#include <map>
#include <vector>

#include "gabi/elliptic.hpp"
#include "gabi/genabel.hpp"
#include "gabi/rk45.hpp"
#include "gabi/specfun.hpp"

namespace gabi::odesim {

struct SystemParams {
  double rho = 0.0;
  double omega = 0.0;
  Complex kappa;
  double eps = 0.0;  // 0 <= eps <= 0.1

  Complex a() const { return Complex(-rho, omega); }

  /// rho = omega = sqrt(3), kappa from its closed form.
  static SystemParams defaults(double eps);
  static SystemParams with_kappa(Complex kappa, double eps);
};

struct State4 {
  double x1 = 0.0;
  double x2 = 0.0;
  Complex y;
};

State4 vector_field(const State4& s, const SystemParams& p);

using Mat4 = std::array<std::array<double, 4>, 4>;

/// Analytic Jacobian at the saddle ((1,0), y=0). The eps-forcing has a
/// fourth-order zero there, so the lower-left 2x2 block vanishes for all eps.
Mat4 jacobian_at_saddle(const SystemParams& p);

/// Eigenvalues {+2 sqrt3, -2 sqrt3, -rho + i omega, -rho - i omega}, computed
/// from the block-triangular Jacobian.
std::array<Complex, 4> saddle_spectrum(const SystemParams& p);

struct CrossingEvent {
  double t = 0.0;
  State4 state;
  double x2_rate = 0.0;  // dx2/dt at the crossing (transversality witness)
};

struct Trajectory {
  std::vector<double> times;               // accepted step endpoints (times[0] = 0)
  std::vector<State4> states;              // matching states
  std::vector<rk::DenseStep<4>> steps;     // dense interpolants per step
  std::vector<CrossingEvent> events;       // section crossings, ordered in t

  State4 at(double t) const;  // dense-output evaluation
  double t_end() const { return times.empty() ? 0.0 : times.back(); }
};

/// Adaptive integration with dense output and section-crossing events
/// (x2 = 0, x1 in [-2,-1), dx2/dt < 0, grazing steps retried smaller).
/// tol in [1e-13, 1e-6] scales both relative and absolute error.
Trajectory integrate_trajectory(const State4& s0, double t_end, const SystemParams& p,
                                double tol);

struct ReturnRecord {
  double h_in = 0.0;
  double h_out = 0.0;
  double delta_h = 0.0;
  double return_time = 0.0;
  int transient_iterations = 0;
};

/// First-return Hamiltonian increment on the segment {(x1,0): x1 in [-2,-1)}.
/// Starts on the first-order invariant surface y = eps H^4 g and performs
/// `warmup` relaxation returns before the measured one.
ReturnRecord section_return(double h, const SystemParams& p, int warmup,
                            double tol = 1e-13);

struct LocatedCycle {
  double h = 0.0;           // energy of the located cycle (h_in of final loop)
  double residual = 0.0;    // |Delta H| at the located point
  double delta_h_lo = 0.0;  // bracket sign pattern
  double delta_h_hi = 0.0;
  State4 state;             // section state of the located cycle
};

/// Bisection on Delta H(h) over [h_lo, h_hi]; requires a sign change.
/// Refines until |Delta H| < eps * 1e-10 or the bracket is exhausted.
LocatedCycle limit_cycle_locate(const SystemParams& p, double h_lo, double h_hi,
                                double tol = 1e-13);

/// max over one relaxed return loop of |y(t) - eps H^4 g(x(t))|.
double surface_residual(const SystemParams& p, double h, int warmup = 5,
                        double tol = 1e-13);

struct PlanarRate {
  double dx1 = 0.0;
  double dx2 = 0.0;
};

/// The planar system obtained by restricting to the first-order invariant
/// surface: dx = X_H + eps H^4 Re(conj(kappa) g) e2, with g evaluated by its
/// trigonometric spectrum at the matched phase on log-spaced cached energy
/// levels. Lazily caches levels; not safe for concurrent first use.
class ReducedPlanarField {
 public:
  explicit ReducedPlanarField(const SystemParams& p);

  PlanarRate operator()(double x1, double x2) const;

  /// First-return Delta H of the reduced flow from (x1_left(h), 0).
  ReturnRecord section_return(double h, double tol = 1e-13) const;

 private:
  struct Level {
    double h = 0.0;
    double period = 0.0;
    elliptic::CubicRoots roots{};
    genabel::NormalVariation g;
  };
  const Level& level_for(double h) const;

  SystemParams params_;
  mutable std::map<long, Level> levels_;
};

}  // namespace gabi::odesim

#endif
