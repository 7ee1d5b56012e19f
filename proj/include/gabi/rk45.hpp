#ifndef GABI_RK45_HPP
#define GABI_RK45_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace gabi::rk {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  double max_dt = 1e30;
  double init_dt = 0.0;  // 0: choose from the first derivative
};

/// One accepted Dormand-Prince 5(4) step with its quartic dense-output
/// interpolant y(t0 + theta*dt), theta in [0,1].
template <std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double dt = 0.0;
  std::array<State<N>, 5> rcont{};

  State<N> eval(double t) const {
    const double th = (t - t0) / dt;
    const double th1 = 1.0 - th;
    State<N> y{};
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = rcont[0][i] +
             th * (rcont[1][i] + th1 * (rcont[2][i] + th * (rcont[3][i] + th1 * rcont[4][i])));
    }
    return y;
  }
};

namespace dp5 {
inline constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
inline constexpr double a21 = 0.2;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// error coefficients b5 - b4
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// dense-output coefficients
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp5

/// Adaptive Dormand-Prince 5(4) with PI step-size control. Calls
/// on_step(const DenseStep<N>&, double t_new, const State<N>& y_new) after
/// every accepted step; on_step returning false stops the integration early.
template <std::size_t N, class RHS, class StepCb>
State<N> integrate(RHS&& f, State<N> y, double t0, double t1, const Options& opt,
                   StepCb&& on_step) {
  using namespace dp5;
  if (t1 <= t0) throw std::invalid_argument("rk::integrate: requires t1 > t0");

  auto axpy = [](State<N>& out, const State<N>& y0, double h,
                 std::initializer_list<std::pair<double, const State<N>*>> terms) {
    for (std::size_t i = 0; i < N; ++i) {
      double s = 0.0;
      for (const auto& [cfac, k] : terms) s += cfac * (*k)[i];
      out[i] = y0[i] + h * s;
    }
  };

  State<N> k1 = f(t0, y);
  double t = t0;
  double dt = opt.init_dt;
  if (dt <= 0.0) {
    double dn = 0.0, yn = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      dn = std::max(dn, std::abs(k1[i]));
      yn = std::max(yn, std::abs(y[i]));
    }
    dt = 0.01 * (yn + 1.0) / (dn + 1e-8);
  }
  dt = std::min({dt, opt.max_dt, t1 - t0});

  double facold = 1e-4;
  constexpr double beta = 0.04, alpha = 0.2 - beta * 0.75;
  constexpr double safe = 0.9, fac1 = 0.2, fac2 = 10.0;

  while (t < t1) {
    if (dt < 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0)) {
      throw std::runtime_error("rk::integrate: step size underflow");
    }
    const bool last = (t + dt >= t1);
    if (last) dt = t1 - t;

    State<N> ytmp, k2, k3, k4, k5, k6, k7, y1;
    axpy(ytmp, y, dt, {{a21, &k1}});
    k2 = f(t + c2 * dt, ytmp);
    axpy(ytmp, y, dt, {{a31, &k1}, {a32, &k2}});
    k3 = f(t + c3 * dt, ytmp);
    axpy(ytmp, y, dt, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
    k4 = f(t + c4 * dt, ytmp);
    axpy(ytmp, y, dt, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
    k5 = f(t + c5 * dt, ytmp);
    axpy(ytmp, y, dt, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
    k6 = f(t + dt, ytmp);
    axpy(y1, y, dt, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    k7 = f(t + dt, y1);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = dt * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / N);

    const double fac11 = std::pow(std::max(err, 1e-32), alpha);
    if (err <= 1.0) {
      DenseStep<N> ds;
      ds.t0 = t;
      ds.dt = dt;
      for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = dt * k1[i] - ydiff;
        ds.rcont[0][i] = y[i];
        ds.rcont[1][i] = ydiff;
        ds.rcont[2][i] = bspl;
        ds.rcont[3][i] = ydiff - dt * k7[i] - bspl;
        ds.rcont[4][i] = dt * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                               d7 * k7[i]);
      }
      t += dt;
      y = y1;
      k1 = k7;  // FSAL
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac / safe));
      facold = std::max(err, 1e-4);
      dt = std::min(dt / fac, opt.max_dt);
      if (!on_step(ds, t, y)) return y;
    } else {
      dt /= std::min(1.0 / fac1, fac11 / safe);
    }
  }
  return y;
}

}  // namespace gabi::rk

#endif
