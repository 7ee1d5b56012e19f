#ifndef GABI_QUADRATURE_HPP
#define GABI_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace gabi::quad {

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; mirrored).
inline constexpr std::array<double, 8> kGLNodes = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
inline constexpr std::array<double, 8> kGLWeights = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

struct Result {
  double value;
  double abs_err;  // estimate from the last panel-doubling refinement
  int panels;
};

template <class F>
double gl16(F&& f, double lo, double hi) {
  const double c = 0.5 * (lo + hi);
  const double r = 0.5 * (hi - lo);
  double s = 0.0;
  for (std::size_t i = 0; i < kGLNodes.size(); ++i) {
    s += kGLWeights[i] * (f(c + r * kGLNodes[i]) + f(c - r * kGLNodes[i]));
  }
  return r * s;
}

template <class F>
double composite(F&& f, double lo, double hi, int panels) {
  const double step = (hi - lo) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    s += gl16(f, lo + p * step, lo + (p + 1) * step);
  }
  return s;
}

/// Composite 16-point Gauss-Legendre with panel doubling until two successive
/// refinements agree to rel_tol (relative to the last value, floored by
/// abs_floor for near-zero integrals).
template <class F>
Result integrate(F&& f, double lo, double hi, double rel_tol = 1e-13,
                 double abs_floor = 1e-300, int max_panels = 1 << 14) {
  double prev = composite(f, lo, hi, 2);
  for (int panels = 4; panels <= max_panels; panels *= 2) {
    const double cur = composite(f, lo, hi, panels);
    const double err = std::abs(cur - prev);
    if (err <= rel_tol * std::max(std::abs(cur), abs_floor)) {
      return {cur, err, panels};
    }
    prev = cur;
  }
  throw std::runtime_error("quad::integrate: panel limit reached without convergence");
}

}  // namespace gabi::quad

#endif
