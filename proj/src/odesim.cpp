#include "gabi/odesim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gabi/quadrature.hpp"

namespace gabi::odesim {

namespace {
constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kGrazeTol = 1e-8;

rk::State<4> pack(const State4& s) { return {s.x1, s.x2, s.y.real(), s.y.imag()}; }
State4 unpack(const rk::State<4>& v) { return {v[0], v[1], Complex(v[2], v[3])}; }

struct Rhs {
  SystemParams p;
  rk::State<4> operator()(double, const rk::State<4>& v) const {
    const double x1 = v[0], x2 = v[1];
    const double H = elliptic::hamiltonian(x1, x2);
    const double H2 = H * H;
    const double force = p.eps * H2 * H2 * (1.0 - x1);
    return {-2.0 * x2,
            3.0 * (1.0 - x1 * x1) + p.kappa.real() * v[2] + p.kappa.imag() * v[3],
            -p.rho * v[2] - p.omega * v[3] + force,
            p.omega * v[2] - p.rho * v[3]};
  }
};

void check_box(const rk::State<4>& v) {
  if (std::abs(v[0]) > 3.0 || std::abs(v[1]) > 4.0 || std::hypot(v[2], v[3]) > 1.0) {
    throw std::runtime_error("trajectory left the working box |x1|<=3, |x2|<=4, |y|<=1");
  }
}

void check_tol(double tol) {
  if (!(tol >= 1e-13 && tol <= 1e-6)) {
    throw std::invalid_argument("tolerance must lie in [1e-13, 1e-6]");
  }
}

bool on_section(double x1) { return x1 >= -2.0 && x1 < -1.0; }

// Locate x2 = 0 inside an accepted step by bisection on the dense output.
double locate_zero_x2(const rk::DenseStep<4>& ds, double ta, double tb) {
  double fa = ds.eval(ta)[1];
  for (int it = 0; it < 80; ++it) {
    const double tm = 0.5 * (ta + tb);
    const double fm = ds.eval(tm)[1];
    if ((fm > 0.0) == (fa > 0.0)) {
      ta = tm;
      fa = fm;
    } else {
      tb = tm;
    }
    if (tb - ta < 1e-10) break;
  }
  return 0.5 * (ta + tb);
}

// Stepping loop shared by the trajectory/return primitives: integrates the 4D
// field, locating downward section crossings; grazing crossings reject the
// step and retry at half size. on_event returning false stops at the event.
template <class OnStep, class OnEvent>
State4 drive(const SystemParams& p, State4 s0, double t_end, double tol, OnStep&& on_step,
             OnEvent&& on_event) {
  const Rhs rhs{p};
  rk::Options opt;
  opt.rel_tol = tol;
  opt.abs_tol = tol * 1e-2;

  double t_cur = 0.0;
  rk::State<4> y_cur = pack(s0);
  bool stop = false;
  int graze_count = 0;

  while (t_cur < t_end && !stop) {
    bool graze_retry = false;
    rk::integrate<4>(
        rhs, y_cur, t_cur, t_end, opt,
        [&](const rk::DenseStep<4>& ds, double t_new, const rk::State<4>& y_new) {
          check_box(y_new);
          // locate a downward crossing before committing the step, so a
          // grazing one can still reject it
          bool have_crossing = false;
          CrossingEvent ev;
          const double x2a = ds.eval(ds.t0)[1];
          if (x2a > 0.0 && y_new[1] <= 0.0) {
            const double tc = locate_zero_x2(ds, ds.t0, t_new);
            const auto sc = ds.eval(tc);
            if (on_section(sc[0])) {
              const auto rate = rhs(tc, sc);
              if (std::abs(rate[1]) < kGrazeTol) {
                // grazing: reject this step, retry from its start at half size
                t_cur = ds.t0;
                y_cur = ds.eval(ds.t0);
                opt.init_dt = 0.5 * ds.dt;
                graze_retry = true;
                return false;
              }
              ev = CrossingEvent{tc, unpack(sc), rate[1]};
              have_crossing = true;
            }
          }
          if (!on_step(ds, t_new, y_new)) {
            stop = true;
            t_cur = t_new;
            y_cur = y_new;
            return false;
          }
          if (have_crossing && !on_event(ev)) {
            stop = true;
            t_cur = ev.t;
            y_cur = pack(ev.state);
            return false;
          }
          t_cur = t_new;
          y_cur = y_new;
          return true;
        });
    if (graze_retry && ++graze_count > 50) {
      throw std::runtime_error("section crossing stays grazing after repeated step halving");
    }
    if (!graze_retry) break;  // reached t_end or stopped at an event
  }
  return unpack(y_cur);
}
}  // namespace

SystemParams SystemParams::defaults(double eps) {
  return with_kappa(specfun::kappa_constant(), eps);
}

SystemParams SystemParams::with_kappa(Complex kappa, double eps) {
  if (!(eps >= 0.0 && eps <= 0.1)) {
    throw std::invalid_argument("SystemParams: eps in [0, 0.1] required");
  }
  return SystemParams{kSqrt3, kSqrt3, kappa, eps};
}

State4 vector_field(const State4& s, const SystemParams& p) {
  const Rhs rhs{p};
  return unpack(rhs(0.0, pack(s)));
}

Mat4 jacobian_at_saddle(const SystemParams& p) {
  // d(eps H^4 (1-x1)) vanishes at ((1,0),0) because H(1,0) = 0 with H^4 flat.
  Mat4 j{};
  j[0][1] = -2.0;
  j[1][0] = -6.0;
  j[1][2] = p.kappa.real();
  j[1][3] = p.kappa.imag();
  j[2][2] = -p.rho;
  j[2][3] = -p.omega;
  j[3][2] = p.omega;
  j[3][3] = -p.rho;
  return j;
}

std::array<Complex, 4> saddle_spectrum(const SystemParams& p) {
  const Mat4 j = jacobian_at_saddle(p);
  // lower-left block is identically zero, so the spectrum splits into the
  // two diagonal 2x2 blocks
  auto eig2 = [](double a, double b, double c, double d) {
    const double tr = a + d;
    const Complex disc = std::sqrt(Complex(tr * tr - 4.0 * (a * d - b * c), 0.0));
    return std::pair{0.5 * (tr + disc), 0.5 * (tr - disc)};
  };
  const auto [l1, l2] = eig2(j[0][0], j[0][1], j[1][0], j[1][1]);
  const auto [l3, l4] = eig2(j[2][2], j[2][3], j[3][2], j[3][3]);
  return {l1, l2, l3, l4};
}

State4 Trajectory::at(double t) const {
  if (steps.empty()) throw std::runtime_error("Trajectory::at: empty trajectory");
  auto it = std::upper_bound(steps.begin(), steps.end(), t,
                             [](double tv, const rk::DenseStep<4>& ds) { return tv < ds.t0; });
  const auto& ds = (it == steps.begin()) ? steps.front() : *(it - 1);
  return unpack(ds.eval(std::clamp(t, ds.t0, ds.t0 + ds.dt)));
}

Trajectory integrate_trajectory(const State4& s0, double t_end, const SystemParams& p,
                                double tol) {
  check_tol(tol);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(s0);
  drive(
      p, s0, t_end, tol,
      [&](const rk::DenseStep<4>& ds, double t_new, const rk::State<4>& y_new) {
        traj.steps.push_back(ds);
        traj.times.push_back(t_new);
        traj.states.push_back(unpack(y_new));
        return true;
      },
      [&](const CrossingEvent& ev) {
        traj.events.push_back(ev);
        return true;
      });
  return traj;
}

namespace {
struct SurfaceModel {
  double h = 0.0;
  genabel::NormalVariation g;
};

SurfaceModel surface_model(double h, Complex a) {
  std::size_t n = 2048;
  const double T = elliptic::period(h);
  while (n < static_cast<std::size_t>(64.0 * T)) n *= 2;
  const auto orbit = elliptic::orbit_sample(h, n, elliptic::Anchor::LeftRoot);
  return {h, genabel::normal_variation(genabel::orbit_spectrum(orbit), a)};
}

State4 surface_start(double h, const SystemParams& p, const SurfaceModel& sm) {
  const double x1 = elliptic::cubic_roots(h).x1;
  const double h4 = h * h * h * h;
  return {x1, 0.0, p.eps * h4 * sm.g.value(0.0)};
}

CrossingEvent next_crossing(const SystemParams& p, const State4& from, double t_max,
                            double tol) {
  CrossingEvent hit;
  bool found = false;
  drive(
      p, from, t_max, tol, [](const rk::DenseStep<4>&, double, const rk::State<4>&) { return true; },
      [&](const CrossingEvent& ev) {
        if (ev.t <= 1e-9) return true;  // departing the section at t = 0
        hit = ev;
        found = true;
        return false;
      });
  if (!found) {
    throw std::runtime_error("no section return within the time budget (t_max = " +
                             std::to_string(t_max) + ")");
  }
  return hit;
}

std::pair<ReturnRecord, State4> section_return_state(double h, const SystemParams& p,
                                                     int warmup, double tol) {
  check_tol(tol);
  if (!(h > 0.0 && h < 4.0)) throw std::domain_error("section_return: 0 < h < 4");
  const SurfaceModel sm = surface_model(h, p.a());
  const double t_budget = 10.0 * elliptic::period(h);

  State4 s = surface_start(h, p, sm);
  for (int k = 0; k < warmup; ++k) {
    s = next_crossing(p, s, t_budget, tol).state;
  }
  const double h_in = elliptic::hamiltonian(s.x1, s.x2);
  const CrossingEvent ev = next_crossing(p, s, t_budget, tol);
  const double h_out = elliptic::hamiltonian(ev.state.x1, ev.state.x2);
  return {{h_in, h_out, h_out - h_in, ev.t, warmup}, s};
}
}  // namespace

ReturnRecord section_return(double h, const SystemParams& p, int warmup, double tol) {
  return section_return_state(h, p, warmup, tol).first;
}

LocatedCycle limit_cycle_locate(const SystemParams& p, double h_lo, double h_hi, double tol) {
  if (p.eps <= 0.0) throw std::invalid_argument("limit_cycle_locate: eps > 0 required");
  constexpr int kWarmup = 5;

  auto [lo, lo_state] = section_return_state(h_lo, p, kWarmup, tol);
  auto [hi, hi_state] = section_return_state(h_hi, p, kWarmup, tol);
  if ((lo.delta_h > 0.0) == (hi.delta_h > 0.0)) {
    throw std::runtime_error("limit_cycle_locate: no sign change of Delta H over [" +
                             std::to_string(h_lo) + ", " + std::to_string(h_hi) +
                             "]; eps may be too large or h below the resolvable floor");
  }
  const double target = p.eps * 1e-10;
  const double sign_lo = lo.delta_h > 0.0 ? 1.0 : -1.0;
  double a = h_lo, b = h_hi;
  ReturnRecord best = std::abs(lo.delta_h) < std::abs(hi.delta_h) ? lo : hi;
  State4 best_state = std::abs(lo.delta_h) < std::abs(hi.delta_h) ? lo_state : hi_state;
  for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
    const double m = 0.5 * (a + b);
    const auto [rm, sm_state] = section_return_state(m, p, kWarmup, tol);
    if (std::abs(rm.delta_h) < std::abs(best.delta_h)) {
      best = rm;
      best_state = sm_state;
    }
    if (std::abs(best.delta_h) < target) break;
    if ((rm.delta_h > 0.0) == (sign_lo > 0.0)) {
      a = m;
    } else {
      b = m;
    }
  }
  return {best.h_in, std::abs(best.delta_h), lo.delta_h, hi.delta_h, best_state};
}

double surface_residual(const SystemParams& p, double h, int warmup, double tol) {
  check_tol(tol);
  if (warmup < 5) throw std::invalid_argument("surface_residual: warmup >= 5 required");
  if (p.eps == 0.0) return 0.0;  // y = 0 is exactly invariant

  SurfaceModel sm = surface_model(h, p.a());
  State4 s = surface_start(h, p, sm);
  const double t_budget = 10.0 * elliptic::period(h);
  for (int k = 0; k < warmup; ++k) {
    s = next_crossing(p, s, t_budget, tol).state;
  }
  const double h_in = elliptic::hamiltonian(s.x1, s.x2);
  sm = surface_model(h_in, p.a());  // re-anchor the reference surface at the relaxed level

  // one more loop, sampled densely
  std::vector<rk::DenseStep<4>> steps;
  double t_ret = 0.0;
  drive(
      p, s, t_budget, tol,
      [&](const rk::DenseStep<4>& ds, double, const rk::State<4>&) {
        steps.push_back(ds);
        return true;
      },
      [&](const CrossingEvent& ev) {
        if (ev.t <= 1e-9) return true;
        t_ret = ev.t;
        return false;
      });
  if (t_ret == 0.0) throw std::runtime_error("surface_residual: no return crossing");

  double worst = 0.0;
  constexpr int kSamples = 512;
  std::size_t si = 0;
  for (int k = 0; k < kSamples; ++k) {
    const double t = t_ret * k / kSamples;
    while (si + 1 < steps.size() && steps[si].t0 + steps[si].dt < t) ++si;
    const auto v = steps[si].eval(t);
    const double H = elliptic::hamiltonian(v[0], v[1]);
    const Complex yref = p.eps * H * H * H * H * sm.g.value(t);
    worst = std::max(worst, std::abs(Complex(v[2], v[3]) - yref));
  }
  return worst;
}

ReducedPlanarField::ReducedPlanarField(const SystemParams& p) : params_(p) {}

const ReducedPlanarField::Level& ReducedPlanarField::level_for(double h) const {
  constexpr double kLogSpacing = 1e-3;
  const long key = std::lround(std::log(h) / kLogSpacing);
  auto it = levels_.find(key);
  if (it == levels_.end()) {
    const double hl = std::exp(key * kLogSpacing);
    Level lv;
    lv.h = hl;
    lv.period = elliptic::period(hl);
    lv.roots = elliptic::cubic_roots(hl);
    std::size_t n = 2048;
    while (n < static_cast<std::size_t>(64.0 * lv.period)) n *= 2;
    lv.g = genabel::normal_variation(
        genabel::orbit_spectrum(elliptic::orbit_sample(hl, n, elliptic::Anchor::LeftRoot)),
        params_.a());
    it = levels_.emplace(key, std::move(lv)).first;
  }
  return it->second;
}

PlanarRate ReducedPlanarField::operator()(double x1, double x2) const {
  const double H = elliptic::hamiltonian(x1, x2);
  if (!(H > 0.0 && H < 4.0) || x1 > 1.0) {
    throw std::domain_error("ReducedPlanarField: point outside the basin D");
  }
  PlanarRate rate{-2.0 * x2, 3.0 * (1.0 - x1 * x1)};
  if (params_.eps == 0.0) return rate;

  const Level& lv = level_for(H);
  // Hamiltonian-time phase from the LeftRoot anchor at the cached level
  const double u = std::clamp((x1 - lv.roots.x1) / (lv.roots.x2 - lv.roots.x1), 0.0, 1.0);
  const double theta_u = std::asin(std::sqrt(u));
  const double q = theta_u == 0.0 ? 0.0 : quad::gl16(
      [&](double th) {
        const double sn = std::sin(th);
        return 1.0 / std::sqrt(lv.roots.x3 - (lv.roots.x1 + (lv.roots.x2 - lv.roots.x1) * sn * sn));
      },
      0.0, theta_u);
  const double tau = x2 <= 0.0 ? q : lv.period - q;

  const double H2 = H * H;
  rate.dx2 += params_.eps * H2 * H2 * std::real(std::conj(params_.kappa) * lv.g.value(tau));
  return rate;
}

ReturnRecord ReducedPlanarField::section_return(double h, double tol) const {
  check_tol(tol);
  const double x1_left = elliptic::cubic_roots(h).x1;
  const double T = elliptic::period(h);

  auto rhs = [this](double, const rk::State<2>& v) {
    const PlanarRate r = (*this)(v[0], v[1]);
    return rk::State<2>{r.dx1, r.dx2};
  };
  rk::Options opt;
  opt.rel_tol = tol;
  opt.abs_tol = tol * 1e-2;

  double h_out = 0.0, t_ret = 0.0;
  bool found = false;
  rk::integrate<2>(rhs, {x1_left, 0.0}, 0.0, 10.0 * T, opt,
                   [&](const rk::DenseStep<2>& ds, double t_new, const rk::State<2>& y_new) {
                     const double x2a = ds.eval(ds.t0)[1];
                     if (x2a > 0.0 && y_new[1] <= 0.0 && t_new > 1e-9) {
                       double ta = ds.t0, tb = t_new, fa = x2a;
                       for (int it = 0; it < 80 && tb - ta > 1e-10; ++it) {
                         const double tm = 0.5 * (ta + tb);
                         const double fm = ds.eval(tm)[1];
                         if ((fm > 0.0) == (fa > 0.0)) {
                           ta = tm;
                           fa = fm;
                         } else {
                           tb = tm;
                         }
                       }
                       const auto sc = ds.eval(0.5 * (ta + tb));
                       if (sc[0] >= -2.0 && sc[0] < -1.0) {
                         h_out = elliptic::hamiltonian(sc[0], sc[1]);
                         t_ret = 0.5 * (ta + tb);
                         found = true;
                         return false;
                       }
                     }
                     return true;
                   });
  if (!found) throw std::runtime_error("reduced section_return: no return crossing");
  return {h, h_out, h_out - h, t_ret, 0};
}

}  // namespace gabi::odesim
