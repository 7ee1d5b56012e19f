#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gabi/elliptic.hpp"
#include "gabi/reference.hpp"
#include "gabi/rk45.hpp"

using namespace gabi;
using namespace gabi::elliptic;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;
}  // namespace

TEST_CASE("hamiltonian critical values") {
  CHECK(hamiltonian(1.0, 0.0) == 0.0);    // saddle on the separatrix
  CHECK(hamiltonian(-1.0, 0.0) == 4.0);   // center
  CHECK(hamiltonian(-2.0, 0.0) == 0.0);   // far separatrix endpoint
}

TEST_CASE("cubic roots at exactly solvable levels") {
  const auto r0 = cubic_roots(0.0);
  CHECK(r0.x1 == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(r0.x2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r0.x3 == doctest::Approx(1.0).epsilon(1e-12));

  const auto r2 = cubic_roots(2.0);
  CHECK(r2.x1 == doctest::Approx(-kSqrt3).epsilon(1e-14));
  CHECK(std::abs(r2.x2) < 1e-14);
  CHECK(r2.x3 == doctest::Approx(kSqrt3).epsilon(1e-14));

  const auto r4 = cubic_roots(4.0);
  CHECK(r4.x1 == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r4.x2 == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r4.x3 == doctest::Approx(2.0).epsilon(1e-14));

  CHECK_THROWS_AS(cubic_roots(-0.5), std::domain_error);
  CHECK_THROWS_AS(cubic_roots(4.5), std::domain_error);
}

TEST_CASE("cubic roots satisfy Vieta and the cubic itself") {
  std::mt19937 rng(5u);
  std::uniform_real_distribution<double> hd(1e-6, 4.0 - 1e-6);
  for (int k = 0; k < 200; ++k) {
    const double h = hd(rng);
    const auto r = cubic_roots(h);
    CHECK(r.x1 < r.x2);
    CHECK(r.x2 < r.x3);
    CHECK(std::abs(r.x1 + r.x2 + r.x3) < 1e-12);
    CHECK(std::abs(r.x1 * r.x2 * r.x3 - (h - 2.0)) < 1e-12);
    for (double x : {r.x1, r.x2, r.x3}) {
      CHECK(std::abs(x * x * x - 3.0 * x + 2.0 - h) < 1e-12);
    }
  }
}

TEST_CASE("period near the separatrix follows the log law") {
  // T(h) ~ -log(h)/(2 sqrt3) + const, so a decade step changes T by log(10)/(2 sqrt3)
  const double diff = period(1e-5) - period(1e-4);
  CHECK(std::abs(diff - std::log(10.0) / (2.0 * kSqrt3)) < 1e-4);
}

TEST_CASE("both period representations agree") {
  std::mt19937 rng(11u);
  std::uniform_real_distribution<double> hd(0.05, 3.95);
  for (int k = 0; k < 20; ++k) {
    const double h = hd(rng);
    CHECK(std::abs(period(h) - period_outer(h)) < 1e-9);
  }
}

TEST_CASE("period matches the singular-endpoint tanh-sinh route") {
  CHECK(std::abs(period(2.0) - reference::period_tanh_sinh(2.0)) < 1e-10);
}

TEST_CASE("period is strictly decreasing in h") {
  double prev = period(1e-4);
  for (int k = 1; k <= 50; ++k) {
    const double h = 1e-4 + (4.0 - 2e-4) * k / 50.0;
    const double t = period(h);
    CHECK(t < prev);
    prev = t;
  }
  // center limit: linearization frequency sqrt(12)
  CHECK(std::abs(period(3.9) - 2.0 * kPi / std::sqrt(12.0)) < 0.01);
}

TEST_CASE("period domain errors at the critical values") {
  CHECK_THROWS_AS(period(0.0), std::domain_error);
  CHECK_THROWS_AS(period(4.0), std::domain_error);
}

TEST_CASE("Abelian pair near-separatrix limits") {
  const double h = 1e-4;
  const auto ab = abelian_pair(h);
  CHECK(std::abs(ab.i0 - ab.i1 - 2.0 * kSqrt3) < 1e-3);
  CHECK(std::abs(ab.i0 + std::log(h) / (2.0 * kSqrt3) - 0.5 * kSqrt3 * std::log(12.0)) < 0.01);
  CHECK(ab.i0 > 0.0);
  CHECK(ab.i0 - ab.i1 > 0.0);
}

TEST_CASE("Abelian pair matches the time-domain orbit quadrature") {
  const double h = 2.0;
  const auto ab = abelian_pair(h);
  const auto orbit = orbit_sample(h, 4096, Anchor::MiddleRoot);
  double acc = 0.0;
  for (const auto& p : orbit.samples) acc += 1.0 - p.x1;
  const double time_domain = acc * orbit.period / static_cast<double>(orbit.size());
  CHECK(std::abs(time_domain - (ab.i0 - ab.i1)) < 1e-8);
}

TEST_CASE("Picard-Fuchs residuals vanish to quadrature accuracy") {
  for (double h : {1.0, 3.0}) {
    const auto [r0, r1] = picard_fuchs_residual(h, 1e-4);
    CHECK(r0 < 1e-6);
    CHECK(r1 < 1e-6);
  }
  const auto [r0, r1] = picard_fuchs_residual(0.01, 0.01 * 1e-3);
  CHECK(r0 < 1e-5);
  CHECK(r1 < 1e-5);

  CHECK_THROWS_AS(picard_fuchs_residual(1.0, 0.2), std::invalid_argument);
}

TEST_CASE("orbit sampling conserves energy and hits the turning points") {
  const auto orbit = orbit_sample(2.0, 2048, Anchor::MiddleRoot);
  CHECK(std::abs(orbit.samples[0].x1) < 1e-12);
  CHECK(orbit.samples[0].x2 == 0.0);
  double drift = 0.0;
  for (const auto& p : orbit.samples) {
    drift = std::max(drift, std::abs(hamiltonian(p.x1, p.x2) - 2.0));
  }
  CHECK(drift < 1e-9);
  // half period reaches the opposite turning point
  CHECK(std::abs(orbit.samples[1024].x1 - (-kSqrt3)) < 1e-6);
  CHECK(std::abs(orbit.samples[1024].x2) < 1e-6);

  CHECK_THROWS_AS(orbit_sample(2.0, 32, Anchor::MiddleRoot), std::invalid_argument);
}

TEST_CASE("near-center orbit period approaches the linearization") {
  const auto orbit = orbit_sample(3.9, 512, Anchor::LeftRoot);
  CHECK(std::abs(orbit.period - period(3.9)) < 1e-12);
}

TEST_CASE("the flow closes after exactly the quadrature period") {
  // independent closure check: integrate X_H for period(h) and compare
  for (double h : {0.3, 2.0, 3.9}) {
    const auto r = cubic_roots(h);
    auto rhs = [](double, const rk::State<2>& s) {
      return rk::State<2>{-2.0 * s[1], 3.0 * (1.0 - s[0] * s[0])};
    };
    rk::Options opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14;
    const auto end = rk::integrate<2>(
        rhs, {r.x2, 0.0}, 0.0, period(h), opt,
        [](const rk::DenseStep<2>&, double, const rk::State<2>&) { return true; });
    CHECK(std::hypot(end[0] - r.x2, end[1]) < 1e-8);
  }
}

TEST_CASE("homoclinic profile") {
  CHECK(homoclinic_profile(0.0) == 3.0);
  CHECK(homoclinic_profile(30.0) < 1e-20);
  CHECK(homoclinic_profile(-30.0) < 1e-20);

  // near-separatrix orbit shadows the profile across the fundamental window;
  // at h = 1e-5 the period is ~5.48, so |t| is capped at T/2 rather than 5
  const double h = 1e-5;
  const auto orbit = orbit_sample(h, 8192, Anchor::MiddleRoot);
  const double T = orbit.period;
  const double span = std::min(5.0, 0.5 * T);
  double worst = 0.0;
  for (double t = -span; t <= span; t += 0.05) {
    double tw = std::fmod(t + 0.5 * T, T);
    if (tw < 0.0) tw += T;
    const std::size_t j =
        static_cast<std::size_t>(std::round(tw / T * static_cast<double>(orbit.size()))) %
        orbit.size();
    worst = std::max(worst, std::abs((1.0 - orbit.samples[j].x1) - homoclinic_profile(t)));
  }
  CHECK(worst < 1e-2);
}

TEST_CASE("phase on the oval is consistent with orbit time") {
  const auto orbit = orbit_sample(1.5, 2048, Anchor::LeftRoot);
  for (std::size_t j : {7u, 300u, 1024u, 1500u, 2000u}) {
    const auto& p = orbit.samples[j];
    const double tau = phase_on_oval(p.x1, p.x2);
    CHECK(std::abs(tau - p.t) < 2e-6);
  }
}
