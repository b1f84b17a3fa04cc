// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mcharvest/error.hpp"
#include "mcharvest/release.hpp"
#include "oracle.hpp"

using namespace mcharvest;

namespace {

TxParams with_mu(double mu) {
  TxParams tx;
  tx.generation_rate = mu;
  return tx;
}

double quad_release(const ReleaseModel& m, double a, double b) {
  const double tau = m.tx().emission_duration();
  std::vector<double> breaks{a};
  for (double x : {0.05, 0.2, 0.5, 1.0, 2.0, tau, tau + 0.05, tau + 0.2, tau + 1.0, 10.0, 20.0}) {
    if (x > a && x < b) breaks.push_back(x);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.push_back(b);
  return oracle::integrate_panels(
      [&](double t) { return t > 0 ? m.release_rate(t) : 0.0; }, breaks, 1e-11);
}

}  // namespace

TEST_CASE("release rate integrates to one") {
  for (double mu : {50.0, 100.0, 200.0}) {
    const ReleaseModel m(with_mu(mu));
    const double total = quad_release(m, 0.0, 50.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m.release_normalization(50.0) == doctest::Approx(total).epsilon(1e-8));
  }
}

TEST_CASE("cumulative release agrees with quadrature") {
  const ReleaseModel m(with_mu(100.0));
  for (double t : {0.05, 0.3, 1.0, 2.0, 2.5, 4.0}) {
    CHECK(m.cumulative_release(t) == doctest::Approx(quad_release(m, 0.0, t)).epsilon(1e-7));
  }
  CHECK(m.cumulative_release(0.0) == 0.0);
  CHECK(m.integrate(0.5, 1.5) ==
        doctest::Approx(m.cumulative_release(1.5) - m.cumulative_release(0.5)));
  CHECK_THROWS_AS(m.integrate(1.0, 0.5), InvalidArgument);
}

TEST_CASE("mean fusion time equals the series first moment") {
  const ReleaseModel m(TxParams{});
  double first_moment = 0.0;
  const auto& b = m.coefficients();
  const auto& lam = m.spectrum().lambdas;
  for (std::size_t n = 0; n < b.size(); ++n) {
    first_moment += b[n] / (m.tx().vesicle_diffusivity * lam[n] * lam[n]);
  }
  CHECK(m.mean_fusion_time() == doctest::Approx(25.0 / 54.0 + 5.0 / 90.0));
  CHECK(first_moment == doctest::Approx(m.mean_fusion_time()).epsilon(1e-7));
}

TEST_CASE("survival series") {
  const ReleaseModel m(TxParams{});
  CHECK(m.survival(0.0).value == 1.0);
  CHECK(m.survival(1e-4).value == doctest::Approx(1.0).epsilon(1e-12));
  const auto tiny = m.survival(1e-7);
  CHECK(tiny.value == 1.0);
  CHECK(tiny.short_time);
  double prev = 1.0;
  for (double s = 0.01; s < 5.0; s += 0.01) {
    const double v = m.survival(s).value;
    CHECK(v <= prev + 1e-14);
    CHECK(v >= -1e-14);
    prev = v;
  }
  // Coefficients sum to one with an ~1/N tail.
  double sum = 0.0;
  for (double b : m.coefficients()) sum += b;
  CHECK(std::abs(1.0 - sum) < 0.02);
  CHECK_THROWS_AS(m.survival(-1.0), InvalidArgument);
}

TEST_CASE("release rate is continuous at tau") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    TxParams tx;
    tx.radius = 1.0 + 9.0 * u(rng);
    tx.vesicle_diffusivity = 1.0 + 29.0 * u(rng);
    tx.fusion_rate = 1.0 + 99.0 * u(rng);
    tx.vesicle_count = 10 + static_cast<int>(490 * u(rng));
    tx.generation_rate = 20.0 + 480.0 * u(rng);
    const ReleaseModel m(tx);
    const double tau = tx.emission_duration();
    const double below = m.release_rate(tau);
    const double above = m.release_rate(std::nextafter(tau, std::numeric_limits<double>::infinity()));
    CHECK(std::abs(below - above) / below < 1e-10);
  }
}

TEST_CASE("release rate derivative matches finite differences") {
  for (double mu : {50.0, 200.0}) {
    const ReleaseModel m(with_mu(mu));
    const double tau = m.tx().emission_duration();
    for (double t : {0.0005, 0.01, 0.05, 0.2, 0.7, tau - 0.01, tau + 0.0005, tau + 0.2, 3.0}) {
      const double fd = oracle::derivative([&](double x) { return m.release_rate(x); }, t,
                                           std::min(1e-5, 0.2 * t));
      const double scale = mu / m.tx().vesicle_count;
      CHECK(m.release_rate_derivative(t) == doctest::Approx(fd).epsilon(1e-5).scale(scale));
    }
  }
}

TEST_CASE("release rate shape") {
  const ReleaseModel slow(with_mu(50.0));
  // Steady state: f_c approaches mu/N_v while vesicles are still generated.
  CHECK(slow.release_rate(3.5) == doctest::Approx(50.0 / 200.0).epsilon(1e-3));
  const ReleaseModel fast(with_mu(200.0));
  CHECK(fast.release_rate(1e-3) < 1e-250);
  CHECK(fast.release_rate(0.5) > 0.0);
  CHECK(fast.release_rate(20.0) < 1e-12);
  CHECK_THROWS_AS(fast.release_rate(0.0), InvalidArgument);
}

TEST_CASE("traces on a grid") {
  const ReleaseModel m(with_mu(100.0));
  const TimeGrid g = TimeGrid::covering(3.0, 0.01);
  const SignalTrace f = m.release_trace(g);
  CHECK(f.quantity == Quantity::ReleaseRate);
  CHECK(f.values[0] == 0.0);
  CHECK(f.values[150] == doctest::Approx(m.release_rate(1.5)));
  const SignalTrace d = m.derivative_trace(g);
  CHECK(d.values[0] == 0.0);
  CHECK(d.values[150] == doctest::Approx(m.release_rate_derivative(1.5)));
}

TEST_CASE("spectrum must match the tx") {
  TxParams tx;
  EigenSpectrum spec = solve_eigenvalues(tx, 100);
  tx.fusion_rate = 31.0;
  CHECK_THROWS_AS(ReleaseModel(tx, spec), InvalidArgument);
  // A short spectrum cannot resolve moderately small times.
  TxParams base;
  const ReleaseModel shortm(base, solve_eigenvalues(base, 3));
  CHECK_THROWS_AS(shortm.survival(0.01), NumericalError);
}

TEST_CASE("fused fraction keeps relative accuracy at early times") {
  for (double kf : {1.0, 30.0, 1e4}) {
    TxParams tx;
    tx.fusion_rate = kf;
    const ReleaseModel m(tx);
    const double s_star = m.short_time_limit();
    // Both evaluation routes agree where they meet.
    for (double f : {0.999, 0.8}) {
      const double img = m.fused_fraction(f * s_star).value;
      CHECK(img == doctest::Approx(1.0 - m.survival(f * s_star).value).epsilon(1e-9));
      CHECK(m.fused_fraction(f * s_star).short_time);
    }
    CHECK(m.fused_fraction(1.2 * s_star).value ==
          doctest::Approx(1.0 - m.survival(1.2 * s_star).value).epsilon(1e-15));
    // The density is the derivative of the fused fraction on the image side.
    for (double s : {0.1 * s_star, 0.3 * s_star, 0.7 * s_star}) {
      const double fd = oracle::derivative([&](double x) { return m.fused_fraction(x).value; }, s,
                                           1e-3 * s);
      CHECK(m.fusion_density(s).value == doctest::Approx(fd).epsilon(1e-6));
    }
    // Monotone and positive well below the point where 1 − S underflows
    // to rounding noise.
    double prev = 0.0;
    for (double s = 0.05 * s_star; s < s_star; s += 0.05 * s_star) {
      const double v = m.fused_fraction(s).value;
      CHECK(v > prev);
      prev = v;
    }
  }
}
