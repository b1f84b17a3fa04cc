// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mcharvest/error.hpp"
#include "mcharvest/layout.hpp"
#include "mcharvest/model.hpp"

using namespace mcharvest;
using std::numbers::pi;

TEST_CASE("tx and channel invariants") {
  TxParams tx;
  CHECK_NOTHROW(tx.validate());
  CHECK(tx.emission_duration() == doctest::Approx(1.0));
  CHECK(tx.total_molecules() == 4000.0);

  auto bad = [](auto mutate) {
    TxParams t;
    mutate(t);
    return t;
  };
  CHECK_THROWS_AS(bad([](TxParams& t) { t.radius = 0.0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](TxParams& t) { t.vesicle_diffusivity = -1.0; }).validate(),
                  InvalidArgument);
  CHECK_THROWS_AS(bad([](TxParams& t) { t.fusion_rate = 0.0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](TxParams& t) { t.vesicle_count = 0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](TxParams& t) { t.molecules_per_vesicle = 0; }).validate(),
                  InvalidArgument);
  CHECK_THROWS_AS(bad([](TxParams& t) { t.generation_rate = 0.0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](TxParams& t) { t.generation_rate = NAN; }).validate(), InvalidArgument);

  ChannelParams ch;
  CHECK_NOTHROW(ch.validate());
  ch.degradation_rate = 0.0;
  CHECK_NOTHROW(ch.validate());
  ch.degradation_rate = -0.1;
  CHECK_THROWS_AS(ch.validate(), InvalidArgument);
  ch = ChannelParams{};
  ch.rx_radius = 0.0;
  CHECK_THROWS_AS(ch.validate(), InvalidArgument);

  ch = ChannelParams{};
  ch.rx_distance = 4.0;
  CHECK_NOTHROW(ch.validate());
  CHECK_THROWS_AS(validate_experiment(tx, ch), InvalidArgument);
  ch.rx_distance = 5.0;
  CHECK_NOTHROW(validate_experiment(tx, ch));
}

TEST_CASE("receptor angles fold into canonical ranges") {
  const Receptor r = Receptor::canonical(3.0 * pi / 2.0, 0.25, 1.0);
  CHECK(r.theta == doctest::Approx(pi / 2.0));
  CHECK(r.phi == doctest::Approx(0.25 + pi));
  const Receptor q = Receptor::canonical(0.5, -pi / 2.0, 1.0);
  CHECK(q.phi == doctest::Approx(3.0 * pi / 2.0));
  // Folding never moves the point on the sphere.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double th = u(rng);
    const double ph = u(rng);
    const Receptor c = Receptor::canonical(th, ph, 1.0);
    CHECK(c.theta >= 0.0);
    CHECK(c.theta <= pi);
    CHECK(c.phi >= 0.0);
    CHECK(c.phi < 2.0 * pi);
    const Vec3 raw{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
    const Vec3 folded = c.center(1.0);
    CHECK((raw - folded).norm() < 1e-12);
  }
}

TEST_CASE("cartesian map reproduces the receptor-to-RX distance") {
  const TxParams tx;
  const ChannelParams ch;
  const Receptor far = Receptor::canonical(pi / 2.0, pi, 1.0);
  CHECK(far.center(5.0).x == doctest::Approx(-5.0));
  CHECK(receptor_rx_distance(far, tx, ch) == doctest::Approx(25.0));
  const Receptor near = Receptor::canonical(pi / 2.0, 0.0, 1.0);
  CHECK(receptor_rx_distance(near, tx, ch) == doctest::Approx(15.0));
  const Receptor side = Receptor::canonical(pi / 2.0, pi / 2.0, 1.0);
  CHECK(receptor_rx_distance(side, tx, ch) == doctest::Approx(std::sqrt(425.0)));
}

TEST_CASE("area ratio to radius") {
  CHECK(area_ratio_to_radius(0.01, 5.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(area_ratio_to_radius(0.25, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  const double a = area_ratio_to_radius(0.1 / 11.0, 5.0);
  CHECK(a == doctest::Approx(0.95346258924559).epsilon(1e-12));
  CHECK(11.0 * a * a / 100.0 == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(area_ratio_to_radius(0.0, 5.0), InvalidArgument);
  CHECK_THROWS_AS(area_ratio_to_radius(1.0, 5.0), InvalidArgument);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-6, 0.999);
  for (int i = 0; i < 500; ++i) {
    const double A = u(rng);
    const double rt = 0.1 + 10.0 * u(rng);
    const Receptor r{0.0, 0.0, area_ratio_to_radius(A, rt)};
    CHECK(std::abs(r.area_ratio(rt) - A) <= 1e-12 * A);
  }
}

TEST_CASE("validate_layout reports each violation") {
  const TxParams tx;
  SUBCASE("identical centers overlap") {
    const auto layout = ReceptorLayout::from_receptors(
        {Receptor{1.0, 1.0, 1.0}, Receptor{1.0, 1.0, 1.0}}, tx.radius);
    const auto rep = validate_layout(layout, tx);
    CHECK(rep.has(ViolationKind::Overlap));
    CHECK(rep.violations.front().first == 0);
    CHECK(rep.violations.front().second == 1);
  }
  SUBCASE("four heterogeneous receptors are valid") {
    const auto layout = explicit_layout({{pi / 2, pi, 0.01},
                                         {pi / 2, pi / 2, 0.02},
                                         {pi / 2, 0.0, 0.03},
                                         {pi / 2, 3 * pi / 2, 0.04}},
                                        tx.radius);
    const auto rep = validate_layout(layout, tx);
    CHECK_MESSAGE(rep.ok(), rep.to_string());
    CHECK(layout.coverage == doctest::Approx(0.1));
  }
  SUBCASE("coverage field mismatch") {
    auto layout = fibonacci_layout(11, 0.1, tx.radius);
    layout.coverage = 0.2;
    CHECK(validate_layout(layout, tx).has(ViolationKind::CoverageMismatch));
  }
  SUBCASE("radius and capacitance ranges") {
    ReceptorLayout layout;
    layout.receptors = {Receptor{0.0, 0.0, 11.0}};
    layout.coverage = layout.receptors[0].area_ratio(tx.radius);
    layout.capacitance = 6.0;
    const auto rep = validate_layout(layout, tx);
    CHECK(rep.has(ViolationKind::RadiusOutOfRange));
    CHECK(rep.has(ViolationKind::CoverageOutOfRange));
    CHECK(rep.has(ViolationKind::CapacitanceOutOfRange));
  }
  SUBCASE("empty layout") {
    CHECK(validate_layout(ReceptorLayout{}, tx).has(ViolationKind::EmptyLayout));
  }
  SUBCASE("non-canonical angles") {
    auto layout = fibonacci_layout(2, 0.05, tx.radius);
    layout.receptors[0].phi = -1.0;
    CHECK(validate_layout(layout, tx).has(ViolationKind::AngleOutOfRange));
  }
}

TEST_CASE("validate_layout is permutation invariant") {
  const TxParams tx;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Receptor> rs;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 6; ++i) {
      rs.push_back(Receptor::canonical(std::acos(2 * u(rng) - 1), 2 * pi * u(rng),
                                       0.5 + 2.0 * u(rng)));
    }
    const auto a = validate_layout(ReceptorLayout::from_receptors(rs, tx.radius), tx);
    std::shuffle(rs.begin(), rs.end(), rng);
    const auto b = validate_layout(ReceptorLayout::from_receptors(rs, tx.radius), tx);
    CHECK(a.ok() == b.ok());
    CHECK(a.violations.size() == b.violations.size());
    CHECK(a.has(ViolationKind::Overlap) == b.has(ViolationKind::Overlap));
  }
}
