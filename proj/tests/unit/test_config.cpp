// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numbers>
#include <string>

#include "mcharvest/config.hpp"

using namespace mcharvest;
using std::numbers::pi;

namespace {

const std::string kBase = R"(tx:
  r_T: 5
  D_v: 9
  k_f: 30
  N_v: 200
  eta: 20
  mu: [50, 100, 200]
channel:
  D_sigma: 79.4
  k_d: 0.8
  r_0: 20
  r_R: 10
)";

std::string message_of(const std::string& text) {
  try {
    parse_config(text, "test.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int line_of(const std::string& text) {
  try {
    parse_config(text, "test.yaml");
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("minimal config uses defaults") {
  const ExperimentConfig cfg = parse_config(kBase);
  CHECK(cfg.tx.radius == 5.0);
  CHECK(cfg.generation_rates == std::vector<double>{50.0, 100.0, 200.0});
  CHECK(cfg.tx.generation_rate == 50.0);
  CHECK(cfg.tx_for(200.0).generation_rate == 200.0);
  CHECK(cfg.channel.diffusivity == 79.4);
  CHECK(cfg.layout.kind == LayoutKind::None);
  CHECK(cfg.grid.horizon == 3.0);
  CHECK(cfg.pbs.dt == 1e-5);
  CHECK(cfg.compare.z_max == 3.0);
  CHECK(build_layout(cfg, cfg.tx).empty());
}

TEST_CASE("missing and unknown keys") {
  std::string no_rt = kBase;
  no_rt.erase(no_rt.find("  r_T: 5\n"), 9);
  CHECK(message_of(no_rt).find("tx.r_T") != std::string::npos);

  const std::string typo = kBase + "grid:\n  horizon: 3\n  dtt: 0.1\n";
  CHECK(message_of(typo).find("grid.dtt") != std::string::npos);
  CHECK(line_of(typo) == 15);

  CHECK(message_of("channel:\n  k_d: 1\n").find("tx") != std::string::npos);
  CHECK(message_of(kBase + "extra: 1\n").find("unknown key") != std::string::npos);
  CHECK(line_of("tx: [1, 2\n") > 0);
}

TEST_CASE("value validation") {
  CHECK(message_of(kBase + "grid:\n  horizon: 0\n").find("grid.horizon") != std::string::npos);
  CHECK(line_of(kBase + "grid:\n  horizon: 0\n") == 14);
  std::string bad_mu = kBase;
  bad_mu.replace(bad_mu.find("[50, 100, 200]"), 14, "[50, -1]");
  CHECK_FALSE(message_of(bad_mu).empty());
  CHECK(message_of(kBase + "pbs:\n  realizations: 2.5\n").find("integer") != std::string::npos);
  CHECK(message_of(kBase + "pbs:\n  workers: 0\n").find("pbs.workers") != std::string::npos);
  CHECK(message_of(kBase + "pbs:\n  receptors_active: maybe\n").find("true or false") !=
        std::string::npos);
  std::string close = kBase;
  close.replace(close.find("r_0: 20"), 7, "r_0: 3");
  CHECK_FALSE(message_of(close).empty());
}

TEST_CASE("layouts") {
  SUBCASE("fibonacci") {
    const auto cfg = parse_config(kBase + "layout:\n  kind: fibonacci\n  count: 11\n  coverage: 0.1\n");
    const auto layout = build_layout(cfg, cfg.tx);
    CHECK(layout.receptors.size() == 11);
    CHECK(layout.coverage == doctest::Approx(0.1));
  }
  SUBCASE("random by area ratio") {
    const auto cfg = parse_config(kBase +
                                  "layout:\n  kind: random\n  area_ratios: [0.02, 0.03]\n  seed: 9\n");
    const auto layout = build_layout(cfg, cfg.tx);
    CHECK(layout.coverage == doctest::Approx(0.05));
    CHECK(cfg.layout.seed == 9);
    CHECK_FALSE(message_of(kBase + "layout:\n  kind: random\n  radii: [1]\n  area_ratios: [0.1]\n")
                    .empty());
  }
  SUBCASE("explicit with pi expressions") {
    const auto cfg = parse_config(kBase + R"(layout:
  kind: explicit
  receptors:
    - {theta: pi/2, phi: 3*pi/2, area_ratio: 0.04}
    - {theta: 0.5, phi: pi, area_ratio: 0.01}
  capacitance: 1.5
)");
    const auto layout = build_layout(cfg, cfg.tx);
    REQUIRE(layout.receptors.size() == 2);
    CHECK(layout.receptors[0].theta == doctest::Approx(pi / 2));
    CHECK(layout.receptors[0].phi == doctest::Approx(3 * pi / 2));
    CHECK(layout.receptors[1].phi == doctest::Approx(pi));
    CHECK(layout.capacitance == 1.5);
    CHECK(cfg.layout.capacitance == CapacitanceMode::UserSupplied);
  }
  SUBCASE("bad angle expression") {
    CHECK(message_of(kBase + "layout:\n  kind: explicit\n  receptors:\n"
                             "    - {theta: pi/0, phi: 0, area_ratio: 0.01}\n")
              .find("division by zero") != std::string::npos);
    CHECK_FALSE(message_of(kBase + "layout:\n  kind: explicit\n  receptors:\n"
                                   "    - {theta: tau, phi: 0, area_ratio: 0.01}\n")
                    .empty());
  }
  SUBCASE("overlapping explicit receptors") {
    const auto cfg = parse_config(kBase + R"(layout:
  kind: explicit
  receptors:
    - {theta: 1, phi: 1, area_ratio: 0.01}
    - {theta: 1, phi: 1, area_ratio: 0.01}
)");
    CHECK_THROWS_AS(build_layout(cfg, cfg.tx), InvalidArgument);
  }
  SUBCASE("unknown kind") {
    CHECK(message_of(kBase + "layout:\n  kind: hexagonal\n").find("hexagonal") !=
          std::string::npos);
  }
}

TEST_CASE("layout yaml round trip") {
  const auto cfg = parse_config(kBase + "layout:\n  kind: fibonacci\n  count: 11\n  coverage: 0.1\n");
  const auto layout = build_layout(cfg, cfg.tx);
  const std::string yaml = layout_to_yaml(layout, cfg.tx.radius);
  const auto again = parse_config(kBase + yaml);
  CHECK(again.layout.kind == LayoutKind::Explicit);
  const auto rebuilt = build_layout(again, again.tx);
  REQUIRE(rebuilt.receptors.size() == layout.receptors.size());
  for (std::size_t i = 0; i < layout.receptors.size(); ++i) {
    CHECK(rebuilt.receptors[i].theta == layout.receptors[i].theta);
    CHECK(rebuilt.receptors[i].phi == layout.receptors[i].phi);
    CHECK(rebuilt.receptors[i].radius == doctest::Approx(layout.receptors[i].radius).epsilon(1e-15));
  }
  CHECK(rebuilt.capacitance == doctest::Approx(layout.capacitance).epsilon(1e-14));

  // The full echo parses back to the same values.
  const auto echo = parse_config(config_to_yaml(cfg));
  CHECK(echo.generation_rates == cfg.generation_rates);
  CHECK(echo.channel.degradation_rate == cfg.channel.degradation_rate);
  CHECK(echo.pbs.seed == cfg.pbs.seed);
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"fig2_release.yaml", "fig3_even.yaml", "fig3_random_equal.yaml",
                           "fig3_four_receptors.yaml", "single_receptor.yaml",
                           "compare_no_receptors.yaml", "compare_even.yaml", "smoke_pbs.yaml"}) {
    const std::string path = std::string(MCHARVEST_CONFIG_DIR) + "/" + name;
    INFO(path);
    const ExperimentConfig cfg = load_config(path);
    CHECK_NOTHROW(build_layout(cfg, cfg.tx));
  }
  CHECK_THROWS_AS(load_config("/nonexistent/x.yaml"), ConfigError);
}
