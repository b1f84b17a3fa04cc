// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;
using mcharvest::cli::run;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mcharvest_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
            std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string config(const std::string& name) { return std::string(MCHARVEST_CONFIG_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string first_line(const std::string& path) {
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  return line;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("release writes one column per mu and a sidecar") {
  TempDir tmp;
  const std::string out = tmp / "release.csv";
  const Run r = invoke({"release", "-c", config("fig2_release.yaml"), "-o", out});
  REQUIRE(r.code == 0);
  CHECK(first_line(out) == "t,f_c_mu_50,f_c_mu_100,f_c_mu_200");
  CHECK(r.out.find("mu = 100: peak f_c") != std::string::npos);
  const auto meta = nlohmann::json::parse(slurp(out + ".meta.json"));
  CHECK(meta["command"] == "release");
  CHECK(meta["parameters"]["tx"]["r_T"] == 5.0);
  CHECK(meta["traces"].size() == 3);

  // Byte-stable across runs.
  const std::string again = tmp / "again.csv";
  REQUIRE(invoke({"release", "-c", config("fig2_release.yaml"), "-o", again}).code == 0);
  CHECK(slurp(out) == slurp(again));

  const std::string single = tmp / "single.csv";
  REQUIRE(invoke({"release", "-c", config("fig2_release.yaml"), "-o", single, "--mu", "75"}).code ==
          0);
  CHECK(first_line(single) == "t,f_c_mu_75");
}

TEST_CASE("harvest and cir columns") {
  TempDir tmp;
  const std::string h = tmp / "h.csv";
  REQUIRE(invoke({"harvest", "-c", config("fig3_even.yaml"), "-o", h, "--mu", "200"}).code == 0);
  CHECK(first_line(h) == "t,absorbed_mu_200");
  const std::string c = tmp / "c.csv";
  REQUIRE(invoke({"cir", "-c", config("fig3_four_receptors.yaml"), "-o", c, "--mu", "50"}).code ==
          0);
  CHECK(first_line(c) == "t,rx_count_mu_50,rx_count_T_mu_50,rx_count_r_mu_50");
  const auto meta = nlohmann::json::parse(slurp(c + ".meta.json"));
  CHECK(meta["layout"]["receptors"].size() == 4);
  CHECK(meta["layout"]["capacitance_mode"] == "homogenized");
}

TEST_CASE("layout-gen output is a loadable explicit layout") {
  TempDir tmp;
  const std::string out = tmp / "layout.yaml";
  const Run r = invoke({"layout-gen", "-c", config("fig3_random_equal.yaml"), "-o", out});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("11 receptors") != std::string::npos);
  CHECK(slurp(out).find("kind: explicit") != std::string::npos);
}

TEST_CASE("pbs run and overrides") {
  TempDir tmp;
  const std::string out = tmp / "pbs.csv";
  const Run r = invoke({"pbs", "-c", config("smoke_pbs.yaml"), "-o", out, "--dt-override", "4e-5",
                        "--workers", "2", "--seed", "3"});
  REQUIRE(r.code == 0);
  CHECK(first_line(out).rfind("t,fusion_rate,fusion_rate_se,absorbed", 0) == 0);
  const auto meta = nlohmann::json::parse(slurp(out + ".meta.json"));
  CHECK(meta["parameters"]["pbs"]["dt"] == 4e-5);
  CHECK(meta["parameters"]["pbs"]["seed"] == 3);
  CHECK(meta["parameters"]["pbs"]["workers"] == 2);
}

TEST_CASE("error exit codes") {
  TempDir tmp;
  CHECK(invoke({}).code == mcharvest::cli::kUsage);
  CHECK(invoke({"release", "-c", config("fig2_release.yaml")}).code == mcharvest::cli::kUsage);
  CHECK(invoke({"--help"}).code == 0);

  const Run missing = invoke({"release", "-c", "/nonexistent.yaml", "-o", tmp / "x.csv"});
  CHECK(missing.code == mcharvest::cli::kConfig);

  // A step this large makes the per-step fusion probability exceed 1.
  const Run coarse = invoke({"pbs", "-c", config("smoke_pbs.yaml"), "-o", tmp / "p.csv",
                             "--dt-override", "1e-2"});
  CHECK(coarse.code == mcharvest::cli::kConfig);
  CHECK(coarse.err.find("fusion probability") != std::string::npos);
  CHECK(coarse.err.find("reduce dt") != std::string::npos);
}
