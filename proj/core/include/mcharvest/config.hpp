// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcharvest/error.hpp"
#include "mcharvest/harvest.hpp"
#include "mcharvest/layout.hpp"
#include "mcharvest/model.hpp"
#include "mcharvest/pbs.hpp"

namespace mcharvest {

/// Parse or validation failure in a config file. line() is 1-based, 0 when
/// the problem is not tied to a line (e.g. a missing key).
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

enum class LayoutKind { None, Fibonacci, Random, Explicit };

struct LayoutConfig {
  LayoutKind kind{LayoutKind::None};
  std::size_t count{0};             // fibonacci
  double coverage{0.0};             // fibonacci
  std::vector<double> radii;        // random, µm
  std::vector<double> area_ratios;  // random, alternative to radii
  std::uint64_t seed{42};           // random
  std::size_t max_attempts{100000};
  std::vector<ReceptorSpec> receptors;  // explicit
  CapacitanceMode capacitance{CapacitanceMode::Homogenized};
  double capacitance_value{0.0};        // UserSupplied
};

struct GridConfig {
  double horizon{3.0};
  double dt{1e-3};
};

struct CompareConfig {
  double z_max{3.0};
  double min_pass_fraction{0.95};
  /// Realizations of the impulsive run used when capacitance = pbs_fit.
  int fit_realizations{20};
  std::uint64_t fit_seed{977};
  double fit_max_rms{0.02};
};

struct ExperimentConfig {
  std::string source;
  TxParams tx;  // generation_rate is generation_rates.front()
  std::vector<double> generation_rates;
  ChannelParams channel;
  LayoutConfig layout;
  GridConfig grid;
  PbsRunConfig pbs;
  CompareConfig compare;

  /// tx with generation_rate replaced by `mu`.
  TxParams tx_for(double mu) const;
};

/// Parses YAML config text. `source` names the origin in diagnostics.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Builds and validates the configured layout for `tx`. The capacitance is
/// homogenized or user supplied; PbsFit is resolved by resolve_capacitance.
ReceptorLayout build_layout(const ExperimentConfig& cfg, const TxParams& tx);

/// Applies the configured capacitance mode, running the fit simulation for
/// PbsFit. Returns the layout unchanged for an empty layout.
ReceptorLayout resolve_capacitance(const ExperimentConfig& cfg, const TxParams& tx,
                                   ReceptorLayout layout,
                                   std::optional<CapacitanceFit>* fit = nullptr);

/// `layout:` section in config syntax with an explicit receptor list.
std::string layout_to_yaml(const ReceptorLayout& layout, double tx_radius);

/// Echo of the resolved parameters in config syntax.
std::string config_to_yaml(const ExperimentConfig& cfg);

const char* layout_kind_name(LayoutKind kind);

}  // namespace mcharvest
