// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "mcharvest/model.hpp"

namespace mcharvest {

/// xoshiro256++ engine (UniformRandomBitGenerator).
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  bool operator==(const Xoshiro256pp&) const = default;

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Engine for stream `stream` of a run seeded with `seed`. The four state
/// words are splitmix64 outputs started from mix(seed ^ mix(stream + 1)), so
/// streams are independent of how realizations are assigned to workers.
Xoshiro256pp stream_engine(std::uint64_t seed, std::uint64_t stream);

struct PbsPhases {
  /// Vesicle diffusion and membrane fusion. When off, all molecules are
  /// placed uniformly on the membrane at t = 0 (impulsive surface release).
  bool simulate_inside_tx{true};
  /// Molecule propagation outside the TX. When off only fusions are tallied.
  bool simulate_outside{true};
  /// Receptor absorption. When off the whole membrane reflects.
  bool receptors_active{true};
};

struct PbsRunConfig {
  double dt{1e-5};
  double horizon{3.0};
  int realizations{100};
  std::uint64_t seed{1};
  int sample_every{1000};
  int workers{1};
  PbsPhases phases{};
  /// Free-flight aggregation: far from the membrane, m steps are drawn as a
  /// single Gaussian of variance m·2D·dt when the path cannot reach the
  /// sphere except with probability below ~1e-17. Off = strict stepping.
  bool aggregate_free_flight{true};

  void validate() const;
  double bin_width() const { return dt * sample_every; }
};

/// Per-sample mean over realizations and its standard error.
struct PbsSeries {
  std::vector<double> mean;
  std::vector<double> se;
  bool operator==(const PbsSeries&) const = default;
};

/// Tallies at t_k = k · sample_every · dt, k = 0..K. Event counts
/// (fusion_counts) refer to the interval (t_{k−1}, t_k]; all other series are
/// states at t_k. Counts are per realization.
struct PbsResult {
  std::vector<double> time;
  double bin_width{0.0};
  int realizations{0};
  int vesicles{0};
  int molecules_per_vesicle{0};

  PbsSeries fusion_counts;
  PbsSeries released_cumulative;
  PbsSeries absorbed_cumulative;
  PbsSeries degraded_cumulative;
  PbsSeries in_flight;
  PbsSeries rx_occupancy;

  std::size_t samples() const { return time.size(); }
  bool operator==(const PbsResult&) const = default;
};

/// Probability that a vesicle touching the membrane fuses during dt.
double fusion_probability(const TxParams& tx, double dt);

/// Runs cfg.realizations independent realizations. Throws InvalidArgument if
/// the fusion probability exceeds 1 and NumericalError on a conservation or
/// finiteness fault.
PbsResult simulate(const TxParams& tx, const ChannelParams& ch, const ReceptorLayout& layout,
                   const PbsRunConfig& cfg);

/// Vesicle generation times: 0, then cumulative Exp(mu) interarrivals.
std::vector<double> draw_vesicle_birth_times(double generation_rate, int count,
                                             Xoshiro256pp& engine);

struct CapacitanceFit {
  double capacitance{0.0};
  double rms_residual{0.0};
  std::size_t samples{0};
  std::vector<double> time;
  std::vector<double> absorbed_fraction;
};

/// Fits G_T of the uniform-release absorption curve to an impulsive
/// surface-release simulation (cfg phases are overridden). Throws
/// InvalidArgument for an empty layout and NumericalError when the RMS
/// residual exceeds max_rms.
CapacitanceFit fit_capacitance(const TxParams& tx, const ChannelParams& ch,
                               const ReceptorLayout& layout, const PbsRunConfig& cfg,
                               double max_rms = 0.02);

/// CSV with columns t, fusion_rate, absorbed, rx_count, degraded and a
/// matching *_se column after each. fusion_rate is fusions per vesicle per
/// second over the bin ending at t.
void write_pbs_csv(std::ostream& out, const PbsResult& result);

}  // namespace mcharvest
