// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mcharvest/harvest.hpp"
#include "mcharvest/model.hpp"
#include "mcharvest/release.hpp"
#include "mcharvest/timegrid.hpp"

namespace mcharvest {

/// Probability that a molecule released at distance r_alpha from the RX
/// center at t = 0 lies inside the transparent RX at time t (free space with
/// first-order degradation). t = 0 gives the indicator of r_alpha vs r_R;
/// r_alpha = 0 uses the analytic limit.
double point_observation_prob(const ChannelParams& ch, double r_alpha, double t);

/// Same probability for a release spread uniformly over the TX membrane,
/// closed form in ξ₁/ξ₂.
double uniform_shell_observation_prob(const TxParams& tx, const ChannelParams& ch, double t);

/// Received-signal model of the TX with receptors and the transparent RX.
class RxModel {
 public:
  /// Uses layout.capacitance for the absorption curve.
  RxModel(const TxParams& tx, const ChannelParams& ch, ReceptorLayout layout);
  RxModel(const TxParams& tx, const ChannelParams& ch, ReceptorLayout layout,
          ReleaseModel release);

  const TxParams& tx() const { return tx_; }
  const ChannelParams& channel() const { return ch_; }
  const ReceptorLayout& layout() const { return layout_; }
  const ReleaseModel& release() const { return release_; }
  const HarvestModel& harvest() const { return harvest_; }

  /// Validity warnings (point-TX approximation for large receptors, ...).
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

  /// Distance from each receptor center to the RX center.
  std::vector<double> receptor_distances() const;

  /// Σ_i (A_i / A) P_alpha(t)|_{r_alpha = d_i}.
  double receptor_emission_kernel(double t) const;

  /// P_T = f_c * P_u.
  SignalTrace observation_prob_no_receptors(const TimeGrid& grid) const;
  /// P_r = (f_c,d * H) / A * Σ A_i P_alpha(d_i).
  SignalTrace receptor_reabsorption_loss(const TimeGrid& grid) const;
  /// P = P_T − P_r.
  SignalTrace observation_prob(const TimeGrid& grid) const;

  struct Components {
    SignalTrace total;          // P
    SignalTrace no_receptors;   // P_T
    SignalTrace receptor_loss;  // P_r
    /// Samples where P dipped below −tolerance (numerical artefacts).
    std::size_t negative_samples{0};
  };
  Components observation_components(const TimeGrid& grid, double tolerance = 1e-6) const;

 private:
  TxParams tx_;
  ChannelParams ch_;
  ReceptorLayout layout_;
  ReleaseModel release_;
  HarvestModel harvest_;
  std::vector<std::string> diagnostics_;
};

}  // namespace mcharvest
