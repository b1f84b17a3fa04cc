// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "mcharvest/model.hpp"
#include "mcharvest/release.hpp"
#include "mcharvest/timegrid.hpp"

namespace mcharvest {

struct PbsRunConfig;

/// Berg–Purcell homogenization of N disks on a sphere:
/// G_T = r_T Σa_i / (Σa_i + π r_T). Zero for an empty list.
double homogenized_capacitance(std::span<const Receptor> receptors, double tx_radius);

enum class CapacitanceMode { Homogenized, UserSupplied, PbsFit };

struct CapacitanceRequest {
  CapacitanceMode mode{CapacitanceMode::Homogenized};
  double user_value{0.0};                 // UserSupplied
  const ChannelParams* channel{nullptr};  // PbsFit
  const PbsRunConfig* pbs{nullptr};       // PbsFit
};

/// G_T of the partially covered TX. Throws InvalidArgument for a user value
/// outside (0, r_T) and NumericalError when a PBS fit does not converge.
double capacitance(const ReceptorLayout& layout, const TxParams& tx,
                   const CapacitanceRequest& request = {});

/// Uniform-release absorption curve H(t) for a TX of capacitance G_T.
class HarvestModel {
 public:
  HarvestModel(const TxParams& tx, const ChannelParams& ch, double capacitance);

  const TxParams& tx() const { return tx_; }
  const ChannelParams& channel() const { return ch_; }
  double capacitance() const { return capacitance_; }
  double w() const { return w_; }
  double gamma() const { return gamma_; }
  double zeta() const { return zeta_; }

  /// H(t): fraction of a uniform surface release absorbed by time t.
  double harvest_fraction_impulse(double t) const;

  /// lim_{t→∞} H(t).
  double harvest_limit() const;

  SignalTrace impulse_trace(const TimeGrid& grid) const;

 private:
  TxParams tx_;
  ChannelParams ch_;
  double capacitance_;
  double w_;
  double gamma_;
  double zeta_;
};

/// H_e = f_c * H on the grid.
SignalTrace harvest_fraction(const HarvestModel& model, const ReleaseModel& release,
                             const TimeGrid& grid);

/// h_e = f_c,d * H, the total hitting rate on the receptors.
SignalTrace hit_rate(const HarvestModel& model, const ReleaseModel& release,
                     const TimeGrid& grid);

}  // namespace mcharvest
