// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcharvest/harvest.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "mcharvest/error.hpp"
#include "mcharvest/pbs.hpp"
#include "mcharvest/specfun.hpp"

namespace mcharvest {

double homogenized_capacitance(std::span<const Receptor> receptors, double tx_radius) {
  const double sum_a = std::accumulate(receptors.begin(), receptors.end(), 0.0,
                                       [](double s, const Receptor& r) { return s + r.radius; });
  if (sum_a <= 0.0) return 0.0;
  return tx_radius * sum_a / (sum_a + std::numbers::pi * tx_radius);
}

double capacitance(const ReceptorLayout& layout, const TxParams& tx,
                   const CapacitanceRequest& request) {
  switch (request.mode) {
    case CapacitanceMode::Homogenized:
      return homogenized_capacitance(layout.receptors, tx.radius);
    case CapacitanceMode::UserSupplied:
      if (!(request.user_value > 0.0 && request.user_value < tx.radius)) {
        throw InvalidArgument("capacitance: user-supplied G_T must lie in (0, r_T)");
      }
      return request.user_value;
    case CapacitanceMode::PbsFit:
      if (request.channel == nullptr || request.pbs == nullptr) {
        throw InvalidArgument("capacitance: PbsFit needs channel and PBS settings");
      }
      return fit_capacitance(tx, *request.channel, layout, *request.pbs).capacitance;
  }
  throw InvalidArgument("capacitance: unknown mode");
}

HarvestModel::HarvestModel(const TxParams& tx, const ChannelParams& ch, double capacitance)
    : tx_(tx), ch_(ch), capacitance_(capacitance) {
  tx_.validate();
  ch_.validate();
  if (!(capacitance_ >= 0.0 && capacitance_ < tx_.radius)) {
    throw InvalidArgument("HarvestModel: capacitance must lie in [0, r_T)");
  }
  const double rt = tx_.radius;
  w_ = ch_.diffusivity * capacitance_ / (rt * (rt - capacitance_));
  gamma_ = 1.0 / (rt - capacitance_);
  zeta_ = gamma_ * gamma_ * ch_.diffusivity - ch_.degradation_rate;
}

// The absorption curve
//
//   H = w erf(√(k t))/√(k D) − (wγ/ζ)(e^{ζt} erfc(γ√(Dt)) + γ√(D/k) erf(√(k t)) − 1)
//
// is evaluated after two exact rewrites: e^{ζt} erfc(γ√(Dt)) = erfcx(γ√(Dt)) e^{−kt},
// and the two erf(√(kt)) terms combine into −w√k erf(√(kt)) / (√D ζ), which has
// no 0/0 as k → 0.
double HarvestModel::harvest_fraction_impulse(double t) const {
  if (t < 0.0) throw InvalidArgument("harvest_fraction_impulse: t must be >= 0");
  if (t == 0.0 || capacitance_ == 0.0) return 0.0;
  const double d = ch_.diffusivity;
  const double k = ch_.degradation_rate;
  const double x = gamma_ * std::sqrt(d * t);

  if (k < 1e-12) return capacitance_ / tx_.radius * (1.0 - erfcx(x));

  const double decay = std::exp(-k * t);
  const double er = std::erf(std::sqrt(k * t));
  if (std::abs(zeta_) < 1e-7 * gamma_ * gamma_ * d) {
    // ζ → 0: H = −w ∂f/∂k with f(k) = γ(1 − erfcx e^{−kt}) − √(k/D) erf(√(kt)).
    const double dfdk = gamma_ * t * erfcx(x) * decay - er / (2.0 * std::sqrt(k * d)) -
                        decay * std::sqrt(t / (std::numbers::pi * d));
    return -w_ * dfdk;
  }
  return w_ * gamma_ / zeta_ * (1.0 - erfcx(x) * decay) -
         w_ * std::sqrt(k) / (std::sqrt(d) * zeta_) * er;
}

double HarvestModel::harvest_limit() const {
  if (capacitance_ == 0.0) return 0.0;
  const double d = ch_.diffusivity;
  const double k = ch_.degradation_rate;
  if (k < 1e-12) return capacitance_ / tx_.radius;
  if (std::abs(zeta_) < 1e-7 * gamma_ * gamma_ * d) {
    return w_ / (2.0 * std::sqrt(k * d));
  }
  return w_ / std::sqrt(k * d) - (w_ * gamma_ / zeta_) * (gamma_ * std::sqrt(d / k) - 1.0);
}

SignalTrace HarvestModel::impulse_trace(const TimeGrid& grid) const {
  return sample(grid, Quantity::HarvestFraction,
                [this](double t) { return harvest_fraction_impulse(t); });
}

SignalTrace harvest_fraction(const HarvestModel& model, const ReleaseModel& release,
                             const TimeGrid& grid) {
  return convolve(release.release_trace(grid), model.impulse_trace(grid),
                  Quantity::HarvestFractionCumulative);
}

SignalTrace hit_rate(const HarvestModel& model, const ReleaseModel& release,
                     const TimeGrid& grid) {
  return convolve(release.derivative_trace(grid), model.impulse_trace(grid), Quantity::HitRate);
}

}  // namespace mcharvest
