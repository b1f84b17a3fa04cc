// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcharvest/rx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mcharvest/error.hpp"

namespace mcharvest {

double point_observation_prob(const ChannelParams& ch, double r_alpha, double t) {
  if (r_alpha < 0.0) throw InvalidArgument("point_observation_prob: r_alpha must be >= 0");
  if (t < 0.0) throw InvalidArgument("point_observation_prob: t must be >= 0");
  const double rr = ch.rx_radius;
  if (t == 0.0) {
    if (r_alpha < rr) return 1.0;
    return r_alpha > rr ? 0.0 : 0.5;
  }
  const double d = ch.diffusivity;
  const double kd = ch.degradation_rate;
  const double s = std::sqrt(4.0 * d * t);
  const double decay = std::exp(-kd * t);
  if (r_alpha < 1e-9 * std::max(rr, s)) {
    // Limit r_alpha → 0 of the bracketed difference over r_alpha.
    return (std::erf(rr / s) - rr / std::sqrt(std::numbers::pi * d * t) *
                                   std::exp(-rr * rr / (4.0 * d * t))) *
           decay;
  }
  const double plus = rr + r_alpha;
  const double minus = rr - r_alpha;
  const double first = 0.5 * (std::erf(minus / s) + std::erf(plus / s)) * decay;
  const double second = std::sqrt(d * t / std::numbers::pi) / r_alpha *
                        (std::exp(-plus * plus / (4.0 * d * t) - kd * t) -
                         std::exp(-minus * minus / (4.0 * d * t) - kd * t));
  return first + second;
}

double uniform_shell_observation_prob(const TxParams& tx, const ChannelParams& ch, double t) {
  if (t < 0.0) throw InvalidArgument("uniform_shell_observation_prob: t must be >= 0");
  const double rt = tx.radius;
  const double r0 = ch.rx_distance;
  const double rr = ch.rx_radius;
  if (!(r0 > 0.0)) throw InvalidArgument("uniform_shell_observation_prob: r_0 must be > 0");
  if (t == 0.0) {
    // Fraction of the shell inside the RX ball; r_alpha² is uniform on the shell.
    const double lo = std::abs(r0 - rt);
    const double hi = r0 + rt;
    if (rr <= lo) return 0.0;
    if (rr >= hi) return 1.0;
    return (rr * rr - lo * lo) / (4.0 * r0 * rt);
  }
  const double d = ch.diffusivity;
  const double kd = ch.degradation_rate;
  const double s = std::sqrt(4.0 * d * t);
  const double decay = std::exp(-kd * t);
  const double root = std::sqrt(4.0 * d * t / std::numbers::pi);
  auto xi1 = [&](double z) {
    return std::exp(-(rr - z) * (rr - z) / (4.0 * d * t) - kd * t) * (rr + z) * root +
           (rr * rr + 2.0 * d * t - z * z) * std::erf((rr - z) / s) * decay;
  };
  auto xi2 = [&](double z) { return std::erf((rr + z) / s) * decay; };
  const double a = r0 - rt;
  const double b = r0 + rt;
  return (xi1(a) + xi1(-a) - xi1(b) - xi1(-b)) / (8.0 * r0 * rt) +
         d * t / (2.0 * rt * r0) * (xi2(b) + xi2(-b) - xi2(a) - xi2(-a));
}

RxModel::RxModel(const TxParams& tx, const ChannelParams& ch, ReceptorLayout layout)
    : RxModel(tx, ch, std::move(layout), ReleaseModel(tx)) {}

RxModel::RxModel(const TxParams& tx, const ChannelParams& ch, ReceptorLayout layout,
                 ReleaseModel release)
    : tx_(tx),
      ch_(ch),
      layout_(std::move(layout)),
      release_(std::move(release)),
      harvest_(tx, ch, layout_.empty() ? 0.0 : layout_.capacitance) {
  validate_experiment(tx_, ch_);
  if (!release_.spectrum().matches(tx_) ||
      release_.tx().generation_rate != tx_.generation_rate ||
      release_.tx().vesicle_count != tx_.vesicle_count) {
    throw InvalidArgument("RxModel: release model built for different TX parameters");
  }
  if (!layout_.empty()) {
    const LayoutReport report = validate_layout(layout_, tx_);
    if (!report.ok()) throw InvalidArgument("RxModel: " + report.to_string());
    double max_a = 0.0;
    for (const auto& r : layout_.receptors) max_a = std::max(max_a, r.radius);
    const double gap = ch_.rx_distance - tx_.radius;
    if (gap <= 0.0 || max_a / gap > 0.2) {
      std::ostringstream msg;
      msg << "point-TX approximation questionable: max receptor radius " << max_a
          << " um vs TX-RX gap " << gap << " um";
      diagnostics_.push_back(msg.str());
    }
  }
}

std::vector<double> RxModel::receptor_distances() const {
  std::vector<double> out;
  out.reserve(layout_.receptors.size());
  for (const auto& r : layout_.receptors) out.push_back(receptor_rx_distance(r, tx_, ch_));
  return out;
}

double RxModel::receptor_emission_kernel(double t) const {
  if (layout_.empty()) return 0.0;
  const double rt = tx_.radius;
  double total_ratio = 0.0;
  double acc = 0.0;
  for (const auto& r : layout_.receptors) {
    const double ai = r.area_ratio(rt);
    total_ratio += ai;
    acc += ai * point_observation_prob(ch_, receptor_rx_distance(r, tx_, ch_), t);
  }
  return acc / total_ratio;
}

SignalTrace RxModel::observation_prob_no_receptors(const TimeGrid& grid) const {
  const SignalTrace pu = sample(
      grid, Quantity::ObservationProbability,
      [this](double t) { return uniform_shell_observation_prob(tx_, ch_, t); },
      uniform_shell_observation_prob(tx_, ch_, 0.0));
  return convolve(release_.release_trace(grid), pu, Quantity::ObservationProbability);
}

SignalTrace RxModel::receptor_reabsorption_loss(const TimeGrid& grid) const {
  if (layout_.empty()) {
    grid.validate();
    return SignalTrace{grid.t0, grid.dt, std::vector<double>(grid.n, 0.0),
                       Quantity::ObservationProbability};
  }
  const SignalTrace he = hit_rate(harvest_, release_, grid);
  const SignalTrace kernel = sample(
      grid, Quantity::ObservationProbability,
      [this](double t) { return receptor_emission_kernel(t); }, receptor_emission_kernel(0.0));
  return convolve(he, kernel, Quantity::ObservationProbability);
}

SignalTrace RxModel::observation_prob(const TimeGrid& grid) const {
  return observation_components(grid).total;
}

RxModel::Components RxModel::observation_components(const TimeGrid& grid,
                                                    double tolerance) const {
  Components c{SignalTrace{}, observation_prob_no_receptors(grid),
               receptor_reabsorption_loss(grid), 0};
  c.total = c.no_receptors;
  for (std::size_t i = 0; i < c.total.size(); ++i) {
    c.total.values[i] -= c.receptor_loss.values[i];
    if (c.total.values[i] < -tolerance) ++c.negative_samples;
  }
  return c;
}

}  // namespace mcharvest
