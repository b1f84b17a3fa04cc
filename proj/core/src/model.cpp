// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcharvest/model.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "mcharvest/error.hpp"
#include "mcharvest/harvest.hpp"

namespace mcharvest {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace

void TxParams::validate() const {
  require(std::isfinite(radius) && radius > 0.0, "tx.r_T must be > 0");
  require(std::isfinite(vesicle_diffusivity) && vesicle_diffusivity > 0.0, "tx.D_v must be > 0");
  require(std::isfinite(fusion_rate) && fusion_rate > 0.0, "tx.k_f must be > 0");
  require(vesicle_count >= 1, "tx.N_v must be >= 1");
  require(molecules_per_vesicle >= 1, "tx.eta must be >= 1");
  require(std::isfinite(generation_rate) && generation_rate > 0.0, "tx.mu must be > 0");
  const double tau = emission_duration();
  require(std::isfinite(tau) && tau > 0.0, "tx: N_v / mu must be finite and positive");
}

void ChannelParams::validate() const {
  require(std::isfinite(diffusivity) && diffusivity > 0.0, "channel.D_sigma must be > 0");
  require(std::isfinite(degradation_rate) && degradation_rate >= 0.0, "channel.k_d must be >= 0");
  require(std::isfinite(rx_radius) && rx_radius > 0.0, "channel.r_R must be > 0");
  require(std::isfinite(rx_distance) && rx_distance >= 0.0, "channel.r_0 must be >= 0");
}

void validate_experiment(const TxParams& tx, const ChannelParams& ch) {
  tx.validate();
  ch.validate();
  require(ch.rx_distance >= tx.radius, "channel.r_0 must be >= tx.r_T (RX center outside the TX)");
}

Receptor Receptor::canonical(double theta, double phi, double radius) {
  constexpr double pi = std::numbers::pi;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  // Fold theta onto [0, 2π) first, then reflect (θ, φ) -> (2π − θ, φ + π).
  theta = std::fmod(theta, two_pi);
  if (theta < 0.0) theta += two_pi;
  if (theta > pi) {
    theta = two_pi - theta;
    phi += pi;
  }
  phi = std::fmod(phi, two_pi);
  if (phi < 0.0) phi += two_pi;
  if (phi >= two_pi) phi = 0.0;
  return Receptor{theta, phi, radius};
}

Vec3 Receptor::center(double tx_radius) const {
  const double s = std::sin(theta);
  return {tx_radius * s * std::cos(phi), tx_radius * s * std::sin(phi),
          tx_radius * std::cos(theta)};
}

ReceptorLayout ReceptorLayout::from_receptors(std::vector<Receptor> receptors,
                                              double tx_radius) {
  ReceptorLayout layout;
  layout.receptors = std::move(receptors);
  for (const auto& r : layout.receptors) layout.coverage += r.area_ratio(tx_radius);
  layout.capacitance = homogenized_capacitance(layout.receptors, tx_radius);
  return layout;
}

bool LayoutReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

std::string LayoutReport::to_string() const {
  if (ok()) return "layout ok";
  std::ostringstream out;
  out << violations.size() << " layout violation(s):";
  for (const auto& v : violations) out << "\n  - " << v.detail;
  return out.str();
}

double chord_distance(const Receptor& a, const Receptor& b, double tx_radius) {
  return (a.center(tx_radius) - b.center(tx_radius)).norm();
}

double receptor_rx_distance(const Receptor& r, const TxParams& tx, const ChannelParams& ch) {
  const double rt = tx.radius;
  const double r0 = ch.rx_distance;
  const double d2 = rt * rt - 2.0 * r0 * rt * std::cos(r.phi) * std::sin(r.theta) + r0 * r0;
  return std::sqrt(std::max(d2, 0.0));
}

LayoutReport validate_layout(const ReceptorLayout& layout, const TxParams& tx) {
  LayoutReport report;
  const double rt = tx.radius;
  auto add = [&](ViolationKind kind, std::size_t i, std::size_t j, std::string detail) {
    report.violations.push_back(Violation{kind, i, j, std::move(detail)});
  };
  auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
  };

  if (layout.receptors.empty()) {
    add(ViolationKind::EmptyLayout, 0, 0, "layout has no receptors");
    return report;
  }

  double coverage = 0.0;
  for (std::size_t i = 0; i < layout.receptors.size(); ++i) {
    const auto& r = layout.receptors[i];
    coverage += r.area_ratio(rt);
    if (!(r.radius > 0.0 && r.radius <= 2.0 * rt)) {
      add(ViolationKind::RadiusOutOfRange, i, i,
          "receptor " + std::to_string(i) + ": radius " + fmt(r.radius) + " outside (0, 2 r_T]");
    }
    if (!(r.theta >= 0.0 && r.theta <= std::numbers::pi && r.phi >= 0.0 &&
          r.phi < 2.0 * std::numbers::pi)) {
      add(ViolationKind::AngleOutOfRange, i, i,
          "receptor " + std::to_string(i) + ": angles not canonical");
    }
  }

  for (std::size_t i = 0; i < layout.receptors.size(); ++i) {
    for (std::size_t j = i + 1; j < layout.receptors.size(); ++j) {
      const auto& a = layout.receptors[i];
      const auto& b = layout.receptors[j];
      const double d = chord_distance(a, b, rt);
      if (d < a.radius + b.radius) {
        add(ViolationKind::Overlap, i, j,
            "receptors " + std::to_string(i) + " and " + std::to_string(j) + " overlap (chord " +
                fmt(d) + " < " + fmt(a.radius + b.radius) + ")");
      }
    }
  }

  if (std::abs(layout.coverage - coverage) > 1e-9 * std::max(1.0, coverage)) {
    add(ViolationKind::CoverageMismatch, 0, 0,
        "coverage field " + fmt(layout.coverage) + " != sum a_i^2/(4 r_T^2) = " + fmt(coverage));
  }
  if (!(coverage > 0.0 && coverage < 1.0)) {
    add(ViolationKind::CoverageOutOfRange, 0, 0, "coverage " + fmt(coverage) + " outside (0, 1)");
  }
  if (!(layout.capacitance > 0.0 && layout.capacitance < rt)) {
    add(ViolationKind::CapacitanceOutOfRange, 0, 0,
        "capacitance " + fmt(layout.capacitance) + " outside (0, r_T)");
  }
  return report;
}

double area_ratio_to_radius(double area_ratio, double tx_radius) {
  if (!(area_ratio > 0.0 && area_ratio < 1.0)) {
    throw InvalidArgument("area ratio must lie in (0, 1)");
  }
  if (!(tx_radius > 0.0)) throw InvalidArgument("tx radius must be > 0");
  return 2.0 * tx_radius * std::sqrt(area_ratio);
}

}  // namespace mcharvest
