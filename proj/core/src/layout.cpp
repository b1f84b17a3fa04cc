// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcharvest/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mcharvest/error.hpp"

namespace mcharvest {

ReceptorLayout fibonacci_layout(std::size_t n, double coverage, double tx_radius) {
  if (n < 1) throw InvalidArgument("fibonacci_layout: n must be >= 1");
  if (!(coverage > 0.0 && coverage < 1.0)) {
    throw InvalidArgument("fibonacci_layout: coverage must lie in (0, 1)");
  }
  const double a = area_ratio_to_radius(coverage / static_cast<double>(n), tx_radius);
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Receptor> receptors;
  receptors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double theta = std::acos(std::clamp(z, -1.0, 1.0));
    const double phi = golden_angle * static_cast<double>(i);
    receptors.push_back(Receptor::canonical(theta, phi, a));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (chord_distance(receptors[i], receptors[j], tx_radius) < 2.0 * a) {
        throw InvalidArgument("fibonacci_layout: coverage " + std::to_string(coverage) +
                              " with " + std::to_string(n) + " receptors forces overlap");
      }
    }
  }
  return ReceptorLayout::from_receptors(std::move(receptors), tx_radius);
}

ReceptorLayout random_layout(const std::vector<double>& radii, double tx_radius,
                             std::uint64_t seed, std::size_t max_attempts) {
  if (radii.empty()) throw InvalidArgument("random_layout: no radii given");
  for (double a : radii) {
    if (!(a > 0.0 && a <= 2.0 * tx_radius)) {
      throw InvalidArgument("random_layout: receptor radius outside (0, 2 r_T]");
    }
  }
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> cos_theta(-1.0, 1.0);
  std::uniform_real_distribution<double> azimuth(0.0, 2.0 * std::numbers::pi);

  std::vector<Receptor> placed;
  placed.reserve(radii.size());
  std::size_t attempts = 0;
  for (double a : radii) {
    for (;;) {
      if (attempts++ >= max_attempts) {
        throw NumericalError("random_layout: no non-overlapping placement within " +
                             std::to_string(max_attempts) + " attempts (packing too dense)");
      }
      const double theta = std::acos(cos_theta(engine));
      const double phi = azimuth(engine);
      const Receptor candidate = Receptor::canonical(theta, phi, a);
      bool clear = true;
      for (const auto& other : placed) {
        if (chord_distance(candidate, other, tx_radius) < candidate.radius + other.radius) {
          clear = false;
          break;
        }
      }
      if (clear) {
        placed.push_back(candidate);
        break;
      }
    }
  }
  return ReceptorLayout::from_receptors(std::move(placed), tx_radius);
}

ReceptorLayout explicit_layout(const std::vector<ReceptorSpec>& specs, double tx_radius) {
  std::vector<Receptor> receptors;
  receptors.reserve(specs.size());
  for (const auto& s : specs) {
    receptors.push_back(
        Receptor::canonical(s.theta, s.phi, area_ratio_to_radius(s.area_ratio, tx_radius)));
  }
  return ReceptorLayout::from_receptors(std::move(receptors), tx_radius);
}

std::vector<ReceptorSpec> to_specs(const ReceptorLayout& layout, double tx_radius) {
  std::vector<ReceptorSpec> out;
  out.reserve(layout.receptors.size());
  for (const auto& r : layout.receptors) {
    out.push_back({r.theta, r.phi, r.area_ratio(tx_radius)});
  }
  return out;
}

}  // namespace mcharvest
