// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mcharvest/model.hpp"

namespace mcharvest {

/// n equal receptors, a = 2 r_T sqrt(coverage / n), on the golden-angle
/// (Fibonacci) lattice z_i = 1 − (2i + 1)/n, φ_i = i·π(3 − √5).
/// Throws InvalidArgument if the receptors would overlap.
ReceptorLayout fibonacci_layout(std::size_t n, double coverage, double tx_radius);

/// Sequential rejection sampling of centers uniform on the sphere
/// (cos θ ~ U(−1, 1), φ ~ U(0, 2π)). Deterministic for a fixed seed.
/// Throws NumericalError when max_attempts draws are exhausted.
ReceptorLayout random_layout(const std::vector<double>& radii, double tx_radius,
                             std::uint64_t seed, std::size_t max_attempts = 100000);

/// Receptor placement given by angles and area ratio.
struct ReceptorSpec {
  double theta;
  double phi;
  double area_ratio;
};

/// Layout from explicit (θ, φ, A_i) entries. Does not validate.
ReceptorLayout explicit_layout(const std::vector<ReceptorSpec>& specs, double tx_radius);

/// Inverse of explicit_layout, for serialization.
std::vector<ReceptorSpec> to_specs(const ReceptorLayout& layout, double tx_radius);

}  // namespace mcharvest
