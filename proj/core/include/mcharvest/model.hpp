// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace mcharvest {

/// Lengths are in µm, times in s throughout the library.
struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  constexpr Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
};

/// Transmitter geometry and vesicle kinetics.
struct TxParams {
  double radius{5.0};                 // r_T, µm
  double vesicle_diffusivity{9.0};    // D_v, µm²/s
  double fusion_rate{30.0};           // k_f, µm/s
  int vesicle_count{200};             // N_v
  int molecules_per_vesicle{20};      // eta
  double generation_rate{200.0};      // mu, vesicles/s

  /// Time needed to generate all vesicles, N_v / mu.
  double emission_duration() const {
    return static_cast<double>(vesicle_count) / generation_rate;
  }
  double total_molecules() const {
    return static_cast<double>(vesicle_count) * molecules_per_vesicle;
  }

  /// Throws InvalidArgument on the first violated invariant.
  void validate() const;
};

/// Propagation environment and receiver.
struct ChannelParams {
  double diffusivity{79.4};       // D_sigma, µm²/s
  double degradation_rate{0.8};   // k_d, 1/s
  double rx_distance{20.0};       // r_0, µm (RX center on the +x axis)
  double rx_radius{10.0};         // r_R, µm

  void validate() const;
};

/// Throws unless the RX center lies outside the TX (r_0 >= r_T).
void validate_experiment(const TxParams& tx, const ChannelParams& ch);

/// Circular fully-absorbing patch on the TX membrane.
///
/// The center maps to (r_T sinθ cosφ, r_T sinθ sinφ, r_T cosθ). With the RX
/// on the +x axis this gives d = sqrt(r_T² − 2 r_0 r_T cosφ sinθ + r_0²).
struct Receptor {
  double theta{0.0};   // [0, π]
  double phi{0.0};     // [0, 2π)
  double radius{0.0};  // a, µm

  /// Builds a receptor with angles folded into their canonical ranges.
  static Receptor canonical(double theta, double phi, double radius);

  Vec3 center(double tx_radius) const;
  double area_ratio(double tx_radius) const {
    return radius * radius / (4.0 * tx_radius * tx_radius);
  }
};

/// Receptors on the TX plus the derived coverage and capacitance.
///
/// The fields are plain data; use from_receptors() to populate the derived
/// values consistently and validate_layout() to audit a hand-built value.
struct ReceptorLayout {
  std::vector<Receptor> receptors;
  double coverage{0.0};     // sum a_i² / (4 r_T²)
  double capacitance{0.0};  // G_T, µm

  /// Coverage from the definition and capacitance from the homogenized
  /// (Berg–Purcell) estimate. An empty list yields the bare TX.
  static ReceptorLayout from_receptors(std::vector<Receptor> receptors, double tx_radius);

  bool empty() const { return receptors.empty(); }
};

enum class ViolationKind {
  EmptyLayout,
  RadiusOutOfRange,
  AngleOutOfRange,
  Overlap,
  CoverageMismatch,
  CoverageOutOfRange,
  CapacitanceOutOfRange,
};

struct Violation {
  ViolationKind kind;
  std::size_t first{0};
  std::size_t second{0};
  std::string detail;
};

struct LayoutReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  std::string to_string() const;
};

/// Audits every layout invariant; never throws.
LayoutReport validate_layout(const ReceptorLayout& layout, const TxParams& tx);

/// Receptor radius a_i = 2 r_T sqrt(A_i) for an area ratio A_i in (0, 1).
double area_ratio_to_radius(double area_ratio, double tx_radius);

/// Straight-line distance between two receptor centers on the TX sphere.
double chord_distance(const Receptor& a, const Receptor& b, double tx_radius);

/// Distance from a receptor center to the RX center.
double receptor_rx_distance(const Receptor& r, const TxParams& tx, const ChannelParams& ch);

}  // namespace mcharvest
