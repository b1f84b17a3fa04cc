// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "mcharvest/model.hpp"

namespace mcharvest {

/// Spherical Bessel function j0(z) = sin(z)/z, with j0(0) = 1.
double j0_spherical(double z);

/// Derivative j0'(z) = cos(z)/z − sin(z)/z², with j0'(0) = 0.
double j0_prime(double z);

/// Scaled complementary error function exp(z²)·erfc(z).
///
/// Finite for all z where the result is representable; for z > 0 it decays
/// like 1/(z√π) and never overflows.
double erfcx(double z);

struct ErfFamily {
  double erf;
  double erfc;
  double erfcx;
};

ErfFamily erf_family(double z);

/// Positive roots of the vesicle/membrane radiation condition
///
///   D_v λ j0'(λ r_T) + k_f j0(λ r_T) = 0,
///
/// one per interval ((n−1)π/r_T, nπ/r_T].
struct EigenSpectrum {
  std::vector<double> lambdas;    // 1/µm, ascending
  std::vector<double> residuals;  // |D_v λ j0' + k_f j0| at each root
  double tx_radius{0.0};
  double vesicle_diffusivity{0.0};
  double fusion_rate{0.0};

  std::size_t size() const { return lambdas.size(); }
  bool matches(const TxParams& tx) const;
};

/// Left-hand side of the radiation condition, used for residuals.
double radiation_residual(double lambda, double tx_radius, double vesicle_diffusivity,
                          double fusion_rate);

/// Solves for the first n_max roots. Throws NumericalError if a bracket
/// carries no sign change.
EigenSpectrum solve_eigenvalues(const TxParams& tx, std::size_t n_max);

}  // namespace mcharvest
