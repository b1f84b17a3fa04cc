// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcharvest/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mcharvest/error.hpp"

namespace mcharvest {

double j0_spherical(double z) {
  const double az = std::abs(z);
  if (az < 1e-4) {
    const double z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

double j0_prime(double z) {
  const double az = std::abs(z);
  // z cos z − sin z cancels badly for small z; the Taylor series
  // Σ (−1)^k 2k z^(2k−1) / (2k+1)! is used below 0.5.
  if (az < 0.5) {
    const double z2 = z * z;
    double term = -z / 3.0;  // k = 1
    double sum = term;
    for (int k = 2; k <= 12; ++k) {
      // ratio of consecutive terms: −z² (2k) / ((2k−2)(2k)(2k+1))
      term *= -z2 * (2.0 * k) / ((2.0 * k - 2.0) * (2.0 * k) * (2.0 * k + 1.0));
      sum += term;
    }
    return sum;
  }
  return (z * std::cos(z) - std::sin(z)) / (z * z);
}

double erfcx(double z) {
  if (z < 0.0) {
    // erfcx(−x) = 2 exp(x²) − erfcx(x); overflows only when the true value does.
    return 2.0 * std::exp(z * z) - erfcx(-z);
  }
  if (z < 10.0) return std::exp(z * z) * std::erfc(z);
  // Continued fraction erfcx(z) = (1/√π) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))),
  // evaluated bottom-up; 40 levels are far beyond double precision for z >= 10.
  double tail = z;
  for (int k = 40; k >= 1; --k) tail = z + (0.5 * k) / tail;
  return 1.0 / (std::sqrt(std::numbers::pi) * tail);
}

ErfFamily erf_family(double z) { return {std::erf(z), std::erfc(z), erfcx(z)}; }

bool EigenSpectrum::matches(const TxParams& tx) const {
  return tx_radius == tx.radius && vesicle_diffusivity == tx.vesicle_diffusivity &&
         fusion_rate == tx.fusion_rate;
}

double radiation_residual(double lambda, double tx_radius, double vesicle_diffusivity,
                          double fusion_rate) {
  const double z = lambda * tx_radius;
  return vesicle_diffusivity * lambda * j0_prime(z) + fusion_rate * j0_spherical(z);
}

namespace {

// Root condition in z = λ r_T, multiplied through by z² r_T / D_v:
//   z cos z + (h − 1) sin z = 0,  h = k_f r_T / D_v.
// Free of the 1/z singularity, same roots for z > 0.
double scaled_condition(double z, double h) { return z * std::cos(z) + (h - 1.0) * std::sin(z); }

}  // namespace

EigenSpectrum solve_eigenvalues(const TxParams& tx, std::size_t n_max) {
  if (n_max < 1) throw InvalidArgument("solve_eigenvalues: n_max must be >= 1");
  tx.validate();
  const double rt = tx.radius;
  const double h = tx.fusion_rate * rt / tx.vesicle_diffusivity;
  constexpr double pi = std::numbers::pi;

  EigenSpectrum spec;
  spec.tx_radius = rt;
  spec.vesicle_diffusivity = tx.vesicle_diffusivity;
  spec.fusion_rate = tx.fusion_rate;
  spec.lambdas.reserve(n_max);
  spec.residuals.reserve(n_max);

  for (std::size_t n = 1; n <= n_max; ++n) {
    double lo = (static_cast<double>(n) - 1.0) * pi;
    double hi = static_cast<double>(n) * pi;
    // At z = 0 the condition vanishes identically; its slope there is h.
    if (n == 1) lo = std::min(1e-8, 1e-3 * std::sqrt(3.0 * h));
    double flo = scaled_condition(lo, h);
    double fhi = scaled_condition(hi, h);
    if (!(flo * fhi < 0.0)) {
      throw NumericalError("solve_eigenvalues: bracket " + std::to_string(n) +
                           " carries no sign change (k_f r_T / D_v = " + std::to_string(h) + ")");
    }
    while (hi - lo > 1e-13 * hi) {
      const double mid = 0.5 * (lo + hi);
      const double fm = scaled_condition(mid, h);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
        fhi = fm;
      }
    }
    // Secant polish inside the final bracket.
    double z0 = lo, z1 = hi, f0 = flo, f1 = fhi;
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 4 && f1 != f0; ++it) {
      const double z2 = z1 - f1 * (z1 - z0) / (f1 - f0);
      if (!(z2 >= lo && z2 <= hi)) break;
      z0 = z1;
      f0 = f1;
      z1 = z2;
      f1 = scaled_condition(z2, h);
      z = z2;
      if (f1 == 0.0) break;
    }
    const double lambda = z / rt;
    spec.lambdas.push_back(lambda);
    spec.residuals.push_back(
        std::abs(radiation_residual(lambda, rt, tx.vesicle_diffusivity, tx.fusion_rate)));
  }
  return spec;
}

}  // namespace mcharvest
