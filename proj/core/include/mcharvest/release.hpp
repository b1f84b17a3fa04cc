// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "mcharvest/model.hpp"
#include "mcharvest/specfun.hpp"
#include "mcharvest/timegrid.hpp"

namespace mcharvest {

struct TruncationPolicy {
  double rel_tol{1e-12};
  std::size_t max_terms{500};
  /// Below this time the derivative series is replaced by finite differences.
  double derivative_t_min{1e-3};
};

/// Value of a truncated series plus how it was obtained.
struct SeriesValue {
  double value{0.0};
  std::size_t terms{0};
  bool cap_hit{false};      // spectrum exhausted before rel_tol was met
  bool short_time{false};   // early-time bound used instead of the series
};

/// Molecule release rate from the membrane under continuous vesicle
/// generation at rate mu over [0, τ], τ = N_v / mu.
///
/// With b_n = 4 r_T² k_f λ_n j0(λ_n r_T) / (D_v (2 λ_n r_T − sin 2 λ_n r_T))
/// and S(s) = Σ b_n exp(−D_v λ_n² s), Σ b_n = 1 and
///
///   f_c(t) = (mu/N_v) (1 − S(t))          0 < t <= τ
///   f_c(t) = (mu/N_v) (S(t − τ) − S(t))   t > τ.
class ReleaseModel {
 public:
  explicit ReleaseModel(const TxParams& tx, TruncationPolicy policy = {});
  ReleaseModel(const TxParams& tx, EigenSpectrum spectrum, TruncationPolicy policy = {});

  const TxParams& tx() const { return tx_; }
  const EigenSpectrum& spectrum() const { return spectrum_; }
  const TruncationPolicy& policy() const { return policy_; }
  const std::vector<double>& coefficients() const { return coeff_; }

  double release_rate(double t) const;
  SeriesValue release_rate_detail(double t) const;

  /// d f_c / dt. Series form for t >= t_min (and t − τ >= t_min past τ),
  /// central differences of f_c otherwise.
  double release_rate_derivative(double t) const;

  /// Fraction of vesicles still unfused at time s after a single vesicle
  /// starts from the center: S(s).
  SeriesValue survival(double s) const;

  /// 1 − S(s), accurate in relative terms while it is tiny. Below
  /// short_time_limit() it uses the single-reflection image solution, whose
  /// neglected terms are O(e^{−2 r_T²/(D_v s)}) relative.
  SeriesValue fused_fraction(double s) const;

  /// Fusion-time density of a single vesicle released at the center: −S'(s).
  SeriesValue fusion_density(double s) const;

  /// r_T² / (16 D_v); the image form is used below this time.
  double short_time_limit() const;

  /// Mean fusion time of a single vesicle, r_T²/(6 D_v) + r_T/(3 k_f).
  double mean_fusion_time() const;

  /// Fraction of all molecules released by time t, ∫_0^t f_c. Uses the
  /// term-wise integrated series anchored on mean_fusion_time().
  double cumulative_release(double t) const;

  /// ∫_0^horizon f_c(t) dt.
  double release_normalization(double horizon) const;

  /// ∫_a^b f_c(t) dt.
  double integrate(double a, double b) const;

  SignalTrace release_trace(const TimeGrid& grid) const;
  SignalTrace derivative_trace(const TimeGrid& grid) const;

 private:
  double integrated_survival(double s) const;
  double image_flux(double s) const;

  TxParams tx_;
  EigenSpectrum spectrum_;
  TruncationPolicy policy_;
  std::vector<double> coeff_;  // b_n
  std::vector<double> decay_;  // D_v λ_n²
};

}  // namespace mcharvest
