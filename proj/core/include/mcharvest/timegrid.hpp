// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mcharvest {

enum class Quantity {
  ReleaseRate,
  ReleaseRateDerivative,
  HarvestFraction,
  HarvestFractionCumulative,
  ObservationProbability,
  HitRate,
};

const char* quantity_name(Quantity q);

/// Uniform sampling t_i = t0 + i·dt, i = 0..n−1.
struct TimeGrid {
  double t0{0.0};
  double dt{1e-3};
  std::size_t n{2};

  /// Grid with t0 = 0 whose last sample is at (or just past) the horizon.
  static TimeGrid covering(double horizon, double dt);

  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double horizon() const { return time(n - 1); }
  void validate() const;
};

/// Uniformly sampled series of one model quantity.
struct SignalTrace {
  double t0{0.0};
  double dt{1e-3};
  std::vector<double> values;
  Quantity quantity{Quantity::ObservationProbability};

  std::size_t size() const { return values.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  TimeGrid grid() const { return {t0, dt, values.size()}; }

  /// Throws on dt <= 0, empty values, non-finite samples, or a
  /// probability-like quantity outside [−tol, 1 + tol].
  void validate(double tol = 1e-9) const;
};

/// Samples f on the grid, replacing the origin sample by `origin_value`
/// when t0 == 0 (rate-like series are singular or undefined there).
SignalTrace sample(const TimeGrid& grid, Quantity q, const std::function<double(double)>& f,
                   double origin_value = 0.0);

/// Trapezoid-weighted discrete causal convolution
///
///   c[k] = dt Σ_{j=0..k} w_j a[j] b[k−j],  w_0 = w_k = 1/2, else 1,
///
/// with c[0] = 0. Both inputs must start at t = 0 with the same step.
SignalTrace convolve(const SignalTrace& a, const SignalTrace& b, Quantity out);

/// Convolution that repeatedly halves dt until two successive results differ
/// by less than target_rel_err (max-norm over the coarse grid, relative to the
/// peak magnitude).
struct RefinedTrace {
  SignalTrace trace;
  double dt{0.0};
  int halvings{0};
};

RefinedTrace refine_until(const std::function<double(double)>& a_gen,
                          const std::function<double(double)>& b_gen, double horizon,
                          double dt0, double target_rel_err, Quantity out,
                          int max_halvings = 12);

/// Longest contiguous time span over which the trace stays within rel_tol of
/// its maximum (relative to the maximum).
double plateau_duration(const SignalTrace& trace, double rel_tol);

/// Central-difference derivative (one-sided at the ends).
std::vector<double> differentiate(std::span<const double> values, double dt);

}  // namespace mcharvest
