// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcharvest/release.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mcharvest/error.hpp"

namespace mcharvest {

namespace {

// Upper bound on the probability that 3-D Brownian motion started at the
// origin has left the ball of radius r by time s.
double escape_bound(double r, double diffusivity, double s) {
  return 6.0 * std::erfc(r / std::sqrt(12.0 * diffusivity * s));
}

constexpr double kShortTimeBound = 1e-15;

}  // namespace

ReleaseModel::ReleaseModel(const TxParams& tx, TruncationPolicy policy)
    : ReleaseModel(tx, solve_eigenvalues(tx, policy.max_terms), policy) {}

ReleaseModel::ReleaseModel(const TxParams& tx, EigenSpectrum spectrum, TruncationPolicy policy)
    : tx_(tx), spectrum_(std::move(spectrum)), policy_(policy) {
  tx_.validate();
  if (!spectrum_.matches(tx_)) {
    throw InvalidArgument("ReleaseModel: spectrum was solved for different TX parameters");
  }
  if (spectrum_.size() == 0) throw InvalidArgument("ReleaseModel: empty spectrum");
  const double rt = tx_.radius;
  const double pref = 4.0 * rt * rt * tx_.fusion_rate / tx_.vesicle_diffusivity;
  coeff_.reserve(spectrum_.size());
  decay_.reserve(spectrum_.size());
  for (double lam : spectrum_.lambdas) {
    const double z = lam * rt;
    coeff_.push_back(pref * lam * j0_spherical(z) / (2.0 * z - std::sin(2.0 * z)));
    decay_.push_back(tx_.vesicle_diffusivity * lam * lam);
  }
}

SeriesValue ReleaseModel::survival(double s) const {
  if (s < 0.0) throw InvalidArgument("survival: negative time");
  if (s == 0.0) return {1.0, 0, false, false};
  SeriesValue out;
  const std::size_t cap = std::min(policy_.max_terms, coeff_.size());
  double sum = 0.0;
  bool converged = false;
  for (std::size_t n = 0; n < cap; ++n) {
    const double term = coeff_[n] * std::exp(-decay_[n] * s);
    sum += term;
    out.terms = n + 1;
    // Terms decay monotonically in magnitude once exp dominates; require the
    // exponential factor itself to be negligible too so that slowly varying
    // early terms cannot stop the sum prematurely.
    if (std::abs(term) <= policy_.rel_tol * std::abs(sum) &&
        std::exp(-decay_[n] * s) < policy_.rel_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    if (escape_bound(tx_.radius, tx_.vesicle_diffusivity, s) < kShortTimeBound) {
      return {1.0, out.terms, true, true};
    }
    out.cap_hit = true;
    if (std::exp(-decay_[cap - 1] * s) > 1e-8) {
      throw NumericalError("release series: spectrum too short at t = " + std::to_string(s) +
                           " s (increase the term cap)");
    }
  }
  out.value = sum;
  return out;
}

double ReleaseModel::short_time_limit() const {
  return tx_.radius * tx_.radius / (16.0 * tx_.vesicle_diffusivity);
}

// With w = r c the radial problem is the 1-D heat equation, the start at the
// center is an odd full-line solution, and the membrane condition becomes
// w_x = h w (x = r_T − r, h = k_f/D_v − 1/r_T). Adding the Robin image of the
// free solution gives, at the membrane,
//
//   w(r_T, s) = 2 (4πDs)^{−3/2} e^{−r_T²/(4Ds)} (r_T − 2Dsh + 2Dsh² √(πDs) erfcx(z)),
//
// z = (r_T + 2Dsh) / (2√(Ds)), and the fusion flux is 4π r_T k_f w(r_T, s).
double ReleaseModel::image_flux(double s) const {
  const double r = tx_.radius;
  const double d = tx_.vesicle_diffusivity;
  const double h = tx_.fusion_rate / d - 1.0 / r;
  const double ds = d * s;
  const double gauss = std::exp(-r * r / (4.0 * ds));
  if (gauss == 0.0) return 0.0;
  const double z = (r + 2.0 * ds * h) / (2.0 * std::sqrt(ds));
  const double bracket =
      r - 2.0 * ds * h + 2.0 * ds * h * h * std::sqrt(std::numbers::pi * ds) * erfcx(z);
  const double w = 2.0 * std::pow(4.0 * std::numbers::pi * ds, -1.5) * gauss * bracket;
  return 4.0 * std::numbers::pi * r * tx_.fusion_rate * w;
}

// Time integral of the image solution: the erfc terms cancel, leaving
// 1 − S(s) = (2 r_T k_f / D_v) e^{−r_T²/(4Ds)} erfcx(z).
SeriesValue ReleaseModel::fused_fraction(double s) const {
  if (s < 0.0) throw InvalidArgument("fused_fraction: negative time");
  if (s == 0.0) return {0.0, 0, false, false};
  if (s < short_time_limit()) {
    const double r = tx_.radius;
    const double d = tx_.vesicle_diffusivity;
    const double h = tx_.fusion_rate / d - 1.0 / r;
    const double ds = d * s;
    const double z = (r + 2.0 * ds * h) / (2.0 * std::sqrt(ds));
    const double v = 2.0 * r * tx_.fusion_rate / d * std::exp(-r * r / (4.0 * ds)) * erfcx(z);
    return {v, 0, false, true};
  }
  SeriesValue out = survival(s);
  out.value = 1.0 - out.value;
  return out;
}

SeriesValue ReleaseModel::fusion_density(double s) const {
  if (!(s > 0.0)) return {0.0, 0, false, true};
  if (s < short_time_limit()) return {image_flux(s), 0, false, true};
  SeriesValue out;
  const std::size_t cap = std::min(policy_.max_terms, coeff_.size());
  double sum = 0.0;
  bool converged = false;
  for (std::size_t n = 0; n < cap; ++n) {
    const double e = std::exp(-decay_[n] * s);
    const double term = coeff_[n] * decay_[n] * e;
    sum += term;
    out.terms = n + 1;
    if (std::abs(term) <= policy_.rel_tol * std::abs(sum) && e < policy_.rel_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    if (escape_bound(tx_.radius, tx_.vesicle_diffusivity, s) < kShortTimeBound) {
      return {0.0, out.terms, true, true};
    }
    out.cap_hit = true;
  }
  out.value = sum;
  return out;
}

SeriesValue ReleaseModel::release_rate_detail(double t) const {
  if (!(t > 0.0)) throw InvalidArgument("release_rate: t must be > 0");
  const double scale = tx_.generation_rate / tx_.vesicle_count;
  const double tau = tx_.emission_duration();
  const SeriesValue now = fused_fraction(t);
  SeriesValue out = now;
  if (t <= tau) {
    out.value = scale * now.value;
  } else {
    const SeriesValue lag = fused_fraction(t - tau);
    out.value = scale * (now.value - lag.value);
    out.terms = std::max(now.terms, lag.terms);
    out.cap_hit = now.cap_hit || lag.cap_hit;
    out.short_time = now.short_time || lag.short_time;
  }
  return out;
}

double ReleaseModel::release_rate(double t) const { return release_rate_detail(t).value; }

double ReleaseModel::release_rate_derivative(double t) const {
  if (!(t > 0.0)) throw InvalidArgument("release_rate_derivative: t must be > 0");
  const double tmin = policy_.derivative_t_min;
  const double tau = tx_.emission_duration();
  const double scale = tx_.generation_rate / tx_.vesicle_count;
  const bool near_origin = t < tmin;
  const bool near_tau = t > tau && t - tau < tmin;
  if (!near_origin && !near_tau) {
    double v = fusion_density(t).value;
    if (t > tau) v -= fusion_density(t - tau).value;
    return scale * v;
  }
  // f_c is C¹ across τ (the single-vesicle fusion density vanishes at 0),
  // so the stencil may straddle it.
  const double h = std::min(0.1 * tmin, 0.5 * t);
  return (release_rate(t + h) - release_rate(t - h)) / (2.0 * h);
}

double ReleaseModel::mean_fusion_time() const {
  const double r = tx_.radius;
  return r * r / (6.0 * tx_.vesicle_diffusivity) + r / (3.0 * tx_.fusion_rate);
}

// Q(s) = ∫_0^s S = mean_fusion_time − Σ b_n e^{−a_n s} / a_n.
double ReleaseModel::integrated_survival(double s) const {
  if (s <= 0.0) return 0.0;
  const std::size_t cap = std::min(policy_.max_terms, coeff_.size());
  double tail = 0.0;
  for (std::size_t n = 0; n < cap; ++n) {
    const double e = std::exp(-decay_[n] * s);
    const double term = coeff_[n] * e / decay_[n];
    tail += term;
    if (std::abs(term) <= policy_.rel_tol * std::abs(tail) && e < policy_.rel_tol) {
      return mean_fusion_time() - tail;
    }
  }
  if (escape_bound(tx_.radius, tx_.vesicle_diffusivity, s) < kShortTimeBound) return s;
  if (std::exp(-decay_[cap - 1] * s) > 1e-8) {
    throw NumericalError("release series: spectrum too short at t = " + std::to_string(s) +
                         " s (increase the term cap)");
  }
  return mean_fusion_time() - tail;
}

double ReleaseModel::cumulative_release(double t) const {
  if (t <= 0.0) return 0.0;
  const double scale = tx_.generation_rate / tx_.vesicle_count;
  const double tau = tx_.emission_duration();
  if (t <= tau) return scale * (t - integrated_survival(t));
  return scale * (tau + integrated_survival(t - tau) - integrated_survival(t));
}

double ReleaseModel::release_normalization(double horizon) const {
  return integrate(0.0, horizon);
}

double ReleaseModel::integrate(double a, double b) const {
  if (!(a >= 0.0) || !(b >= a)) throw InvalidArgument("integrate: need 0 <= a <= b");
  if (a == b) return 0.0;
  return cumulative_release(b) - cumulative_release(a);
}

SignalTrace ReleaseModel::release_trace(const TimeGrid& grid) const {
  return sample(grid, Quantity::ReleaseRate, [this](double t) { return release_rate(t); });
}

SignalTrace ReleaseModel::derivative_trace(const TimeGrid& grid) const {
  // f_c'(0+) = (mu/N_v) × fusion density at 0, which vanishes.
  return sample(grid, Quantity::ReleaseRateDerivative,
                [this](double t) { return release_rate_derivative(t); });
}

}  // namespace mcharvest
