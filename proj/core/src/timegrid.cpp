// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcharvest/timegrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcharvest/error.hpp"

namespace mcharvest {

const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::ReleaseRate: return "release_rate";
    case Quantity::ReleaseRateDerivative: return "release_rate_derivative";
    case Quantity::HarvestFraction: return "harvest_fraction";
    case Quantity::HarvestFractionCumulative: return "harvest_fraction_cumulative";
    case Quantity::ObservationProbability: return "observation_probability";
    case Quantity::HitRate: return "hit_rate";
  }
  return "unknown";
}

TimeGrid TimeGrid::covering(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw InvalidArgument("grid: dt and horizon must be > 0");
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  TimeGrid g{0.0, dt, steps + 1};
  g.validate();
  return g;
}

void TimeGrid::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("grid: dt must be > 0");
  if (n < 2) throw InvalidArgument("grid: at least two samples required");
}

namespace {

bool probability_like(Quantity q) {
  return q == Quantity::HarvestFraction || q == Quantity::HarvestFractionCumulative ||
         q == Quantity::ObservationProbability;
}

}  // namespace

void SignalTrace::validate(double tol) const {
  if (!(dt > 0.0)) throw InvalidArgument("trace: dt must be > 0");
  if (values.empty()) throw InvalidArgument("trace: no samples");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v)) {
      throw NumericalError(std::string("trace ") + quantity_name(quantity) +
                           ": non-finite sample at index " + std::to_string(i));
    }
    if (probability_like(quantity) && (v < -tol || v > 1.0 + tol)) {
      throw NumericalError(std::string("trace ") + quantity_name(quantity) +
                           ": sample outside [0, 1] at index " + std::to_string(i));
    }
  }
}

SignalTrace sample(const TimeGrid& grid, Quantity q, const std::function<double(double)>& f,
                   double origin_value) {
  grid.validate();
  SignalTrace s{grid.t0, grid.dt, std::vector<double>(grid.n), q};
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double t = grid.time(i);
    s.values[i] = (t == 0.0) ? origin_value : f(t);
  }
  return s;
}

SignalTrace convolve(const SignalTrace& a, const SignalTrace& b, Quantity out) {
  if (a.t0 != 0.0 || b.t0 != 0.0) throw InvalidArgument("convolve: traces must start at t = 0");
  if (std::abs(a.dt - b.dt) > 1e-12 * std::max(a.dt, b.dt)) {
    throw InvalidArgument("convolve: mismatched grid steps");
  }
  if (a.values.empty() || b.values.empty()) throw InvalidArgument("convolve: empty trace");
  const std::size_t n = std::min(a.size(), b.size());
  const double dt = a.dt;
  SignalTrace c{0.0, dt, std::vector<double>(n, 0.0), out};
  const double* pa = a.values.data();
  const double* pb = b.values.data();
  for (std::size_t k = 1; k < n; ++k) {
    double acc = 0.5 * (pa[0] * pb[k] + pa[k] * pb[0]);
    for (std::size_t j = 1; j < k; ++j) acc += pa[j] * pb[k - j];
    c.values[k] = dt * acc;
  }
  return c;
}

RefinedTrace refine_until(const std::function<double(double)>& a_gen,
                          const std::function<double(double)>& b_gen, double horizon,
                          double dt0, double target_rel_err, Quantity out, int max_halvings) {
  auto run = [&](double dt) {
    const TimeGrid grid = TimeGrid::covering(horizon, dt);
    return convolve(sample(grid, out, a_gen), sample(grid, out, b_gen), out);
  };
  RefinedTrace current{run(dt0), dt0, 0};
  if (!(target_rel_err < std::numeric_limits<double>::infinity())) return current;

  for (int h = 1; h <= max_halvings; ++h) {
    const double dt = dt0 / std::pow(2.0, h);
    SignalTrace next = run(dt);
    // Compare on the coarse grid: every 2nd fine sample.
    double diff = 0.0;
    double peak = 0.0;
    for (std::size_t i = 0; i < current.trace.size() && 2 * i < next.size(); ++i) {
      diff = std::max(diff, std::abs(next.values[2 * i] - current.trace.values[i]));
      peak = std::max(peak, std::abs(next.values[2 * i]));
    }
    current = RefinedTrace{std::move(next), dt, h};
    if (diff <= target_rel_err * peak) return current;
  }
  throw NumericalError("refine_until: no convergence after " + std::to_string(max_halvings) +
                       " halvings");
}

std::vector<double> differentiate(std::span<const double> v, double dt) {
  const std::size_t n = v.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d[0] = (v[1] - v[0]) / dt;
  d[n - 1] = (v[n - 1] - v[n - 2]) / dt;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
  return d;
}

double plateau_duration(const SignalTrace& trace, double rel_tol) {
  if (trace.values.empty()) return 0.0;
  const double peak = *std::max_element(trace.values.begin(), trace.values.end());
  if (!(peak > 0.0)) return 0.0;
  std::size_t best = 0;
  std::size_t run = 0;
  for (double v : trace.values) {
    run = (peak - v <= rel_tol * peak) ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best > 1 ? static_cast<double>(best - 1) * trace.dt : 0.0;
}

}  // namespace mcharvest
