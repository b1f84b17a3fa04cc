// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcharvest/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "mcharvest/error.hpp"
#include "mcharvest/harvest.hpp"
#include "mcharvest/release.hpp"
#include "mcharvest/rx.hpp"
#include "mcharvest/timegrid.hpp"

namespace mcharvest {

SeriesComparison compare_series(std::string name, const std::vector<double>& time,
                                const PbsSeries& observed, const std::vector<double>& expected,
                                int realizations, const CompareThresholds& thr) {
  if (observed.mean.size() != time.size() || expected.size() != time.size()) {
    throw InvalidArgument("compare_series: length mismatch for " + name);
  }
  if (realizations < 1) throw InvalidArgument("compare_series: realizations must be >= 1");
  SeriesComparison c;
  c.name = std::move(name);
  c.z_max = thr.z_max;
  c.min_pass_fraction = thr.min_pass_fraction;
  const double floor_se = 1.0 / realizations;
  for (std::size_t k = 1; k < time.size(); ++k) {
    const double se = std::max(observed.se[k], floor_se);
    const double z = (observed.mean[k] - expected[k]) / se;
    c.time.push_back(time[k]);
    c.observed.push_back(observed.mean[k]);
    c.observed_se.push_back(observed.se[k]);
    c.expected.push_back(expected[k]);
    c.z.push_back(z);
    if (std::abs(z) <= thr.z_max) ++c.within;
  }
  c.bins = c.z.size();
  return c;
}

ExpectedTallies expected_tallies(const TxParams& tx, const ChannelParams& ch,
                                 const ReceptorLayout& layout, const PbsResult& result,
                                 double max_dt) {
  if (result.samples() < 2) throw InvalidArgument("expected_tallies: need at least two samples");
  const double bin = result.bin_width;
  const auto sub = static_cast<std::size_t>(std::ceil(bin / max_dt - 1e-9));
  const double dt = bin / static_cast<double>(sub);
  const std::size_t n_bins = result.samples();
  const TimeGrid grid{0.0, dt, (n_bins - 1) * sub + 1};

  ExpectedTallies e;
  e.analytic_dt = dt;
  const ReleaseModel release(tx);
  const double nv = tx.vesicle_count;
  const double total = tx.total_molecules();

  e.fusion_counts.assign(n_bins, 0.0);
  double prev = 0.0;
  for (std::size_t k = 1; k < n_bins; ++k) {
    const double now = release.cumulative_release(result.time[k]);
    e.fusion_counts[k] = nv * (now - prev);
    prev = now;
  }

  const RxModel rx(tx, ch, layout, release);
  const RxModel::Components p = rx.observation_components(grid);
  e.absorbed.assign(n_bins, 0.0);
  if (!layout.empty()) {
    const SignalTrace h_e = harvest_fraction(rx.harvest(), release, grid);
    for (std::size_t k = 0; k < n_bins; ++k) e.absorbed[k] = total * h_e.values[k * sub];
  }
  e.rx_count.resize(n_bins);
  e.rx_count_t.resize(n_bins);
  e.rx_count_r.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    e.rx_count[k] = total * p.total.values[k * sub];
    e.rx_count_t[k] = total * p.no_receptors.values[k * sub];
    e.rx_count_r[k] = total * p.receptor_loss.values[k * sub];
  }
  return e;
}

bool ComparisonReport::pass() const {
  return !series.empty() &&
         std::all_of(series.begin(), series.end(), [](const auto& s) { return s.pass(); });
}

ComparisonReport compare_result(const TxParams& tx, const ChannelParams& ch,
                                const ReceptorLayout& layout, const PbsRunConfig& cfg,
                                const PbsResult& result, const CompareThresholds& thr) {
  if (!cfg.phases.simulate_inside_tx) {
    throw InvalidArgument("compare: analytical curves assume vesicle release; "
                          "enable pbs.simulate_inside_tx");
  }
  const bool receptors = cfg.phases.receptors_active && !layout.empty();
  const ReceptorLayout effective = receptors ? layout : ReceptorLayout{};
  const ExpectedTallies e = expected_tallies(tx, ch, effective, result);
  ComparisonReport report;
  report.series.push_back(compare_series("fusion", result.time, result.fusion_counts,
                                         e.fusion_counts, result.realizations, thr));
  if (cfg.phases.simulate_outside) {
    if (receptors) {
      report.series.push_back(compare_series("absorbed", result.time, result.absorbed_cumulative,
                                             e.absorbed, result.realizations, thr));
    }
    report.series.push_back(compare_series("rx", result.time, result.rx_occupancy, e.rx_count,
                                           result.realizations, thr));
  }
  return report;
}

void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
  const auto old_precision = out.precision(17);
  out << "series,t,observed,observed_se,expected,z\n";
  for (const auto& s : report.series) {
    for (std::size_t i = 0; i < s.bins; ++i) {
      out << s.name << ',' << s.time[i] << ',' << s.observed[i] << ',' << s.observed_se[i] << ','
          << s.expected[i] << ',' << s.z[i] << '\n';
    }
  }
  out.precision(old_precision);
}

std::string comparison_summary(const ComparisonReport& report) {
  std::ostringstream os;
  char line[160];
  for (const auto& s : report.series) {
    std::snprintf(line, sizeof line, "%-9s %s  %zu/%zu bins within %.3g SE (%.1f%%, need %.1f%%)\n",
                  s.name.c_str(), s.pass() ? "PASS" : "FAIL", s.within, s.bins, s.z_max,
                  100.0 * s.pass_fraction(), 100.0 * s.min_pass_fraction);
    os << line;
  }
  os << "overall   " << (report.pass() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

}  // namespace mcharvest
