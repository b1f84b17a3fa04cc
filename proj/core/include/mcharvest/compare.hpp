// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcharvest/model.hpp"
#include "mcharvest/pbs.hpp"

namespace mcharvest {

struct CompareThresholds {
  double z_max{3.0};
  double min_pass_fraction{0.95};
};

/// Per-sample z-scores of a simulated series against its analytical
/// expectation. The standard error is floored at 1/realizations (one count
/// in one realization) so bins where every realization agrees exactly do not
/// divide by zero.
struct SeriesComparison {
  std::string name;
  std::vector<double> time;
  std::vector<double> observed;
  std::vector<double> observed_se;
  std::vector<double> expected;
  std::vector<double> z;
  std::size_t within{0};
  std::size_t bins{0};
  double z_max{3.0};
  double min_pass_fraction{0.95};

  double pass_fraction() const { return bins ? static_cast<double>(within) / bins : 0.0; }
  bool pass() const { return bins > 0 && pass_fraction() >= min_pass_fraction; }
};

/// Compares samples 1..K (t = 0 is excluded: every series is 0 there).
SeriesComparison compare_series(std::string name, const std::vector<double>& time,
                                const PbsSeries& observed, const std::vector<double>& expected,
                                int realizations, const CompareThresholds& thr = {});

/// Analytical counterparts of the simulator tallies at the PbsResult's
/// sample times, per realization.
struct ExpectedTallies {
  std::vector<double> fusion_counts;  // N_v ∫ f_c over (t_{k−1}, t_k]
  std::vector<double> absorbed;       // N_v η H_e(t_k)
  std::vector<double> rx_count;       // N_v η P(t_k), or N_v η P_T(t_k) without receptors
  std::vector<double> rx_count_t;     // N_v η P_T(t_k)
  std::vector<double> rx_count_r;     // N_v η P_r(t_k)
  double analytic_dt{0.0};
};

/// Evaluates the analytical curves on a grid whose step divides the bin
/// width and is at most max_dt. `layout.capacitance` is used as G_T.
ExpectedTallies expected_tallies(const TxParams& tx, const ChannelParams& ch,
                                 const ReceptorLayout& layout, const PbsResult& result,
                                 double max_dt = 1e-3);

struct ComparisonReport {
  std::vector<SeriesComparison> series;
  bool pass() const;
};

/// fusion, absorbed (only with active receptors) and rx series.
ComparisonReport compare_result(const TxParams& tx, const ChannelParams& ch,
                                const ReceptorLayout& layout, const PbsRunConfig& cfg,
                                const PbsResult& result, const CompareThresholds& thr = {});

/// Long-format CSV: series,t,observed,observed_se,expected,z.
void write_comparison_csv(std::ostream& out, const ComparisonReport& report);

/// One line per series plus an overall PASS/FAIL line.
std::string comparison_summary(const ComparisonReport& report);

}  // namespace mcharvest
