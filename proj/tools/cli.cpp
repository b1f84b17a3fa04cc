// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "mcharvest/compare.hpp"
#include "mcharvest/config.hpp"
#include "mcharvest/harvest.hpp"
#include "mcharvest/release.hpp"
#include "mcharvest/rx.hpp"
#include "mcharvest/timegrid.hpp"

namespace mcharvest::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> dt;
  std::optional<double> mu;
};

std::string mu_label(double mu) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", mu);
  return buf;
}

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open output file '" + path + "'");
  return f;
}

void write_columns(const std::string& path, const std::vector<std::string>& names,
                   const std::vector<const std::vector<double>*>& columns) {
  auto f = open_output(path);
  f.precision(17);
  for (std::size_t c = 0; c < names.size(); ++c) f << (c ? "," : "") << names[c];
  f << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front()->size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) f << (c ? "," : "") << (*columns[c])[r];
    f << '\n';
  }
}

Json tx_json(const TxParams& tx, const std::vector<double>& mus) {
  return Json{{"r_T", tx.radius},          {"D_v", tx.vesicle_diffusivity},
              {"k_f", tx.fusion_rate},     {"N_v", tx.vesicle_count},
              {"eta", tx.molecules_per_vesicle}, {"mu", mus}};
}

Json layout_json(const ReceptorLayout& layout, const ExperimentConfig& cfg, double tx_radius) {
  Json receptors = Json::array();
  for (const auto& r : layout.receptors) {
    receptors.push_back(Json{{"theta", r.theta},
                             {"phi", r.phi},
                             {"a", r.radius},
                             {"area_ratio", r.area_ratio(tx_radius)}});
  }
  const char* mode = "homogenized";
  if (cfg.layout.capacitance == CapacitanceMode::UserSupplied) mode = "user";
  if (cfg.layout.capacitance == CapacitanceMode::PbsFit) mode = "pbs_fit";
  return Json{{"kind", layout_kind_name(cfg.layout.kind)},
              {"coverage", layout.coverage},
              {"capacitance", layout.capacitance},
              {"capacitance_mode", layout.empty() ? "none" : mode},
              {"receptors", receptors}};
}

Json parameters_json(const ExperimentConfig& cfg) {
  const PbsRunConfig& p = cfg.pbs;
  return Json{
      {"tx", tx_json(cfg.tx, cfg.generation_rates)},
      {"channel",
       Json{{"D_sigma", cfg.channel.diffusivity},
            {"k_d", cfg.channel.degradation_rate},
            {"r_0", cfg.channel.rx_distance},
            {"r_R", cfg.channel.rx_radius}}},
      {"grid", Json{{"horizon", cfg.grid.horizon}, {"dt", cfg.grid.dt}}},
      {"pbs",
       Json{{"dt", p.dt},
            {"horizon", p.horizon},
            {"realizations", p.realizations},
            {"seed", p.seed},
            {"sample_every", p.sample_every},
            {"workers", p.workers},
            {"simulate_inside_tx", p.phases.simulate_inside_tx},
            {"simulate_outside", p.phases.simulate_outside},
            {"receptors_active", p.phases.receptors_active},
            {"aggregate_free_flight", p.aggregate_free_flight}}},
      {"compare",
       Json{{"z_max", cfg.compare.z_max},
            {"min_pass_fraction", cfg.compare.min_pass_fraction},
            {"fit_realizations", cfg.compare.fit_realizations},
            {"fit_seed", cfg.compare.fit_seed},
            {"fit_max_rms", cfg.compare.fit_max_rms}}}};
}

void write_meta(const std::string& out_path, const std::string& command,
                const ExperimentConfig& cfg, Json extra) {
  Json meta{{"command", command},
            {"config", cfg.source},
            {"output", out_path},
            {"parameters", parameters_json(cfg)}};
  for (auto& [k, v] : extra.items()) meta[k] = v;
  auto f = open_output(out_path + ".meta.json");
  f << meta.dump(2) << '\n';
}

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) cfg.pbs.seed = *o.seed;
  if (o.workers) cfg.pbs.workers = *o.workers;
  if (o.dt) cfg.pbs.dt = *o.dt;
  if (o.mu) cfg.generation_rates = {*o.mu};
  cfg.tx.generation_rate = cfg.generation_rates.front();
  cfg.pbs.validate();
  return cfg;
}

TimeGrid analytic_grid(const ExperimentConfig& cfg) {
  return TimeGrid::covering(cfg.grid.horizon, cfg.grid.dt);
}

std::vector<double> grid_times(const TimeGrid& g) {
  std::vector<double> t(g.n);
  for (std::size_t i = 0; i < g.n; ++i) t[i] = g.time(i);
  return t;
}

ReceptorLayout configured_layout(const ExperimentConfig& cfg, Json& meta, std::ostream& out) {
  std::optional<CapacitanceFit> fit;
  ReceptorLayout layout = resolve_capacitance(cfg, cfg.tx, build_layout(cfg, cfg.tx), &fit);
  if (fit) {
    meta["capacitance_fit"] = Json{{"capacitance", fit->capacitance},
                                   {"rms_residual", fit->rms_residual},
                                   {"samples", fit->samples}};
    out << "fitted G_T = " << fit->capacitance << " um (rms " << fit->rms_residual << ")\n";
  }
  return layout;
}

int cmd_release(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  const TimeGrid grid = analytic_grid(cfg);
  std::vector<std::vector<double>> cols{grid_times(grid)};
  std::vector<std::string> names{"t"};
  Json traces = Json::array();
  for (double mu : cfg.generation_rates) {
    const ReleaseModel model(cfg.tx_for(mu));
    SignalTrace f = model.release_trace(grid);
    const double plateau = plateau_duration(f, 0.01);
    const auto peak = std::max_element(f.values.begin(), f.values.end());
    traces.push_back(Json{{"mu", mu},
                          {"peak", *peak},
                          {"peak_time", f.time(static_cast<std::size_t>(peak - f.values.begin()))},
                          {"plateau_duration_1pct", plateau},
                          {"released_fraction", model.cumulative_release(grid.horizon())}});
    out << "mu = " << mu_label(mu) << ": peak f_c " << *peak << " 1/s, 1% plateau " << plateau
        << " s\n";
    names.push_back("f_c_mu_" + mu_label(mu));
    cols.push_back(std::move(f.values));
  }
  std::vector<const std::vector<double>*> ptrs;
  for (const auto& c : cols) ptrs.push_back(&c);
  write_columns(o.out, names, ptrs);
  write_meta(o.out, "release", cfg, Json{{"traces", traces}});
  return kOk;
}

int cmd_harvest(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  Json meta;
  const ReceptorLayout layout = configured_layout(cfg, meta, out);
  const TimeGrid grid = analytic_grid(cfg);
  std::vector<std::vector<double>> cols{grid_times(grid)};
  std::vector<std::string> names{"t"};
  Json traces = Json::array();
  for (double mu : cfg.generation_rates) {
    const TxParams tx = cfg.tx_for(mu);
    const ReleaseModel release(tx);
    const HarvestModel model(tx, cfg.channel, layout.empty() ? 0.0 : layout.capacitance);
    SignalTrace h = harvest_fraction(model, release, grid);
    for (double& v : h.values) v *= tx.total_molecules();
    traces.push_back(Json{{"mu", mu},
                          {"absorbed_at_horizon", h.values.back()},
                          {"absorbed_limit", tx.total_molecules() * model.harvest_limit()}});
    out << "mu = " << mu_label(mu) << ": absorbed at t = " << grid.horizon() << " s: "
        << h.values.back() << " molecules\n";
    names.push_back("absorbed_mu_" + mu_label(mu));
    cols.push_back(std::move(h.values));
  }
  std::vector<const std::vector<double>*> ptrs;
  for (const auto& c : cols) ptrs.push_back(&c);
  write_columns(o.out, names, ptrs);
  meta["layout"] = layout_json(layout, cfg, cfg.tx.radius);
  meta["traces"] = traces;
  write_meta(o.out, "harvest", cfg, meta);
  return kOk;
}

int cmd_cir(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  Json meta;
  const ReceptorLayout layout = configured_layout(cfg, meta, out);
  const TimeGrid grid = analytic_grid(cfg);
  std::vector<std::vector<double>> cols{grid_times(grid)};
  std::vector<std::string> names{"t"};
  Json traces = Json::array();
  Json diagnostics = Json::array();
  for (double mu : cfg.generation_rates) {
    const TxParams tx = cfg.tx_for(mu);
    const RxModel model(tx, cfg.channel, layout);
    RxModel::Components c = model.observation_components(grid);
    const double total = tx.total_molecules();
    for (auto* s : {&c.total, &c.no_receptors, &c.receptor_loss}) {
      for (double& v : s->values) v *= total;
    }
    const auto peak = std::max_element(c.total.values.begin(), c.total.values.end());
    const double peak_t = c.total.time(static_cast<std::size_t>(peak - c.total.values.begin()));
    traces.push_back(Json{{"mu", mu},
                          {"peak", *peak},
                          {"peak_time", peak_t},
                          {"negative_samples", c.negative_samples}});
    for (const auto& d : model.diagnostics()) diagnostics.push_back(d);
    out << "mu = " << mu_label(mu) << ": peak " << *peak << " molecules at t = " << peak_t
        << " s\n";
    const std::string label = mu_label(mu);
    names.push_back("rx_count_mu_" + label);
    names.push_back("rx_count_T_mu_" + label);
    names.push_back("rx_count_r_mu_" + label);
    cols.push_back(std::move(c.total.values));
    cols.push_back(std::move(c.no_receptors.values));
    cols.push_back(std::move(c.receptor_loss.values));
  }
  std::vector<const std::vector<double>*> ptrs;
  for (const auto& c : cols) ptrs.push_back(&c);
  write_columns(o.out, names, ptrs);
  meta["layout"] = layout_json(layout, cfg, cfg.tx.radius);
  meta["traces"] = traces;
  meta["diagnostics"] = diagnostics;
  write_meta(o.out, "cir", cfg, meta);
  return kOk;
}

int cmd_pbs(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  const ReceptorLayout layout = build_layout(cfg, cfg.tx);
  const PbsResult result = simulate(cfg.tx, cfg.channel, layout, cfg.pbs);
  {
    auto f = open_output(o.out);
    write_pbs_csv(f, result);
  }
  out << "pbs: " << result.realizations << " realizations, " << result.samples()
      << " samples, mu = " << mu_label(cfg.tx.generation_rate) << "\n";
  Json meta{{"mu", cfg.tx.generation_rate},
            {"fusion_probability", fusion_probability(cfg.tx, cfg.pbs.dt)},
            {"bin_width", result.bin_width},
            {"layout", layout_json(layout, cfg, cfg.tx.radius)}};
  write_meta(o.out, "pbs", cfg, meta);
  return kOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  Json meta;
  const ReceptorLayout layout = configured_layout(cfg, meta, out);
  const PbsResult result = simulate(cfg.tx, cfg.channel, layout, cfg.pbs);
  const ComparisonReport report =
      compare_result(cfg.tx, cfg.channel, layout, cfg.pbs, result,
                     {cfg.compare.z_max, cfg.compare.min_pass_fraction});
  {
    auto f = open_output(o.out);
    write_comparison_csv(f, report);
  }
  const std::string summary = comparison_summary(report);
  {
    auto f = open_output(o.out + ".summary.txt");
    f << summary;
  }
  out << summary;
  Json series = Json::array();
  for (const auto& s : report.series) {
    series.push_back(Json{{"name", s.name},
                          {"within", s.within},
                          {"bins", s.bins},
                          {"pass_fraction", s.pass_fraction()},
                          {"pass", s.pass()}});
  }
  meta["mu"] = cfg.tx.generation_rate;
  meta["layout"] = layout_json(layout, cfg, cfg.tx.radius);
  meta["series"] = series;
  meta["pass"] = report.pass();
  write_meta(o.out, "compare", cfg, meta);
  return report.pass() ? kOk : kCompareFailed;
}

int cmd_layout_gen(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  const ReceptorLayout layout = build_layout(cfg, cfg.tx);
  {
    auto f = open_output(o.out);
    f << layout_to_yaml(layout, cfg.tx.radius);
  }
  const LayoutReport report = validate_layout(layout, cfg.tx);
  out << layout.receptors.size() << " receptors, coverage " << layout.coverage << ", G_T "
      << layout.capacitance << " um: " << (report.ok() ? "ok" : report.to_string()) << "\n";
  write_meta(o.out, "layout-gen", cfg, Json{{"layout", layout_json(layout, cfg, cfg.tx.radius)}});
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vesicle-based transmitter channel models and particle simulation", "mcharvest"};
  app.require_subcommand(1);
  Options opt;
  std::function<int(const Options&, std::ostream&)> action;

  struct Spec {
    const char* name;
    const char* help;
    int (*fn)(const Options&, std::ostream&);
  };
  const Spec specs[] = {
      {"release", "release rate f_c(t) for every configured mu", cmd_release},
      {"harvest", "molecules re-absorbed by the TX, N_v eta H_e(t)", cmd_harvest},
      {"cir", "molecules observed at the RX, N_v eta P(t) with P_T and P_r", cmd_cir},
      {"pbs", "particle-based simulation tallies", cmd_pbs},
      {"compare", "simulation vs analytical z-score report", cmd_compare},
      {"layout-gen", "write the configured receptor layout as an explicit list", cmd_layout_gen},
  };
  for (const auto& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("-c,--config", opt.config, "config file (YAML)")->required();
    sub->add_option("-o,--out", opt.out, "output file")->required();
    sub->add_option("--seed", opt.seed, "override pbs.seed");
    sub->add_option("--workers", opt.workers, "override pbs.workers")->check(CLI::PositiveNumber);
    sub->add_option("--dt-override", opt.dt, "override pbs.dt (s)")->check(CLI::PositiveNumber);
    sub->add_option("--mu", opt.mu, "use this generation rate only")->check(CLI::PositiveNumber);
    auto fn = s.fn;
    sub->callback([&action, fn] { action = fn; });
  }

  std::vector<const char*> argv{"mcharvest"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "mcharvest: " << e.what() << "\n";
    return kUsage;
  }

  try {
    return action(opt, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
}

}  // namespace mcharvest::cli
