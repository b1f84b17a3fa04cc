// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcharvest/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

namespace mcharvest {

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : InvalidArgument(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                      message),
      line_(line) {}

const char* layout_kind_name(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::None:
      return "none";
    case LayoutKind::Fibonacci:
      return "fibonacci";
    case LayoutKind::Random:
      return "random";
    case LayoutKind::Explicit:
      return "explicit";
  }
  return "?";
}

TxParams ExperimentConfig::tx_for(double mu) const {
  TxParams t = tx;
  t.generation_rate = mu;
  return t;
}

namespace {

class Section {
 public:
  Section(const YAML::Node& node, std::string path, const std::string& source,
          std::set<std::string> known)
      : node_(node), path_(std::move(path)), source_(source), known_(std::move(known)) {
    if (node_ && !node_.IsMap()) fail(node_, "section '" + path_ + "' must be a mapping");
    if (!node_) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!known_.count(key)) fail(kv.first, "unknown key '" + path_ + "." + key + "'");
    }
  }

  bool has(const std::string& key) const { return node_ && node_[key]; }
  YAML::Node raw(const std::string& key) const { return node_ ? node_[key] : YAML::Node(); }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    throw ConfigError(source_, at.Mark().is_null() ? 0 : at.Mark().line + 1, msg);
  }

  [[noreturn]] void missing(const std::string& key) const {
    throw ConfigError(source_, node_ ? node_.Mark().line + 1 : 0,
                      "missing required key '" + path_ + "." + key + "'");
  }

  double number(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, "'" + path_ + "." + key + "' must be a number");
    const auto text = n.Scalar();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || !std::isfinite(v)) {
      fail(n, "'" + path_ + "." + key + "': expected a number, got '" + text + "'");
    }
    return v;
  }

  double get_number(const std::string& key) const {
    if (!has(key)) missing(key);
    return number(node_[key], key);
  }

  double get_number(const std::string& key, double fallback) const {
    return has(key) ? number(node_[key], key) : fallback;
  }

  long long integer(const YAML::Node& n, const std::string& key) const {
    const double v = number(n, key);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) {
      fail(n, "'" + path_ + "." + key + "' must be an integer");
    }
    return static_cast<long long>(v);
  }

  long long get_integer(const std::string& key) const {
    if (!has(key)) missing(key);
    return integer(node_[key], key);
  }

  long long get_integer(const std::string& key, long long fallback) const {
    return has(key) ? integer(node_[key], key) : fallback;
  }

  int get_int(const std::string& key, long long lo) const {
    if (!has(key)) missing(key);
    return bounded(key, lo);
  }

  int get_int(const std::string& key, long long lo, int fallback) const {
    return has(key) ? bounded(key, lo) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const YAML::Node n = node_[key];
    bool v = false;
    if (!n.IsScalar() || !YAML::convert<bool>::decode(n, v)) {
      fail(n, "'" + path_ + "." + key + "' must be true or false");
    }
    return v;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const YAML::Node n = node_[key];
    if (!n.IsScalar()) fail(n, "'" + path_ + "." + key + "' must be a string");
    return n.Scalar();
  }

  std::vector<double> get_numbers(const std::string& key) const {
    if (!has(key)) missing(key);
    const YAML::Node n = node_[key];
    if (n.IsScalar()) return {number(n, key)};
    if (!n.IsSequence() || n.size() == 0) {
      fail(n, "'" + path_ + "." + key + "' must be a number or a non-empty list");
    }
    std::vector<double> out;
    for (const auto& item : n) out.push_back(number(item, key));
    return out;
  }

  const std::string& source() const { return source_; }
  const std::string& path() const { return path_; }

 private:
  int bounded(const std::string& key, long long lo) const {
    const long long v = integer(node_[key], key);
    if (v < lo || v > std::numeric_limits<int>::max()) {
      fail(node_[key], "'" + path_ + "." + key + "' must be >= " + std::to_string(lo));
    }
    return static_cast<int>(v);
  }

  YAML::Node node_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> known_;
};

// Angles accept plain numbers or multiples of pi: "pi", "pi/2", "3*pi/2", "-pi/4".
double parse_angle(const Section& sec, const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) sec.fail(n, "'" + key + "' must be an angle");
  static const std::regex pi_form(R"(^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$)");
  std::smatch m;
  const std::string text = n.Scalar();
  if (std::regex_match(text, m, pi_form)) {
    double k = 1.0;
    const std::string coef = m[1].str();
    if (coef == "-") {
      k = -1.0;
    } else if (!coef.empty() && coef != "+") {
      k = std::stod(coef);
    }
    const double den = m[2].matched ? std::stod(m[2].str()) : 1.0;
    if (den == 0.0) sec.fail(n, "'" + key + "': division by zero");
    return k * std::numbers::pi / den;
  }
  return sec.number(n, key);
}

void parse_layout(const YAML::Node& node, const std::string& source, LayoutConfig& out) {
  const Section sec(node, "layout", source,
                    {"kind", "count", "coverage", "radii", "area_ratios", "seed", "max_attempts",
                     "receptors", "capacitance"});
  const std::string kind = sec.get_string("kind", node ? "" : "none");
  if (kind == "none") {
    out.kind = LayoutKind::None;
  } else if (kind == "fibonacci") {
    out.kind = LayoutKind::Fibonacci;
    out.count = static_cast<std::size_t>(sec.get_int("count", 1));
    out.coverage = sec.get_number("coverage");
  } else if (kind == "random") {
    out.kind = LayoutKind::Random;
    if (sec.has("radii") == sec.has("area_ratios")) {
      sec.fail(node, "layout kind random needs exactly one of 'radii' or 'area_ratios'");
    }
    if (sec.has("radii")) {
      out.radii = sec.get_numbers("radii");
    } else {
      out.area_ratios = sec.get_numbers("area_ratios");
    }
    out.seed = static_cast<std::uint64_t>(sec.get_integer("seed", 42));
    out.max_attempts = static_cast<std::size_t>(sec.get_int("max_attempts", 1, 100000));
  } else if (kind == "explicit") {
    out.kind = LayoutKind::Explicit;
    if (!sec.has("receptors")) sec.missing("receptors");
    const YAML::Node list = sec.raw("receptors");
    if (!list.IsSequence() || list.size() == 0) {
      sec.fail(list, "'layout.receptors' must be a non-empty list");
    }
    for (const auto& item : list) {
      const Section r(item, "layout.receptors[]", source, {"theta", "phi", "area_ratio"});
      if (!r.has("theta")) r.missing("theta");
      if (!r.has("phi")) r.missing("phi");
      out.receptors.push_back({parse_angle(r, r.raw("theta"), "theta"),
                               parse_angle(r, r.raw("phi"), "phi"),
                               r.get_number("area_ratio")});
    }
  } else if (kind.empty()) {
    sec.missing("kind");
  } else {
    sec.fail(sec.raw("kind"), "layout.kind must be none, fibonacci, random or explicit; got '" +
                                  kind + "'");
  }

  if (sec.has("capacitance")) {
    const YAML::Node c = sec.raw("capacitance");
    const std::string text = c.IsScalar() ? c.Scalar() : std::string();
    if (text == "homogenized") {
      out.capacitance = CapacitanceMode::Homogenized;
    } else if (text == "pbs_fit") {
      out.capacitance = CapacitanceMode::PbsFit;
    } else {
      out.capacitance = CapacitanceMode::UserSupplied;
      out.capacitance_value = sec.number(c, "capacitance");
    }
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source, e.mark.is_null() ? 0 : e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) throw ConfigError(source, 0, "top level must be a mapping of sections");

  ExperimentConfig cfg;
  cfg.source = source;
  const Section top(root, "", source, {"tx", "channel", "layout", "grid", "pbs", "compare"});
  if (!top.has("tx")) throw ConfigError(source, 0, "missing required section 'tx'");
  if (!top.has("channel")) throw ConfigError(source, 0, "missing required section 'channel'");

  const Section tx(root["tx"], "tx", source, {"r_T", "D_v", "k_f", "N_v", "eta", "mu"});
  cfg.tx.radius = tx.get_number("r_T");
  cfg.tx.vesicle_diffusivity = tx.get_number("D_v");
  cfg.tx.fusion_rate = tx.get_number("k_f");
  cfg.tx.vesicle_count = tx.get_int("N_v", 1);
  cfg.tx.molecules_per_vesicle = tx.get_int("eta", 1);
  cfg.generation_rates = tx.get_numbers("mu");
  cfg.tx.generation_rate = cfg.generation_rates.front();

  const Section ch(root["channel"], "channel", source, {"D_sigma", "k_d", "r_0", "r_R"});
  cfg.channel.diffusivity = ch.get_number("D_sigma");
  cfg.channel.degradation_rate = ch.get_number("k_d");
  cfg.channel.rx_distance = ch.get_number("r_0");
  cfg.channel.rx_radius = ch.get_number("r_R");

  parse_layout(root["layout"], source, cfg.layout);

  const Section grid(root["grid"], "grid", source, {"horizon", "dt"});
  cfg.grid.horizon = grid.get_number("horizon", cfg.grid.horizon);
  cfg.grid.dt = grid.get_number("dt", cfg.grid.dt);

  const Section pbs(root["pbs"], "pbs", source,
                    {"dt", "horizon", "realizations", "seed", "sample_every", "workers",
                     "simulate_inside_tx", "simulate_outside", "receptors_active",
                     "aggregate_free_flight"});
  cfg.pbs.dt = pbs.get_number("dt", cfg.pbs.dt);
  cfg.pbs.horizon = pbs.get_number("horizon", cfg.pbs.horizon);
  cfg.pbs.realizations = pbs.get_int("realizations", 1, cfg.pbs.realizations);
  cfg.pbs.seed = static_cast<std::uint64_t>(pbs.get_integer("seed", 1));
  cfg.pbs.sample_every = pbs.get_int("sample_every", 1, cfg.pbs.sample_every);
  cfg.pbs.workers = pbs.get_int("workers", 1, cfg.pbs.workers);
  cfg.pbs.phases.simulate_inside_tx = pbs.get_bool("simulate_inside_tx", true);
  cfg.pbs.phases.simulate_outside = pbs.get_bool("simulate_outside", true);
  cfg.pbs.phases.receptors_active = pbs.get_bool("receptors_active", true);
  cfg.pbs.aggregate_free_flight = pbs.get_bool("aggregate_free_flight", true);

  const Section cmp(root["compare"], "compare", source,
                    {"z_max", "min_pass_fraction", "fit_realizations", "fit_seed",
                     "fit_max_rms"});
  cfg.compare.z_max = cmp.get_number("z_max", cfg.compare.z_max);
  cfg.compare.min_pass_fraction = cmp.get_number("min_pass_fraction", 0.95);
  cfg.compare.fit_realizations = cmp.get_int("fit_realizations", 1, 20);
  cfg.compare.fit_seed = static_cast<std::uint64_t>(cmp.get_integer("fit_seed", 977));
  cfg.compare.fit_max_rms = cmp.get_number("fit_max_rms", cfg.compare.fit_max_rms);

  // Semantic validation, reported against the section it came from.
  auto check = [&](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidArgument& e) {
      const YAML::Node n = root[section];
      throw ConfigError(source, n && !n.Mark().is_null() ? n.Mark().line + 1 : 0, e.what());
    }
  };
  check("tx", [&] {
    for (double mu : cfg.generation_rates) cfg.tx_for(mu).validate();
  });
  check("channel", [&] { validate_experiment(cfg.tx, cfg.channel); });
  check("grid", [&] {
    if (!(cfg.grid.horizon > 0.0)) throw InvalidArgument("grid.horizon must be > 0");
    if (!(cfg.grid.dt > 0.0)) throw InvalidArgument("grid.dt must be > 0");
    if (cfg.grid.dt > cfg.grid.horizon) throw InvalidArgument("grid.dt exceeds grid.horizon");
  });
  check("pbs", [&] { cfg.pbs.validate(); });
  check("compare", [&] {
    if (!(cfg.compare.z_max > 0.0)) throw InvalidArgument("compare.z_max must be > 0");
    if (!(cfg.compare.min_pass_fraction > 0.0 && cfg.compare.min_pass_fraction <= 1.0)) {
      throw InvalidArgument("compare.min_pass_fraction must lie in (0, 1]");
    }
  });
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

ReceptorLayout build_layout(const ExperimentConfig& cfg, const TxParams& tx) {
  const LayoutConfig& lc = cfg.layout;
  ReceptorLayout layout;
  switch (lc.kind) {
    case LayoutKind::None:
      return layout;
    case LayoutKind::Fibonacci:
      layout = fibonacci_layout(lc.count, lc.coverage, tx.radius);
      break;
    case LayoutKind::Random:
      if (lc.area_ratios.empty()) {
        layout = random_layout(lc.radii, tx.radius, lc.seed, lc.max_attempts);
      } else {
        std::vector<double> radii;
        for (double a : lc.area_ratios) radii.push_back(area_ratio_to_radius(a, tx.radius));
        layout = random_layout(radii, tx.radius, lc.seed, lc.max_attempts);
      }
      break;
    case LayoutKind::Explicit:
      layout = explicit_layout(lc.receptors, tx.radius);
      break;
  }
  if (lc.capacitance == CapacitanceMode::UserSupplied) {
    CapacitanceRequest req;
    req.mode = CapacitanceMode::UserSupplied;
    req.user_value = lc.capacitance_value;
    layout.capacitance = capacitance(layout, tx, req);
  }
  const LayoutReport report = validate_layout(layout, tx);
  if (!report.ok()) throw InvalidArgument("invalid layout: " + report.to_string());
  return layout;
}

ReceptorLayout resolve_capacitance(const ExperimentConfig& cfg, const TxParams& tx,
                                   ReceptorLayout layout, std::optional<CapacitanceFit>* fit) {
  if (layout.empty() || cfg.layout.capacitance != CapacitanceMode::PbsFit) return layout;
  PbsRunConfig run = cfg.pbs;
  run.realizations = cfg.compare.fit_realizations;
  run.seed = cfg.compare.fit_seed;
  CapacitanceFit result = fit_capacitance(tx, cfg.channel, layout, run, cfg.compare.fit_max_rms);
  layout.capacitance = result.capacitance;
  if (fit != nullptr) *fit = std::move(result);
  return layout;
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string capacitance_text(CapacitanceMode mode, double value) {
  switch (mode) {
    case CapacitanceMode::Homogenized:
      return "homogenized";
    case CapacitanceMode::PbsFit:
      return "pbs_fit";
    case CapacitanceMode::UserSupplied:
      break;
  }
  return num(value);
}

}  // namespace

std::string layout_to_yaml(const ReceptorLayout& layout, double tx_radius) {
  std::ostringstream os;
  os << "layout:\n";
  if (layout.empty()) {
    os << "  kind: none\n";
    return os.str();
  }
  os << "  kind: explicit\n";
  const bool homogenized =
      layout.capacitance == homogenized_capacitance(layout.receptors, tx_radius);
  os << "  capacitance: "
     << capacitance_text(homogenized ? CapacitanceMode::Homogenized : CapacitanceMode::UserSupplied,
                         layout.capacitance)
     << "\n";
  os << "  receptors:\n";
  for (const auto& s : to_specs(layout, tx_radius)) {
    os << "    - {theta: " << num(s.theta) << ", phi: " << num(s.phi)
       << ", area_ratio: " << num(s.area_ratio) << "}\n";
  }
  return os.str();
}

std::string config_to_yaml(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "tx:\n"
     << "  r_T: " << num(cfg.tx.radius) << "\n"
     << "  D_v: " << num(cfg.tx.vesicle_diffusivity) << "\n"
     << "  k_f: " << num(cfg.tx.fusion_rate) << "\n"
     << "  N_v: " << cfg.tx.vesicle_count << "\n"
     << "  eta: " << cfg.tx.molecules_per_vesicle << "\n"
     << "  mu: [";
  for (std::size_t i = 0; i < cfg.generation_rates.size(); ++i) {
    os << (i ? ", " : "") << num(cfg.generation_rates[i]);
  }
  os << "]\n"
     << "channel:\n"
     << "  D_sigma: " << num(cfg.channel.diffusivity) << "\n"
     << "  k_d: " << num(cfg.channel.degradation_rate) << "\n"
     << "  r_0: " << num(cfg.channel.rx_distance) << "\n"
     << "  r_R: " << num(cfg.channel.rx_radius) << "\n"
     << "layout:\n"
     << "  kind: " << layout_kind_name(cfg.layout.kind) << "\n";
  const LayoutConfig& lc = cfg.layout;
  if (lc.kind == LayoutKind::Fibonacci) {
    os << "  count: " << lc.count << "\n  coverage: " << num(lc.coverage) << "\n";
  } else if (lc.kind == LayoutKind::Random) {
    const bool by_area = !lc.area_ratios.empty();
    const auto& values = by_area ? lc.area_ratios : lc.radii;
    os << (by_area ? "  area_ratios: [" : "  radii: [");
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ", " : "") << num(values[i]);
    os << "]\n  seed: " << lc.seed << "\n  max_attempts: " << lc.max_attempts << "\n";
  } else if (lc.kind == LayoutKind::Explicit) {
    os << "  receptors:\n";
    for (const auto& r : lc.receptors) {
      os << "    - {theta: " << num(r.theta) << ", phi: " << num(r.phi)
         << ", area_ratio: " << num(r.area_ratio) << "}\n";
    }
  }
  if (lc.kind != LayoutKind::None) {
    os << "  capacitance: " << capacitance_text(lc.capacitance, lc.capacitance_value) << "\n";
  }
  os << "grid:\n"
     << "  horizon: " << num(cfg.grid.horizon) << "\n"
     << "  dt: " << num(cfg.grid.dt) << "\n"
     << "pbs:\n"
     << "  dt: " << num(cfg.pbs.dt) << "\n"
     << "  horizon: " << num(cfg.pbs.horizon) << "\n"
     << "  realizations: " << cfg.pbs.realizations << "\n"
     << "  seed: " << cfg.pbs.seed << "\n"
     << "  sample_every: " << cfg.pbs.sample_every << "\n"
     << "  workers: " << cfg.pbs.workers << "\n"
     << std::boolalpha << "  simulate_inside_tx: " << cfg.pbs.phases.simulate_inside_tx << "\n"
     << "  simulate_outside: " << cfg.pbs.phases.simulate_outside << "\n"
     << "  receptors_active: " << cfg.pbs.phases.receptors_active << "\n"
     << "  aggregate_free_flight: " << cfg.pbs.aggregate_free_flight << "\n"
     << "compare:\n"
     << "  z_max: " << num(cfg.compare.z_max) << "\n"
     << "  min_pass_fraction: " << num(cfg.compare.min_pass_fraction) << "\n"
     << "  fit_realizations: " << cfg.compare.fit_realizations << "\n"
     << "  fit_seed: " << cfg.compare.fit_seed << "\n"
     << "  fit_max_rms: " << num(cfg.compare.fit_max_rms) << "\n";
  return os.str();
}

}  // namespace mcharvest
