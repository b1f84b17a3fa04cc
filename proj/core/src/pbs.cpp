// Copyright 2026 The mcharvest Authors
// SPDX-License-Identifier: Apache-2.0

#include "mcharvest/pbs.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/tools/minima.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <string>
#include <thread>

#include "mcharvest/error.hpp"
#include "mcharvest/harvest.hpp"

namespace mcharvest {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) {
    x += kGolden;
    word = mix64(x);
  }
}

Xoshiro256pp::result_type Xoshiro256pp::operator()() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

Xoshiro256pp stream_engine(std::uint64_t seed, std::uint64_t stream) {
  return Xoshiro256pp(mix64(seed ^ mix64(stream + 1)));
}

void PbsRunConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("pbs.dt must be > 0");
  if (!(horizon >= dt)) throw InvalidArgument("pbs.horizon must be >= pbs.dt");
  if (realizations < 1) throw InvalidArgument("pbs.realizations must be >= 1");
  if (sample_every < 1) throw InvalidArgument("pbs.sample_every must be >= 1");
  if (workers < 1) throw InvalidArgument("pbs.workers must be >= 1");
  if (horizon / dt > 4.0e12) throw InvalidArgument("pbs: horizon / dt too large");
}

double fusion_probability(const TxParams& tx, double dt) {
  return tx.fusion_rate * std::sqrt(std::numbers::pi * dt / tx.vesicle_diffusivity);
}

std::vector<double> draw_vesicle_birth_times(double generation_rate, int count,
                                             Xoshiro256pp& engine) {
  boost::random::exponential_distribution<double> interarrival(generation_rate);
  std::vector<double> births(static_cast<std::size_t>(std::max(count, 0)));
  double t = 0.0;
  for (std::size_t i = 0; i < births.size(); ++i) {
    if (i > 0) t += interarrival(engine);
    births[i] = t;
  }
  return births;
}

namespace {

using Step = std::int64_t;

// Paths are aggregated only while the endpoint lies this many per-axis
// standard deviations away from the membrane.
constexpr double kSafetySigmas = 9.0;

struct Tally {
  std::vector<std::int64_t> fusions;
  std::vector<std::int64_t> released;  // event counts per bin, summed later
  std::vector<std::int64_t> absorbed;
  std::vector<std::int64_t> degraded;
  std::vector<std::int64_t> in_flight;  // state at t_k
  std::vector<std::int64_t> rx;         // state at t_k

  explicit Tally(std::size_t n)
      : fusions(n), released(n), absorbed(n), degraded(n), in_flight(n), rx(n) {}
};

struct Spawn {
  Step step;
  Vec3 position;
};

class Realization {
 public:
  Realization(const TxParams& tx, const ChannelParams& ch, const ReceptorLayout& layout,
              const PbsRunConfig& cfg, Xoshiro256pp engine)
      : tx_(tx), ch_(ch), cfg_(cfg), engine_(engine) {
    radius_ = tx.radius;
    total_steps_ = static_cast<Step>(std::llround(cfg.horizon / cfg.dt));
    sample_every_ = cfg.sample_every;
    samples_ = static_cast<std::size_t>(total_steps_ / sample_every_) + 1;
    total_steps_ = static_cast<Step>(samples_ - 1) * sample_every_;
    sigma_vesicle_ = std::sqrt(2.0 * tx.vesicle_diffusivity * cfg.dt);
    sigma_molecule_ = std::sqrt(2.0 * ch.diffusivity * cfg.dt);
    p_fuse_ = fusion_probability(tx, cfg.dt);
    rx_center_ = {ch.rx_distance, 0.0, 0.0};
    rx_r2_ = ch.rx_radius * ch.rx_radius;
    if (cfg.phases.receptors_active) {
      for (const auto& r : layout.receptors) {
        receptor_centers_.push_back(r.center(radius_));
        receptor_r2_.push_back(r.radius * r.radius);
      }
    }
  }

  std::size_t samples() const { return samples_; }

  Tally run() {
    Tally tally(samples_);
    std::vector<Spawn> spawns;
    if (cfg_.phases.simulate_inside_tx) {
      spawns = run_vesicles(tally);
    } else {
      spawns = impulsive_surface_release();
    }
    const int per_spawn = cfg_.phases.simulate_inside_tx ? tx_.molecules_per_vesicle : 1;
    for (const auto& sp : spawns) {
      tally.released[bin_of(sp.step)] += per_spawn;
      if (!cfg_.phases.simulate_outside) continue;
      for (int j = 0; j < per_spawn; ++j) run_molecule(sp, tally);
    }
    if (!cfg_.phases.simulate_outside) {
      // Molecules stay where they were released.
      std::int64_t acc = 0;
      for (std::size_t k = 0; k < samples_; ++k) {
        acc += tally.released[k];
        tally.in_flight[k] = acc;
      }
    }
    return tally;
  }

 private:
  std::size_t bin_of(Step step) const {
    // First sample index whose time is >= the event step.
    return static_cast<std::size_t>((step + sample_every_ - 1) / sample_every_);
  }

  Vec3 gaussian(double sigma) {
    return {normal_(engine_) * sigma, normal_(engine_) * sigma, normal_(engine_) * sigma};
  }

  Step safe_steps(double gap, double sigma) const {
    if (!cfg_.aggregate_free_flight || gap <= 0.0) return 1;
    const double m = gap / (kSafetySigmas * sigma);
    const double steps = std::floor(m * m);
    if (steps < 1.0) return 1;
    return steps > 1e15 ? Step{1000000000000000} : static_cast<Step>(steps);
  }

  Vec3 on_sphere(Vec3 p) const { return p * (radius_ / p.norm()); }

  std::vector<Spawn> run_vesicles(Tally& tally) {
    const auto births = draw_vesicle_birth_times(tx_.generation_rate, tx_.vesicle_count, engine_);
    std::vector<Spawn> spawns;
    spawns.reserve(births.size());
    const double r2 = radius_ * radius_;
    for (double birth : births) {
      Step s = static_cast<Step>(std::floor(birth / cfg_.dt));
      Vec3 p{};
      while (s < total_steps_) {
        const double gap = radius_ - p.norm();
        const Step m = std::min(safe_steps(gap, sigma_vesicle_), total_steps_ - s);
        const Vec3 from = p;
        p = p + gaussian(sigma_vesicle_ * std::sqrt(static_cast<double>(m)));
        s += m;
        const double d2 = p.norm2();
        if (!std::isfinite(d2)) throw NumericalError("pbs: non-finite vesicle position");
        if (d2 < r2) continue;
        if (uniform_(engine_) < p_fuse_) {
          const Vec3 hit = exit_point(from, p);
          tally.fusions[bin_of(s)] += 1;
          spawns.push_back({s, hit});
          break;
        }
        const double d = std::sqrt(d2);
        p = p * (std::abs(2.0 * radius_ - d) / d);
      }
    }
    return spawns;
  }

  std::vector<Spawn> impulsive_surface_release() {
    const auto total = static_cast<std::size_t>(tx_.vesicle_count) *
                       static_cast<std::size_t>(tx_.molecules_per_vesicle);
    std::vector<Spawn> spawns;
    spawns.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
      const double cos_t = 2.0 * uniform_(engine_) - 1.0;
      const double phi = 2.0 * std::numbers::pi * uniform_(engine_);
      const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
      spawns.push_back(
          {0, Vec3{sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t} * radius_});
    }
    return spawns;
  }

  // Point where the segment from `inside` (|inside| < R) to `outside` leaves the sphere.
  Vec3 exit_point(Vec3 inside, Vec3 outside) const {
    const Vec3 g = outside - inside;
    const double a = g.norm2();
    const double b = 2.0 * inside.dot(g);
    const double c = inside.norm2() - radius_ * radius_;
    const double disc = std::max(b * b - 4.0 * a * c, 0.0);
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    double u = 1.0;
    if (a > 0.0) {
      const double r1 = q / a;
      const double r2 = q != 0.0 ? c / q : r1;
      u = std::clamp(std::max(r1, r2), 0.0, 1.0);
    }
    return on_sphere(inside + g * u);
  }

  // First point where the segment from `outside` (|outside| >= R) to `end`
  // touches the sphere, if any.
  bool entry_point(Vec3 outside, Vec3 end, Vec3& hit) const {
    const Vec3 g = end - outside;
    const double r2 = radius_ * radius_;
    const double c = outside.norm2() - r2;
    const bool ends_inside = end.norm2() < r2;
    if (c <= 0.0) {
      if (!ends_inside) return false;
      hit = on_sphere(outside);
      return true;
    }
    const double a = g.norm2();
    const double b = 2.0 * outside.dot(g);
    if (!ends_inside && b >= 0.0) return false;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
      if (!ends_inside) return false;
      hit = on_sphere(end);
      return true;
    }
    // Smaller root, in the cancellation-free form 2c / (−b + √disc).
    const double u = 2.0 * c / (-b + std::sqrt(disc));
    if (u > 1.0 && !ends_inside) return false;
    hit = on_sphere(outside + g * std::clamp(u, 0.0, 1.0));
    return true;
  }

  bool absorbed_at(Vec3 x) const {
    for (std::size_t i = 0; i < receptor_centers_.size(); ++i) {
      if ((x - receptor_centers_[i]).norm2() <= receptor_r2_[i]) return true;
    }
    return false;
  }

  void run_molecule(const Spawn& sp, Tally& tally) {
    // Per-step survival e^{−k_d dt}: the number of completed steps before
    // degradation is geometric, floor(E / (k_d dt)) with E ~ Exp(1).
    Step degrade_step = total_steps_ + 1;
    if (ch_.degradation_rate > 0.0) {
      const double survived = std::floor(exp1_(engine_) / (ch_.degradation_rate * cfg_.dt));
      if (survived < static_cast<double>(total_steps_)) {
        degrade_step = sp.step + static_cast<Step>(survived) + 1;
      }
    }
    Step s = sp.step;
    Vec3 p = sp.position;
    Step next_sample = static_cast<Step>(bin_of(s)) * sample_every_;
    const double r2 = radius_ * radius_;
    for (;;) {
      if (s == next_sample) {
        const std::size_t k = static_cast<std::size_t>(s / sample_every_);
        tally.in_flight[k] += 1;
        if ((p - rx_center_).norm2() <= rx_r2_) tally.rx[k] += 1;
        next_sample += sample_every_;
      }
      if (s >= total_steps_) return;
      if (s + 1 == degrade_step) {
        tally.degraded[bin_of(degrade_step)] += 1;
        return;
      }
      const double gap = p.norm() - radius_;
      Step m = safe_steps(gap, sigma_molecule_);
      m = std::min({m, next_sample - s, degrade_step - 1 - s, total_steps_ - s});
      const Vec3 from = p;
      p = p + gaussian(sigma_molecule_ * std::sqrt(static_cast<double>(m)));
      s += m;
      if (!std::isfinite(p.x + p.y + p.z)) throw NumericalError("pbs: non-finite molecule position");

      Vec3 hit;
      if (!entry_point(from, p, hit)) continue;
      if (absorbed_at(hit)) {
        tally.absorbed[bin_of(s)] += 1;
        return;
      }
      const double d2 = p.norm2();
      if (d2 < r2) {
        const double d = std::sqrt(d2);
        p = d > 0.0 ? p * ((2.0 * radius_ - d) / d) : hit * 2.0;
      }
    }
  }

  const TxParams& tx_;
  const ChannelParams& ch_;
  const PbsRunConfig& cfg_;
  Xoshiro256pp engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
  boost::random::uniform_01<double> uniform_;
  boost::random::exponential_distribution<double> exp1_{1.0};

  double radius_{0.0};
  Step total_steps_{0};
  Step sample_every_{1};
  std::size_t samples_{0};
  double sigma_vesicle_{0.0};
  double sigma_molecule_{0.0};
  double p_fuse_{0.0};
  Vec3 rx_center_{};
  double rx_r2_{0.0};
  std::vector<Vec3> receptor_centers_;
  std::vector<double> receptor_r2_;
};

void to_cumulative(std::vector<std::int64_t>& v) {
  std::int64_t acc = 0;
  for (auto& x : v) {
    acc += x;
    x = acc;
  }
}

void check_conservation(const Tally& t) {
  for (std::size_t k = 0; k < t.released.size(); ++k) {
    if (t.released[k] != t.in_flight[k] + t.absorbed[k] + t.degraded[k]) {
      throw NumericalError("pbs: molecule conservation violated at sample " + std::to_string(k));
    }
  }
}

class SeriesAccumulator {
 public:
  explicit SeriesAccumulator(std::size_t n) : sum_(n, 0.0), sum_sq_(n, 0.0) {}

  void add(const std::vector<std::int64_t>& v) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      const auto x = static_cast<double>(v[k]);
      sum_[k] += x;
      sum_sq_[k] += x * x;
    }
  }

  PbsSeries finish(int count) const {
    PbsSeries s{std::vector<double>(sum_.size()), std::vector<double>(sum_.size())};
    const double n = count;
    for (std::size_t k = 0; k < sum_.size(); ++k) {
      const double mean = sum_[k] / n;
      s.mean[k] = mean;
      if (count > 1) {
        const double var = std::max(0.0, (sum_sq_[k] - n * mean * mean) / (n - 1.0));
        s.se[k] = std::sqrt(var / n);
      }
    }
    return s;
  }

 private:
  std::vector<double> sum_;
  std::vector<double> sum_sq_;
};

}  // namespace

PbsResult simulate(const TxParams& tx, const ChannelParams& ch, const ReceptorLayout& layout,
                   const PbsRunConfig& cfg) {
  validate_experiment(tx, ch);
  cfg.validate();
  const double p_fuse = fusion_probability(tx, cfg.dt);
  if (cfg.phases.simulate_inside_tx && p_fuse > 1.0) {
    throw InvalidArgument("pbs: fusion probability k_f*sqrt(pi*dt/D_v) = " +
                          std::to_string(tx.fusion_rate) + "*sqrt(pi*" + std::to_string(cfg.dt) +
                          "/" + std::to_string(tx.vesicle_diffusivity) + ") = " +
                          std::to_string(p_fuse) + " exceeds 1; reduce dt");
  }
  if (cfg.phases.receptors_active && !layout.empty()) {
    const LayoutReport report = validate_layout(layout, tx);
    if (!report.ok()) throw InvalidArgument("pbs: " + report.to_string());
  }

  const auto n_real = static_cast<std::size_t>(cfg.realizations);
  std::vector<Tally> tallies;
  tallies.reserve(n_real);
  std::size_t samples = 0;
  {
    Realization probe(tx, ch, layout, cfg, Xoshiro256pp(0));
    samples = probe.samples();
  }
  for (std::size_t r = 0; r < n_real; ++r) tallies.emplace_back(samples);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= n_real) return;
      try {
        Realization real(tx, ch, layout, cfg, stream_engine(cfg.seed, r));
        Tally t = real.run();
        to_cumulative(t.released);
        to_cumulative(t.absorbed);
        to_cumulative(t.degraded);
        if (cfg.phases.simulate_outside) check_conservation(t);
        tallies[r] = std::move(t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_real);
        return;
      }
    }
  };
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), n_real);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Reduce in realization order so the result does not depend on scheduling.
  SeriesAccumulator fus(samples), rel(samples), abs_(samples), deg(samples), fly(samples),
      rx(samples);
  for (const auto& t : tallies) {
    fus.add(t.fusions);
    rel.add(t.released);
    abs_.add(t.absorbed);
    deg.add(t.degraded);
    fly.add(t.in_flight);
    rx.add(t.rx);
  }
  PbsResult out;
  out.bin_width = cfg.bin_width();
  out.time.resize(samples);
  for (std::size_t k = 0; k < samples; ++k) out.time[k] = static_cast<double>(k) * out.bin_width;
  out.realizations = cfg.realizations;
  out.vesicles = tx.vesicle_count;
  out.molecules_per_vesicle = tx.molecules_per_vesicle;
  out.fusion_counts = fus.finish(cfg.realizations);
  out.released_cumulative = rel.finish(cfg.realizations);
  out.absorbed_cumulative = abs_.finish(cfg.realizations);
  out.degraded_cumulative = deg.finish(cfg.realizations);
  out.in_flight = fly.finish(cfg.realizations);
  out.rx_occupancy = rx.finish(cfg.realizations);
  return out;
}

CapacitanceFit fit_capacitance(const TxParams& tx, const ChannelParams& ch,
                               const ReceptorLayout& layout, const PbsRunConfig& cfg,
                               double max_rms) {
  if (layout.empty()) throw InvalidArgument("fit_capacitance: layout has no receptors");
  PbsRunConfig run = cfg;
  run.phases = PbsPhases{false, true, true};
  const PbsResult res = simulate(tx, ch, layout, run);

  CapacitanceFit fit;
  const double total = tx.total_molecules();
  for (std::size_t k = 1; k < res.samples(); ++k) {
    fit.time.push_back(res.time[k]);
    fit.absorbed_fraction.push_back(res.absorbed_cumulative.mean[k] / total);
  }
  fit.samples = fit.time.size();
  if (fit.samples == 0) throw InvalidArgument("fit_capacitance: horizon shorter than one sample");

  auto cost = [&](double g) {
    const HarvestModel model(tx, ch, g);
    double acc = 0.0;
    for (std::size_t i = 0; i < fit.samples; ++i) {
      const double r = model.harvest_fraction_impulse(fit.time[i]) - fit.absorbed_fraction[i];
      acc += r * r;
    }
    return acc;
  };
  const double lo = 1e-9 * tx.radius;
  const double hi = (1.0 - 1e-9) * tx.radius;
  const auto best = boost::math::tools::brent_find_minima(cost, lo, hi, 40);
  fit.capacitance = best.first;
  fit.rms_residual = std::sqrt(best.second / static_cast<double>(fit.samples));
  if (!(fit.rms_residual <= max_rms)) {
    throw NumericalError("fit_capacitance: RMS residual " + std::to_string(fit.rms_residual) +
                         " exceeds " + std::to_string(max_rms));
  }
  return fit;
}

void write_pbs_csv(std::ostream& out, const PbsResult& r) {
  const auto old_precision = out.precision(17);
  out << "t,fusion_rate,fusion_rate_se,absorbed,absorbed_se,rx_count,rx_count_se,degraded,"
         "degraded_se\n";
  const double per_rate = 1.0 / (static_cast<double>(r.vesicles) * r.bin_width);
  for (std::size_t k = 0; k < r.samples(); ++k) {
    out << r.time[k] << ',' << r.fusion_counts.mean[k] * per_rate << ','
        << r.fusion_counts.se[k] * per_rate << ',' << r.absorbed_cumulative.mean[k] << ','
        << r.absorbed_cumulative.se[k] << ',' << r.rx_occupancy.mean[k] << ','
        << r.rx_occupancy.se[k] << ',' << r.degraded_cumulative.mean[k] << ','
        << r.degraded_cumulative.se[k] << '\n';
  }
  out.precision(old_precision);
}

}  // namespace mcharvest
