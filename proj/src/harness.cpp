#include "etpc/harness.hpp"

#include "etpc/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace etpc {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_powerlaw(std::ostream& out, const char* name, const PowerLaw& f) {
  out << name << '=' << fmt_double(f.coeff()) << ',' << fmt_double(f.exponent()) << ';';
}

}  // namespace

void ExperimentSpec::validate() const {
  if (modes.empty() || horizons.empty() || degrees.empty())
    throw DomainError("experiment needs at least one mode, horizon and degree");
  if (initial_conditions < 1) throw DomainError("initial condition count must be positive");
  if (!(radius > 0.0)) throw DomainError("sampling radius must be positive");
  if (events_cap < 1) throw DomainError("events cap must be positive");
  sim.validate();
}

std::string ExperimentSpec::canonical() const {
  std::ostringstream out;
  out << "plant=" << plant.name << ';';
  write_powerlaw(out, "alpha1", plant.certificate.alpha1);
  write_powerlaw(out, "alpha2", plant.certificate.alpha2);
  write_powerlaw(out, "alpha3", plant.certificate.alpha3);
  write_powerlaw(out, "rho1", plant.certificate.rho1);
  write_powerlaw(out, "rho2", plant.certificate.rho2);
  out << "D=" << fmt_double(plant.disturbance_bound) << ';';
  for (const auto& ch : plant.disturbance.channels) {
    out << "d=";
    for (const auto& s : ch) out << fmt_double(s.amplitude) << ':' << fmt_double(s.frequency) << ' ';
    out << ';';
  }
  out << "modes=";
  for (auto m : modes) out << to_string(m) << ' ';
  out << ";T=";
  for (double t : horizons) out << fmt_double(t) << ' ';
  out << ";p=";
  for (int p : degrees) out << p << ' ';
  out << ";ic=" << initial_conditions << ";radius=" << fmt_double(radius)
      << ";cap=" << events_cap << ";seed=" << seed << ";sigma=" << fmt_double(sigma)
      << ";r=" << fmt_double(r) << ";theta=" << fmt_double(dynamic.theta)
      << ";nu0=" << fmt_double(dynamic.nu0) << ';';
  write_powerlaw(out, "omega", dynamic.omega);
  out << "step=" << fmt_double(sim.step) << ";samples=" << sim.rollout_samples
      << ";t_max=" << fmt_double(sim.t_max) << ";tol=" << fmt_double(sim.event_tolerance)
      << ";refresh=" << fmt_double(sim.refresh_horizon);
  return out.str();
}

std::string ExperimentSpec::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const MetricsRow& SweepResult::row(ControllerMode mode, double horizon, int degree) const {
  for (const auto& r : rows)
    if (r.mode == mode && r.horizon == horizon && r.degree == degree) return r;
  throw DomainError("no metrics row for the requested combination");
}

std::vector<Vec> sample_unit_sphere(int dim, int count, double radius, std::uint64_t seed) {
  if (dim < 1) throw DomainError("sphere dimension must be positive");
  if (count < 1) throw DomainError("sample count must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(std::size_t(count));
  while (int(out.size()) < count) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    const double norm = v.norm();
    if (norm < 1e-12) continue;
    out.push_back(v * (radius / norm));
  }
  return out;
}

IetStats iet_stats(std::span<const double> event_times, std::size_t max_events) {
  if (event_times.size() < 2) throw InsufficientEventsError("need at least two events");
  if (max_events < 1) throw DomainError("max_events must be positive");
  const std::size_t gaps = std::min(max_events, event_times.size() - 1);
  IetStats s;
  s.gaps = gaps;
  s.miet = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t k = 0; k < gaps; ++k) {
    const double gap = event_times[k + 1] - event_times[k];
    sum += gap;
    s.miet = std::min(s.miet, gap);
  }
  s.aiet = sum / double(gaps);
  return s;
}

IetStats iet_stats(const TrajectoryLog& log, std::size_t max_events) {
  const auto times = log.event_times();
  return iet_stats(times, max_events);
}

namespace {

struct Job {
  std::size_t row;
  int ic;
};

template <class Fn>
void run_parallel(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

SweepResult sweep(const ExperimentSpec& spec) {
  spec.validate();
  SweepResult result;
  result.spec_hash = spec.hash();
  const auto x0s = sample_unit_sphere(spec.plant.n, spec.initial_conditions, spec.radius, spec.seed);
  const StaticEtrConfig trigger = StaticEtrConfig::make(spec.plant, spec.sigma, spec.r);

  struct Combo {
    ControllerMode mode;
    double horizon;
    int degree;
    std::shared_ptr<const BasisSet> basis;
    std::string basis_error;
  };
  std::vector<Combo> combos;
  for (auto mode : spec.modes)
    for (double horizon : spec.horizons)
      for (int degree : spec.degrees) {
        Combo c{mode, horizon, degree, nullptr, {}};
        try {
          c.basis = std::make_shared<const BasisSet>(BasisSet::monomial(degree, horizon));
        } catch (const Error& err) {
          c.basis_error = err.what();
        }
        combos.push_back(std::move(c));
      }

  const std::size_t per_row = x0s.size();
  result.runs.resize(combos.size() * per_row);
  run_parallel(result.runs.size(), spec.threads, [&](std::size_t job) {
    const auto& combo = combos[job / per_row];
    const int ic = static_cast<int>(job % per_row);
    RunRecord& rec = result.runs[job];
    rec.mode = combo.mode;
    rec.horizon = combo.horizon;
    rec.degree = combo.degree;
    rec.index = ic;
    rec.x0 = x0s[std::size_t(ic)];
    if (!combo.basis) {
      rec.failed = true;
      rec.error = combo.basis_error;
      return;
    }
    SimConfig sim = spec.sim;
    sim.mode = combo.mode;
    sim.max_events = spec.events_cap;
    sim.record_samples = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      const TrajectoryLog log =
          run_closed_loop(spec.plant, *combo.basis, sim, trigger, spec.dynamic, rec.x0);
      rec.truncated = log.truncated;
      rec.level_excess = log.level_excess;
      rec.tol_event = log.tol_event;
      rec.band_violations = log.band_violations;
      if (log.events.size() >= 2) {
        const IetStats s = iet_stats(log, spec.events_cap);
        rec.aiet = s.aiet;
        rec.miet = s.miet;
        rec.gaps = s.gaps;
      }
    } catch (const Error& err) {
      rec.failed = true;
      rec.error = err.what();
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  for (std::size_t c = 0; c < combos.size(); ++c) {
    MetricsRow row;
    row.mode = combos[c].mode;
    row.horizon = combos[c].horizon;
    row.degree = combos[c].degree;
    row.miet = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t k = 0; k < per_row; ++k) {
      const RunRecord& rec = result.runs[c * per_row + k];
      if (rec.failed) {
        ++row.runs_failed;
      } else if (rec.gaps == 0) {
        ++row.runs_insufficient;
      } else {
        ++row.runs_used;
        if (rec.truncated) ++row.runs_truncated;
        row.events_counted += rec.gaps;
        sum += rec.aiet;
        row.miet = std::min(row.miet, rec.miet);
      }
    }
    if (row.runs_used > 0) {
      row.aiet = sum / double(row.runs_used);
    } else {
      row.aiet = std::numeric_limits<double>::quiet_NaN();
      row.miet = std::numeric_limits<double>::quiet_NaN();
    }
    result.rows.push_back(row);
  }
  return result;
}

SweepResult compare_methods(ExperimentSpec spec) {
  spec.plant = spec.plant.without_disturbance();
  spec.modes = {ControllerMode::kZohDynamic, ControllerMode::kEtpcStatic,
                ControllerMode::kEtpcDynamic};
  spec.horizons.resize(1);
  spec.degrees.resize(1);
  return sweep(spec);
}

void write_table_csv(std::ostream& out, const SweepResult& result) {
  out << "mode,T,p,AIET,MIET,runs_used,runs_truncated,runs_insufficient,runs_failed,events\n";
  for (const auto& r : result.rows) {
    out << to_string(r.mode) << ',' << fmt_double(r.horizon) << ',' << r.degree << ','
        << fmt_double(r.aiet) << ',' << fmt_double(r.miet) << ',' << r.runs_used << ','
        << r.runs_truncated << ',' << r.runs_insufficient << ',' << r.runs_failed << ','
        << r.events_counted << '\n';
  }
}

void write_sweep_layout_csv(std::ostream& out, const SweepResult& result) {
  std::vector<double> horizons;
  for (const auto& r : result.rows)
    if (std::find(horizons.begin(), horizons.end(), r.horizon) == horizons.end())
      horizons.push_back(r.horizon);
  out << "mode,p";
  for (double t : horizons) out << ",AIET(T=" << fmt_double(t) << "),MIET(T=" << fmt_double(t) << ')';
  out << '\n';
  std::vector<std::pair<ControllerMode, int>> keys;
  for (const auto& r : result.rows) {
    const auto key = std::make_pair(r.mode, r.degree);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [mode, degree] : keys) {
    out << to_string(mode) << ',' << degree;
    for (double t : horizons) {
      const auto& r = result.row(mode, t, degree);
      out << ',' << fmt_double(r.aiet) << ',' << fmt_double(r.miet);
    }
    out << '\n';
  }
}

void write_compare_layout_csv(std::ostream& out, const SweepResult& result) {
  auto label = [](ControllerMode m) -> std::string {
    switch (m) {
      case ControllerMode::kZohDynamic: return "DETC-ZOH";
      case ControllerMode::kZohStatic: return "ETC-ZOH";
      case ControllerMode::kEtpcStatic: return "ETPC-static";
      case ControllerMode::kEtpcDynamic: return "ETPC-dynamic";
    }
    return "";
  };
  out << "metric";
  for (const auto& r : result.rows) out << ',' << label(r.mode);
  out << "\nAIET";
  for (const auto& r : result.rows) out << ',' << fmt_double(r.aiet);
  out << "\nMIET";
  for (const auto& r : result.rows) out << ',' << fmt_double(r.miet);
  out << '\n';
}

void write_runs_jsonl(std::ostream& out, const SweepResult& result) {
  for (const auto& rec : result.runs) {
    nlohmann::json j;
    j["spec_hash"] = result.spec_hash;
    j["mode"] = std::string(to_string(rec.mode));
    j["T"] = rec.horizon;
    j["p"] = rec.degree;
    j["run"] = rec.index;
    j["x0"] = std::vector<double>(rec.x0.data(), rec.x0.data() + rec.x0.size());
    if (rec.gaps > 0) {
      j["AIET"] = rec.aiet;
      j["MIET"] = rec.miet;
    } else {
      j["AIET"] = nullptr;
      j["MIET"] = nullptr;
    }
    j["events"] = rec.gaps;
    j["truncated"] = rec.truncated;
    if (std::isfinite(rec.level_excess)) j["level_excess"] = rec.level_excess;
    j["tol_event"] = rec.tol_event;
    j["band_violations"] = rec.band_violations;
    j["failed"] = rec.failed;
    if (rec.failed) j["error"] = rec.error;
    out << j.dump() << '\n';
  }
}

void write_timing_csv(std::ostream& out, const SweepResult& result) {
  out << "spec_hash,mode,T,p,run,wall_seconds\n";
  for (const auto& rec : result.runs) {
    out << result.spec_hash << ',' << to_string(rec.mode) << ',' << fmt_double(rec.horizon) << ','
        << rec.degree << ',' << rec.index << ',' << rec.wall_seconds << '\n';
  }
}

}  // namespace etpc
