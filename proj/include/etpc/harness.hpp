#pragma once

#include "etpc/simulator.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace etpc {

/// A batch of closed-loop runs: every (mode, T, p) combination from every
/// sampled initial condition.
struct ExperimentSpec {
  PlantModel plant = preset_lorenz();
  std::vector<ControllerMode> modes{ControllerMode::kEtpcStatic};
  std::vector<double> horizons{0.4, 0.6, 0.8};
  std::vector<int> degrees{3, 4, 5};
  int initial_conditions = 100;
  double radius = 1.0;
  std::size_t events_cap = 100;
  std::uint64_t seed = 1;
  double sigma = 0.4;
  double r = 0.25;
  DynamicEtrConfig dynamic;
  /// Template for every run; mode and max_events are overwritten per run.
  SimConfig sim{ControllerMode::kEtpcStatic, 1e-3, 201, 30.0, 1e-9, 0.0, 0, false};
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;

  void validate() const;
  /// Canonical text of every field that influences results.
  std::string canonical() const;
  /// FNV-1a of canonical(), as 16 hex digits.
  std::string hash() const;
};

struct RunRecord {
  ControllerMode mode = ControllerMode::kEtpcStatic;
  double horizon = 0.0;
  int degree = 0;
  int index = 0;
  Vec x0;
  double aiet = 0.0;
  double miet = 0.0;
  std::size_t gaps = 0;
  bool truncated = false;
  // Runtime invariants of the run (see TrajectoryLog).
  double level_excess = -std::numeric_limits<double>::infinity();
  double tol_event = 0.0;
  std::size_t band_violations = 0;
  bool failed = false;
  std::string error;
  double wall_seconds = 0.0;
};

struct MetricsRow {
  ControllerMode mode = ControllerMode::kEtpcStatic;
  double horizon = 0.0;
  int degree = 0;
  double aiet = 0.0;  // mean over runs of per-run AIET
  double miet = 0.0;  // min over runs of per-run MIET
  std::size_t runs_used = 0;       // runs with >= 2 events
  std::size_t runs_truncated = 0;  // used runs that ended at t_max before the cap
  std::size_t runs_insufficient = 0;
  std::size_t runs_failed = 0;     // aborted with an error
  std::size_t events_counted = 0;  // gaps over used runs
};

struct SweepResult {
  std::string spec_hash;
  std::vector<MetricsRow> rows;
  std::vector<RunRecord> runs;

  const MetricsRow& row(ControllerMode mode, double horizon, int degree) const;
};

/// Points uniform on the sphere of the given radius (normalized Gaussians),
/// deterministic in the seed.
std::vector<Vec> sample_unit_sphere(int dim, int count, double radius, std::uint64_t seed);

struct IetStats {
  double aiet = 0.0;
  double miet = 0.0;
  std::size_t gaps = 0;
};

/// Mean and minimum of the first min(max_events, available) inter-event
/// gaps. Throws InsufficientEventsError with fewer than two events.
IetStats iet_stats(std::span<const double> event_times, std::size_t max_events);
IetStats iet_stats(const TrajectoryLog& log, std::size_t max_events);

/// Runs every combination and reduces per (mode, T, p). Individual run
/// failures are recorded on their row and do not stop the sweep.
SweepResult sweep(const ExperimentSpec& spec);

/// Disturbance-free comparison of hold-based dynamic triggering against the
/// static and dynamic parameterized controllers, at the spec's first T and p.
SweepResult compare_methods(ExperimentSpec spec);

/// mode,T,p,AIET,MIET,runs_used,runs_truncated,runs_insufficient,runs_failed,events
void write_table_csv(std::ostream& out, const SweepResult& result);
/// Pivot with one row per (mode, p) and AIET/MIET column pairs per T.
void write_sweep_layout_csv(std::ostream& out, const SweepResult& result);
/// Rows AIET and MIET, one column per mode.
void write_compare_layout_csv(std::ostream& out, const SweepResult& result);
/// One JSON record per run, without timing.
void write_runs_jsonl(std::ostream& out, const SweepResult& result);
/// Per-run wall time; the only non-reproducible output.
void write_timing_csv(std::ostream& out, const SweepResult& result);

}  // namespace etpc
