#pragma once

#include "etpc/basis.hpp"
#include "etpc/plant.hpp"
#include "etpc/qpfit.hpp"
#include "etpc/trigger.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace etpc {

enum class ControllerMode { kEtpcStatic, kEtpcDynamic, kZohStatic, kZohDynamic };

std::string_view to_string(ControllerMode mode);
/// Accepts etpc_static, etpc_dynamic, zoh_static, zoh_dynamic.
ControllerMode parse_mode(std::string_view text);
bool is_parameterized(ControllerMode mode);
bool is_dynamic(ControllerMode mode);

struct SimConfig {
  ControllerMode mode = ControllerMode::kEtpcStatic;
  double step = 1e-3;
  int rollout_samples = 201;
  double t_max = 10.0;
  double event_tolerance = 1e-9;
  /// Forces an event once a segment has been applied this long; 0 disables.
  double refresh_horizon = 0.0;
  /// Stop after this many inter-event gaps; 0 means no cap.
  std::size_t max_events = 0;
  /// Keep the dense sample table. Event records are always kept.
  bool record_samples = true;

  void validate() const;
};

/// u(t_k + tau) = a(k)' phi(tau), valid for every tau >= 0 the basis accepts.
class ControlSegment {
 public:
  ControlSegment(Mat coefficients, double start_time, const BasisSet& basis);

  Vec eval(double t) const;
  /// du/dt at t.
  Vec eval_rate(double t) const;

  const Mat& coefficients() const { return coefficients_; }
  double start_time() const { return start_time_; }

 private:
  Mat coefficients_;  // (p+1) x m
  double start_time_;
  const BasisSet* basis_;
};

struct ChannelFit {
  FitProblem problem;
  FitSolution solution;
  double objective = 0.0;
  double zoh_objective = 0.0;
};

struct EventUpdate {
  ControlSegment segment;
  std::vector<ChannelFit> fits;  // empty for hold modes
  double eta = 0.0;
};

/// New control segment at an event. Parameterized modes roll out the
/// disturbance-free model from `x`, fit each input channel within the band
/// eta(|x|) and stack the coefficient columns; hold modes apply gamma(x).
EventUpdate event_update(const PlantModel& plant, const BasisSet& basis,
                         const StaticEtrConfig& trigger, const SimConfig& sim, const Vec& x,
                         double t_k);

struct EventRecord {
  double time = 0.0;
  Vec state;
  Mat coefficients;
  std::vector<ActiveCase> cases;
  std::vector<double> objectives;
  double eta = 0.0;
  double lyapunov = 0.0;     // epsilon_k = V(x(t_k))
  double error_after = 0.0;  // |e(t_k+)|
  bool forced = false;       // refresh horizon, not the trigger
};

struct TrajectoryLog {
  // Dense samples. An event contributes two rows at the same time: the left
  // limit (old segment) and the right limit (new segment).
  std::vector<double> time;
  std::vector<Vec> state;
  std::vector<Vec> control;
  std::vector<double> lyapunov;
  std::vector<double> nu;  // empty unless the mode is dynamic

  std::vector<EventRecord> events;

  double epsilon = 0.0;
  double epsilon_bar = 0.0;
  double tol_event = 0.0;
  double end_time = 0.0;
  bool truncated = false;  // ended at t_max before the event cap

  // Bounds on |u| and |du/dt| over [t_k, min(t_{k+1}, t_k + T)).
  double max_control = 0.0;
  double max_control_rate = 0.0;
  // Largest V(x(t)) - epsilon_k over [t_k, t_{k+1}), k >= 1.
  double level_excess = -std::numeric_limits<double>::infinity();
  // Post-update band check rho1(|e(t_k+)|) <= r (sigma/2) alpha3(|x(t_k)|).
  std::size_t band_violations = 0;
  double min_nu = std::numeric_limits<double>::infinity();

  std::vector<double> event_times() const;
  std::size_t level_violations() const { return level_excess > tol_event ? 1 : 0; }
};

/// Closed-loop simulation. An event fires at t = 0; between events the plant
/// is integrated with fixed-step RK4 under the current segment and the true
/// disturbance; the trigger is evaluated after every step and a detected
/// firing is localized by bisection on the step to `event_tolerance`.
///
/// Throws DivergenceError on non-finite states and ZenoError when two events
/// are closer than 10 * event_tolerance.
TrajectoryLog run_closed_loop(const PlantModel& plant, const BasisSet& basis,
                              const SimConfig& sim, const StaticEtrConfig& trigger,
                              const DynamicEtrConfig& dynamic, const Vec& x0);

// Post-run checks against the dense log.

struct DissipationReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // bound - dV/dt
};

/// At samples with V >= epsilon where the static rule does not hold,
/// dV/dt <= -(1 - sigma) alpha3(|x|) + tolerance.
DissipationReport check_dissipation(const TrajectoryLog& log, const PlantModel& plant,
                                    const StaticEtrConfig& trigger, double tolerance = 1e-9);

/// max |x(t)| over the final `fraction` of the run.
double tail_state_norm(const TrajectoryLog& log, double fraction);

/// Smallest inter-event gap, infinity with fewer than two events.
double min_inter_event_time(const TrajectoryLog& log);

void write_samples_csv(std::ostream& out, const TrajectoryLog& log);
void write_events_csv(std::ostream& out, const TrajectoryLog& log);

}  // namespace etpc
