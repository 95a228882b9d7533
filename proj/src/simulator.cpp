#include "etpc/simulator.hpp"

#include "etpc/errors.hpp"
#include "etpc/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace etpc {

std::string_view to_string(ControllerMode mode) {
  switch (mode) {
    case ControllerMode::kEtpcStatic: return "etpc_static";
    case ControllerMode::kEtpcDynamic: return "etpc_dynamic";
    case ControllerMode::kZohStatic: return "zoh_static";
    case ControllerMode::kZohDynamic: return "zoh_dynamic";
  }
  return "unknown";
}

ControllerMode parse_mode(std::string_view text) {
  for (auto m : {ControllerMode::kEtpcStatic, ControllerMode::kEtpcDynamic,
                 ControllerMode::kZohStatic, ControllerMode::kZohDynamic}) {
    if (text == to_string(m)) return m;
  }
  throw DomainError("unknown controller mode '" + std::string(text) + "'");
}

bool is_parameterized(ControllerMode mode) {
  return mode == ControllerMode::kEtpcStatic || mode == ControllerMode::kEtpcDynamic;
}

bool is_dynamic(ControllerMode mode) {
  return mode == ControllerMode::kEtpcDynamic || mode == ControllerMode::kZohDynamic;
}

void SimConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("integrator step must be > 0");
  if (rollout_samples < 3 || rollout_samples % 2 == 0)
    throw DomainError("rollout sample count must be odd and >= 3");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("t_max must be > 0");
  if (!(event_tolerance > 0.0) || event_tolerance >= step)
    throw DomainError("event tolerance must be positive and below the step");
  if (!(refresh_horizon >= 0.0)) throw DomainError("refresh horizon must be >= 0");
}

ControlSegment::ControlSegment(Mat coefficients, double start_time, const BasisSet& basis)
    : coefficients_(std::move(coefficients)), start_time_(start_time), basis_(&basis) {
  if (coefficients_.rows() != basis.count())
    throw DomainError("segment coefficients do not match the basis size");
}

Vec ControlSegment::eval(double t) const {
  const double tau = std::max(0.0, t - start_time_);
  return coefficients_.transpose() * basis_->eval(tau);
}

Vec ControlSegment::eval_rate(double t) const {
  const double tau = std::max(0.0, t - start_time_);
  return coefficients_.transpose() * basis_->eval_derivative(tau);
}

EventUpdate event_update(const PlantModel& plant, const BasisSet& basis,
                         const StaticEtrConfig& trigger, const SimConfig& sim, const Vec& x,
                         double t_k) {
  if (!x.allFinite()) throw DivergenceError("non-finite state at event", t_k);
  const Vec gamma = plant.feedback(x);
  Mat coeffs(basis.count(), plant.m);
  std::vector<ChannelFit> fits;
  double eta = 0.0;
  if (!is_parameterized(sim.mode)) {
    for (int i = 0; i < plant.m; ++i) coeffs.col(i) = zoh_fallback(gamma[i], basis);
    return EventUpdate{ControlSegment(std::move(coeffs), t_k, basis), {}, 0.0};
  }
  const Rollout rollout =
      simulate_model(plant, x, basis.horizon(), sim.rollout_samples, sim.step);
  eta = eta_of(plant, trigger.sigma, trigger.r, x.norm());
  for (int i = 0; i < plant.m; ++i) {
    ChannelFit fit;
    fit.problem = assemble(basis, rollout.controls[std::size_t(i)], eta);
    fit.solution = solve(fit.problem);
    fit.objective = objective(fit.problem, fit.solution.coefficients);
    fit.zoh_objective = objective(
        fit.problem, zoh_fallback(rollout.controls[std::size_t(i)].values.front(), basis));
    coeffs.col(i) = fit.solution.coefficients;
    fits.push_back(std::move(fit));
  }
  return EventUpdate{ControlSegment(std::move(coeffs), t_k, basis), std::move(fits), eta};
}

std::vector<double> TrajectoryLog::event_times() const {
  std::vector<double> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.time);
  return out;
}

namespace {

class ClosedLoop {
 public:
  ClosedLoop(const PlantModel& plant, const BasisSet& basis, const SimConfig& sim,
             const StaticEtrConfig& trigger, const DynamicEtrConfig& dynamic)
      : plant_(plant), basis_(basis), sim_(sim), trigger_(trigger), dynamic_(dynamic),
        dynamic_mode_(is_dynamic(sim.mode)) {}

  TrajectoryLog run(const Vec& x0) {
    if (x0.size() != plant_.n) throw DomainError("initial state has wrong dimension");
    if (!x0.allFinite()) throw DivergenceError("non-finite initial state", 0.0);
    sim_.validate();

    log_.epsilon = trigger_.epsilon;
    log_.epsilon_bar = std::max(trigger_.epsilon, plant_.lyapunov(x0));

    Vec z(plant_.n + (dynamic_mode_ ? 1 : 0));
    z.head(plant_.n) = x0;
    if (dynamic_mode_) z[plant_.n] = dynamic_.nu0;

    double t = 0.0;
    fire(t, z, false);
    double max_rate = 0.0;  // sup |dV/dt| seen between samples

    while (t < sim_.t_max * (1.0 - 1e-15)) {
      if (sim_.max_events > 0 && log_.events.size() > sim_.max_events) break;
      double dt = std::min(sim_.step, sim_.t_max - t);
      if (sim_.refresh_horizon > 0.0)
        dt = std::min(dt, segment_->start_time() + sim_.refresh_horizon - t);
      const auto rate = [this](double s, const Vec& v) { return this->rate(s, v); };
      Vec next = rk4_step(rate, t, z, dt);
      check_finite(next, t + dt);

      const bool forced = refresh_due(t + dt);
      if (forced || fired(t + dt, next)) {
        double lo = 0.0;
        double hi = dt;
        Vec at_hi = next;
        if (!forced) {
          while (hi - lo > sim_.event_tolerance) {
            const double mid = 0.5 * (lo + hi);
            Vec trial = rk4_step(rate, t, z, mid);
            if (fired(t + mid, trial)) {
              hi = mid;
              at_hi = std::move(trial);
            } else {
              lo = mid;
            }
          }
        }
        const double t_event = t + hi;
        max_rate = std::max(max_rate, std::abs(plant_.lyapunov(at_hi.head(plant_.n)) -
                                               plant_.lyapunov(z.head(plant_.n))) / hi);
        observe(t_event, at_hi);
        record_sample(t_event, at_hi);  // left limit
        if (t_event - log_.events.back().time < 10.0 * sim_.event_tolerance) {
          std::ostringstream msg;
          msg << "events " << log_.events.size() - 1 << " and " << log_.events.size()
              << " are " << (t_event - log_.events.back().time)
              << " s apart (Zeno suspicion) at t=" << t_event;
          throw ZenoError(msg.str(), t_event, log_.events.size());
        }
        t = t_event;
        z = std::move(at_hi);
        fire(t, z, forced);
      } else {
        max_rate = std::max(max_rate, std::abs(plant_.lyapunov(next.head(plant_.n)) -
                                               plant_.lyapunov(z.head(plant_.n))) / dt);
        t += dt;
        z = std::move(next);
        observe(t, z);
        record_sample(t, z);
      }
    }
    log_.end_time = t;
    log_.truncated = sim_.max_events > 0 && log_.events.size() <= sim_.max_events;
    log_.tol_event =
        max_rate * sim_.event_tolerance + 1e-12 * std::max(1.0, log_.epsilon_bar);
    return std::move(log_);
  }

 private:
  Vec rate(double t, const Vec& z) const {
    const Vec x = z.head(plant_.n);
    const Vec u = segment_->eval(t);
    Vec out(z.size());
    out.head(plant_.n) = plant_.dynamics(x, u, plant_.disturbance_at(t));
    if (dynamic_mode_) {
      const Vec e = u - plant_.feedback(x);
      out[plant_.n] = nu_rate(z[plant_.n], x, e, dynamic_, trigger_, plant_);
    }
    return out;
  }

  bool fired(double t, const Vec& z) const {
    const Vec x = z.head(plant_.n);
    const Vec e = segment_->eval(t) - plant_.feedback(x);
    if (dynamic_mode_) return dynamic_fired(z[plant_.n], x, e, dynamic_, trigger_, plant_);
    return static_fired(x, e, trigger_, plant_);
  }

  bool refresh_due(double t) const {
    return sim_.refresh_horizon > 0.0 &&
           t - segment_->start_time() >= sim_.refresh_horizon * (1.0 - 1e-12);
  }

  void check_finite(const Vec& z, double t) const {
    if (!z.allFinite()) {
      std::ostringstream msg;
      msg << "closed-loop state diverged at t=" << t;
      throw DivergenceError(msg.str(), t);
    }
  }

  void fire(double t, const Vec& z, bool forced) {
    const Vec x = z.head(plant_.n);
    EventUpdate update = [&] {
      try {
        return event_update(plant_, basis_, trigger_, sim_, x, t);
      } catch (const DivergenceError& err) {
        std::ostringstream msg;
        msg << "event " << log_.events.size() << ": " << err.what();
        throw DivergenceError(msg.str(), t);
      } catch (const Error& err) {
        std::ostringstream msg;
        msg << "event " << log_.events.size() << " at t=" << t << ": " << err.what();
        throw InconsistencyError(msg.str());
      }
    }();
    segment_.emplace(std::move(update.segment));

    EventRecord rec;
    rec.time = t;
    rec.state = x;
    rec.coefficients = segment_->coefficients();
    for (const auto& f : update.fits) {
      rec.cases.push_back(f.solution.active_case);
      rec.objectives.push_back(f.objective);
    }
    rec.eta = update.eta;
    rec.lyapunov = plant_.lyapunov(x);
    rec.error_after = (segment_->eval(t) - plant_.feedback(x)).norm();
    rec.forced = forced;

    const auto& c = plant_.certificate;
    const double band = trigger_.r * 0.5 * trigger_.sigma * c.alpha3(x.norm());
    if (c.rho1(rec.error_after) > band + 1e-9 * (1.0 + band)) ++log_.band_violations;

    log_.events.push_back(std::move(rec));
    observe(t, z);
    record_sample(t, z);  // right limit
  }

  // Online bookkeeping for the event-level and band checks.
  void observe(double t, const Vec& z) {
    const auto& current = log_.events.back();
    if (log_.events.size() >= 2) {
      const double v = plant_.lyapunov(z.head(plant_.n));
      log_.level_excess = std::max(log_.level_excess, v - current.lyapunov);
    }
    if (t - current.time < basis_.horizon()) {
      log_.max_control = std::max(log_.max_control, segment_->eval(t).norm());
      log_.max_control_rate = std::max(log_.max_control_rate, segment_->eval_rate(t).norm());
    }
    if (dynamic_mode_) log_.min_nu = std::min(log_.min_nu, z[plant_.n]);
  }

  void record_sample(double t, const Vec& z) {
    if (!sim_.record_samples) return;
    const Vec x = z.head(plant_.n);
    log_.time.push_back(t);
    log_.state.push_back(x);
    log_.control.push_back(segment_->eval(t));
    log_.lyapunov.push_back(plant_.lyapunov(x));
    if (dynamic_mode_) log_.nu.push_back(z[plant_.n]);
  }

  const PlantModel& plant_;
  const BasisSet& basis_;
  SimConfig sim_;
  StaticEtrConfig trigger_;
  DynamicEtrConfig dynamic_;
  bool dynamic_mode_;
  std::optional<ControlSegment> segment_;
  TrajectoryLog log_;
};

}  // namespace

TrajectoryLog run_closed_loop(const PlantModel& plant, const BasisSet& basis,
                              const SimConfig& sim, const StaticEtrConfig& trigger,
                              const DynamicEtrConfig& dynamic, const Vec& x0) {
  return ClosedLoop(plant, basis, sim, trigger, dynamic).run(x0);
}

DissipationReport check_dissipation(const TrajectoryLog& log, const PlantModel& plant,
                                    const StaticEtrConfig& trigger, double tolerance) {
  DissipationReport report;
  const auto& c = plant.certificate;
  for (std::size_t k = 0; k < log.time.size(); ++k) {
    const Vec& x = log.state[k];
    const double v = log.lyapunov[k];
    if (v < trigger.epsilon) continue;
    const Vec e = log.control[k] - plant.feedback(x);
    if (static_fired(x, e, trigger, plant)) continue;
    const double dv =
        plant.lyapunov_grad(x).dot(plant.dynamics(x, log.control[k], plant.disturbance_at(log.time[k])));
    const double bound = -(1.0 - trigger.sigma) * c.alpha3(x.norm());
    const double margin = bound - dv;
    ++report.checked;
    report.worst_margin = std::min(report.worst_margin, margin);
    if (margin < -tolerance * std::max(1.0, std::abs(dv))) ++report.violations;
  }
  return report;
}

double tail_state_norm(const TrajectoryLog& log, double fraction) {
  const double from = log.end_time * (1.0 - fraction);
  double worst = 0.0;
  for (std::size_t k = 0; k < log.time.size(); ++k)
    if (log.time[k] >= from) worst = std::max(worst, log.state[k].norm());
  return worst;
}

double min_inter_event_time(const TrajectoryLog& log) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < log.events.size(); ++k)
    best = std::min(best, log.events[k].time - log.events[k - 1].time);
  return best;
}

void write_samples_csv(std::ostream& out, const TrajectoryLog& log) {
  const auto prec = out.precision(17);
  const auto n = log.state.empty() ? 0 : log.state.front().size();
  const auto m = log.control.empty() ? 0 : log.control.front().size();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i + 1;
  out << ",V,nu\n";
  for (std::size_t k = 0; k < log.time.size(); ++k) {
    out << log.time[k];
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << log.state[k][i];
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << log.control[k][i];
    out << ',' << log.lyapunov[k] << ',';
    if (!log.nu.empty()) out << log.nu[k];
    out << '\n';
  }
  out.precision(prec);
}

void write_events_csv(std::ostream& out, const TrajectoryLog& log) {
  const auto prec = out.precision(17);
  out << "k,t_k,iet,epsilon_k,fit_case,fit_objective,eta,forced\n";
  for (std::size_t k = 0; k < log.events.size(); ++k) {
    const auto& e = log.events[k];
    out << k << ',' << e.time << ',';
    if (k + 1 < log.events.size()) out << log.events[k + 1].time - e.time;
    out << ',' << e.lyapunov << ',';
    for (std::size_t i = 0; i < e.cases.size(); ++i)
      out << (i ? ";" : "") << to_string(e.cases[i]);
    if (e.cases.empty()) out << "hold";
    out << ',';
    double obj = 0.0;
    for (double o : e.objectives) obj += o;
    out << obj << ',' << e.eta << ',' << (e.forced ? 1 : 0) << '\n';
  }
  out.precision(prec);
}

}  // namespace etpc
