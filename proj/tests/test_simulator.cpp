#include "etpc/errors.hpp"
#include "etpc/simulator.hpp"

#include <doctest.h>

#include <sstream>

using etpc::BasisSet;
using etpc::ControllerMode;
using etpc::Mat;
using etpc::PowerLaw;
using etpc::Vec;

namespace {

Vec lorenz_x0() {
  Vec x(3);
  x << 0, 1, 0;
  return x;
}

etpc::TrajectoryLog lorenz_run(ControllerMode mode, double t_max = 10.0, double step = 1e-3) {
  const auto plant = etpc::preset_lorenz();
  const auto basis = BasisSet::monomial(3, 0.1);
  const auto trig = etpc::StaticEtrConfig::make(plant, 0.4, 0.25);
  etpc::SimConfig sim;
  sim.mode = mode;
  sim.t_max = t_max;
  sim.step = step;
  return etpc::run_closed_loop(plant, basis, sim, trig, {}, lorenz_x0());
}

}  // namespace

TEST_CASE("mode names round-trip") {
  for (auto m : {ControllerMode::kEtpcStatic, ControllerMode::kEtpcDynamic, ControllerMode::kZohStatic,
                 ControllerMode::kZohDynamic})
    CHECK(etpc::parse_mode(etpc::to_string(m)) == m);
  CHECK_THROWS_AS(etpc::parse_mode("foh"), etpc::DomainError);
}

TEST_CASE("sim config validation") {
  etpc::SimConfig s;
  s.step = 0.0;
  CHECK_THROWS_AS(s.validate(), etpc::DomainError);
  s = {};
  s.rollout_samples = 200;
  CHECK_THROWS_AS(s.validate(), etpc::DomainError);
  s = {};
  s.t_max = -1;
  CHECK_THROWS_AS(s.validate(), etpc::DomainError);
}

TEST_CASE("control segment evaluation") {
  const auto b1 = BasisSet::monomial(1, 1.0);
  Mat a(2, 1);
  a << 1, -2;
  const etpc::ControlSegment seg(a, 2.0, b1);
  CHECK(seg.eval(2.3)[0] == doctest::Approx(0.4));
  CHECK(seg.eval_rate(2.3)[0] == doctest::Approx(-2.0));

  const auto b3 = BasisSet::monomial(3, 0.1);
  const etpc::ControlSegment zero(Mat::Zero(4, 1), 0.0, b3);
  CHECK(zero.eval(5.0).isZero());
  Mat hold = Mat::Zero(4, 1);
  hold.col(0) = etpc::zoh_fallback(-1.5, b3);
  const etpc::ControlSegment zoh(hold, 1.0, b3);
  for (double t : {1.0, 1.05, 1.1, 3.0}) CHECK(zoh.eval(t)[0] == -1.5);
}

TEST_CASE("equilibrium start without disturbance stays put") {
  const auto plant = etpc::preset_lorenz().without_disturbance();
  const auto basis = BasisSet::monomial(3, 0.1);
  const auto trig = etpc::StaticEtrConfig::make(plant, 0.4, 0.25);
  etpc::SimConfig sim;
  sim.t_max = 2.0;
  const auto log = etpc::run_closed_loop(plant, basis, sim, trig, {}, Vec::Zero(3));
  CHECK(log.events.size() == 1);
  CHECK(log.events[0].coefficients.isZero());
  for (const auto& x : log.state) CHECK(x.isZero());
}

TEST_CASE("event update at the origin gives a zero segment") {
  const auto plant = etpc::preset_lorenz();
  const auto basis = BasisSet::monomial(3, 0.1);
  const auto trig = etpc::StaticEtrConfig::make(plant, 0.4, 0.25);
  const auto up = etpc::event_update(plant, basis, trig, {}, Vec::Zero(3), 0.0);
  CHECK(up.segment.coefficients().isZero());
  CHECK(up.eta == 0.0);
  REQUIRE(up.fits.size() == 1);
  CHECK(up.fits[0].solution.active_case == etpc::ActiveCase::kPinned);
}

TEST_CASE("fit beats the hold on x' = u, gamma = -x") {
  std::vector<etpc::Polynomial> f{etpc::Polynomial::parse("u1", 1, 1, 1)};
  std::vector<etpc::Polynomial> g{etpc::Polynomial::parse("-x1", 1, 1, 1)};
  Mat P(1, 1);
  P << 0.5;
  etpc::IssCertificate c{PowerLaw(0.5, 2), PowerLaw(0.5, 2), PowerLaw(0.5, 2), PowerLaw(0.5, 2), PowerLaw(1, 2)};
  const auto plant = etpc::polynomial_plant("scalar", 1, 1, 1, f, g, P, c, 0.0, {});
  const auto trig = etpc::StaticEtrConfig::make(plant, 0.4, 0.9);
  const double T = 0.1;
  // integral of (e^-t - 1)^2 over [0, T]
  const double zoh = (1 - std::exp(-2 * T)) / 2 - 2 * (1 - std::exp(-T)) + T;
  for (int p : {3, 4, 5}) {
    const auto up = etpc::event_update(plant, BasisSet::monomial(p, T), trig, {}, Vec::Constant(1, 1.0), 0.0);
    CHECK(up.fits[0].objective <= zoh + 1e-12);
    CHECK(up.fits[0].zoh_objective == doctest::Approx(zoh).epsilon(1e-8));
  }
}

TEST_CASE("Lorenz trajectory: events, ultimate bound and runtime invariants") {
  for (auto mode : {ControllerMode::kEtpcStatic, ControllerMode::kZohStatic}) {
    const auto log = lorenz_run(mode);
    REQUIRE(log.events.size() >= 2);
    CHECK(log.events.front().time == 0.0);
    for (std::size_t k = 1; k < log.events.size(); ++k) CHECK(log.events[k].time > log.events[k - 1].time);
    CHECK(log.epsilon == doctest::Approx(0.05));
    CHECK(log.level_violations() == 0);
    CHECK(log.band_violations == 0);
    CHECK(std::isfinite(log.max_control));
    CHECK(std::isfinite(log.max_control_rate));
    // Events after the first fire with V at or above epsilon.
    for (std::size_t k = 1; k < log.events.size(); ++k)
      CHECK(log.events[k].lyapunov >= log.epsilon - log.tol_event);
    // epsilon_k <= epsilon_bar
    for (const auto& ev : log.events) CHECK(ev.lyapunov <= log.epsilon_bar + log.tol_event);
    // Final 20 %: |x| <= alpha1^-1(epsilon).
    const double radius = etpc::preset_lorenz().certificate.alpha1.inverse(log.epsilon + log.tol_event);
    CHECK(etpc::tail_state_norm(log, 0.2) <= radius);
    const auto diss = etpc::check_dissipation(log, etpc::preset_lorenz(),
                                              etpc::StaticEtrConfig::make(etpc::preset_lorenz(), 0.4, 0.25), 1e-6);
    CHECK(diss.checked > 0);
    CHECK(diss.violations == 0);
    CHECK(etpc::min_inter_event_time(log) > 10 * 1e-9);
  }
}

TEST_CASE("hold modes apply a piecewise-constant control") {
  // Rows at distinct times always lie in one segment; the segment changes
  // only between the two rows an event writes at the same instant.
  const auto log = lorenz_run(ControllerMode::kZohStatic, 2.0);
  std::size_t compared = 0;
  for (std::size_t k = 1; k < log.time.size(); ++k) {
    if (log.time[k] == log.time[k - 1]) continue;
    CHECK(log.control[k] == log.control[k - 1]);
    ++compared;
  }
  CHECK(compared > 1000);
}

TEST_CASE("parameterized control varies between events and jumps at events") {
  const auto log = lorenz_run(ControllerMode::kEtpcStatic, 2.0);
  bool varies = false, jumps = false;
  for (std::size_t k = 1; k < log.time.size(); ++k) {
    if (log.time[k] == log.time[k - 1])
      jumps |= (log.control[k] - log.control[k - 1]).norm() > 1e-6;
    else
      varies |= (log.control[k] - log.control[k - 1]).norm() > 1e-9;
  }
  CHECK(varies);
  CHECK(jumps);
}

TEST_CASE("event cap and truncation flag") {
  const auto plant = etpc::preset_lorenz();
  const auto basis = BasisSet::monomial(3, 0.1);
  const auto trig = etpc::StaticEtrConfig::make(plant, 0.4, 0.25);
  etpc::SimConfig sim;
  sim.mode = ControllerMode::kZohStatic;
  sim.t_max = 30;
  sim.max_events = 5;
  sim.record_samples = false;
  const auto log = etpc::run_closed_loop(plant, basis, sim, trig, {}, lorenz_x0());
  CHECK(log.events.size() == 6);
  CHECK_FALSE(log.truncated);
  CHECK(log.time.empty());
}

TEST_CASE("forced refresh") {
  const auto plant = etpc::preset_lorenz();
  const auto basis = BasisSet::monomial(3, 0.1);
  const auto trig = etpc::StaticEtrConfig::make(plant, 0.4, 0.25);
  etpc::SimConfig sim;
  sim.t_max = 10;
  sim.refresh_horizon = 0.2;
  const auto log = etpc::run_closed_loop(plant, basis, sim, trig, {}, lorenz_x0());
  bool any = false;
  for (std::size_t k = 1; k < log.events.size(); ++k) {
    CHECK(log.events[k].time - log.events[k - 1].time <= 0.2 + 1e-9);
    any |= log.events[k].forced;
  }
  CHECK(any);
}

TEST_CASE("divergence is reported with its time") {
  std::vector<etpc::Polynomial> f{etpc::Polynomial::parse("x1^3 + u1", 1, 1, 1)};
  std::vector<etpc::Polynomial> g{etpc::Polynomial::parse("0*x1", 1, 1, 1)};
  Mat P(1, 1);
  P << 0.5;
  etpc::IssCertificate c{PowerLaw(0.5, 2), PowerLaw(0.5, 2), PowerLaw(0.5, 2), PowerLaw(0.5, 2), PowerLaw(1, 2)};
  const auto plant = etpc::polynomial_plant("bad", 1, 1, 1, f, g, P, c, 0.0, {});
  etpc::SimConfig sim;
  sim.mode = ControllerMode::kZohStatic;
  const auto trig = etpc::StaticEtrConfig::make(plant, 0.4, 0.25);
  CHECK_THROWS_AS(etpc::run_closed_loop(plant, BasisSet::monomial(1, 0.1), sim, trig, {}, Vec::Constant(1, 5.0)),
                  etpc::DivergenceError);
}

TEST_CASE("csv writers") {
  const auto log = lorenz_run(ControllerMode::kEtpcStatic, 1.0);
  std::ostringstream s, e;
  etpc::write_samples_csv(s, log);
  etpc::write_events_csv(e, log);
  CHECK(s.str().rfind("t,x1,x2,x3,u1,V,nu\n", 0) == 0);
  CHECK(e.str().rfind("k,t_k,iet,epsilon_k,fit_case,fit_objective,eta,forced\n", 0) == 0);
  const std::string events = e.str();
  const auto lines = std::count(events.begin(), events.end(), '\n');
  CHECK(std::size_t(lines) == log.events.size() + 1);
}
