#pragma once

#include "etpc/plant.hpp"

namespace etpc {

/// Static rule: fire when rho1(|e|) >= (sigma/2) alpha3(|x|) and V(x) >= epsilon.
struct StaticEtrConfig {
  double sigma = 0.4;
  double r = 0.25;
  double epsilon = 0.0;  // cached epsilon_bound(plant, sigma)

  /// Validates sigma in (0, 1), r in [0, 1) and caches epsilon.
  static StaticEtrConfig make(const PlantModel& plant, double sigma, double r);
};

/// Dynamic rule: fire when nu + theta ((sigma/2) alpha3(|x|) - rho1(|e|)) <= 0,
/// with nu' = -omega(nu) + (sigma/2) alpha3(|x|) - rho1(|e|), nu(0) = nu0.
struct DynamicEtrConfig {
  double theta = 1.0;
  double nu0 = 0.0;
  PowerLaw omega{0.5, 1.0};
};

/// epsilon = alpha2(alpha3^-1(2 rho2(D) / sigma)).
double epsilon_bound(const PlantModel& plant, double sigma);

/// Band half-width of the fit constraint, eta(s) = rho1^-1(r (sigma/2) alpha3(s)) / sqrt(m).
double eta_of(const PlantModel& plant, double sigma, double r, double s);

/// Upper end of the r window that guarantees a positive lower bound on the
/// inter-event times: alpha3(alpha2^-1(epsilon)) / alpha3(alpha1^-1(epsilon_bar)),
/// epsilon_bar = max(epsilon, V(x0)).
double r_admissible_bound(const PlantModel& plant, double epsilon, double epsilon_bar);

/// (sigma/2) alpha3(|x|) - rho1(|e|): positive while the error is within the
/// relative threshold.
double trigger_drive(const PlantModel& plant, double sigma, const Vec& x, const Vec& e);

/// Both conjuncts of the static rule. A zero actuation error never fires:
/// at x = 0, e = 0 the threshold comparison is 0 >= 0 but there is nothing
/// to correct.
bool static_fired(const Vec& x, const Vec& e, const StaticEtrConfig& cfg, const PlantModel& plant);

/// Right-hand side of the nu ODE.
double nu_rate(double nu, const Vec& x, const Vec& e, const DynamicEtrConfig& cfg,
               const StaticEtrConfig& static_cfg, const PlantModel& plant);

/// Dynamic rule at a given (nu, x, e); same zero-error exclusion as the static rule.
bool dynamic_fired(double nu, const Vec& x, const Vec& e, const DynamicEtrConfig& cfg,
                   const StaticEtrConfig& static_cfg, const PlantModel& plant);

struct DynamicStep {
  double nu = 0.0;
  bool fired = false;
};

/// Advances nu by one RK4 step of length dt with (x, e) held fixed over the
/// step, then evaluates the dynamic rule at the advanced nu. Throws
/// DivergenceError if nu becomes non-finite.
DynamicStep dynamic_step_and_check(double nu, const Vec& x, const Vec& e,
                                   const DynamicEtrConfig& cfg, const StaticEtrConfig& static_cfg,
                                   const PlantModel& plant, double dt);

}  // namespace etpc
