#include "etpc/trigger.hpp"

#include "etpc/errors.hpp"

#include <cmath>

namespace etpc {

StaticEtrConfig StaticEtrConfig::make(const PlantModel& plant, double sigma, double r) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("sigma must lie in (0, 1)");
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("r must lie in [0, 1)");
  return StaticEtrConfig{sigma, r, epsilon_bound(plant, sigma)};
}

double epsilon_bound(const PlantModel& plant, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("sigma must lie in (0, 1)");
  const auto& c = plant.certificate;
  return c.alpha2(c.alpha3.inverse(2.0 * c.rho2(plant.disturbance_bound) / sigma));
}

double eta_of(const PlantModel& plant, double sigma, double r, double s) {
  if (!(s >= 0.0)) throw DomainError("eta argument must be >= 0");
  const auto& c = plant.certificate;
  return c.rho1.inverse(r * 0.5 * sigma * c.alpha3(s)) / std::sqrt(double(plant.m));
}

double r_admissible_bound(const PlantModel& plant, double epsilon, double epsilon_bar) {
  const auto& c = plant.certificate;
  const double den = c.alpha3(c.alpha1.inverse(epsilon_bar));
  if (den <= 0.0) return 1.0;
  return c.alpha3(c.alpha2.inverse(epsilon)) / den;
}

double trigger_drive(const PlantModel& plant, double sigma, const Vec& x, const Vec& e) {
  const auto& c = plant.certificate;
  return 0.5 * sigma * c.alpha3(x.norm()) - c.rho1(e.norm());
}

bool static_fired(const Vec& x, const Vec& e, const StaticEtrConfig& cfg,
                  const PlantModel& plant) {
  const double err = plant.certificate.rho1(e.norm());
  if (!(err > 0.0)) return false;
  return err >= 0.5 * cfg.sigma * plant.certificate.alpha3(x.norm()) &&
         plant.lyapunov(x) >= cfg.epsilon;
}

double nu_rate(double nu, const Vec& x, const Vec& e, const DynamicEtrConfig& cfg,
               const StaticEtrConfig& static_cfg, const PlantModel& plant) {
  return -cfg.omega(nu) + trigger_drive(plant, static_cfg.sigma, x, e);
}

bool dynamic_fired(double nu, const Vec& x, const Vec& e, const DynamicEtrConfig& cfg,
                   const StaticEtrConfig& static_cfg, const PlantModel& plant) {
  if (!(plant.certificate.rho1(e.norm()) > 0.0)) return false;
  return nu + cfg.theta * trigger_drive(plant, static_cfg.sigma, x, e) <= 0.0;
}

DynamicStep dynamic_step_and_check(double nu, const Vec& x, const Vec& e,
                                   const DynamicEtrConfig& cfg, const StaticEtrConfig& static_cfg,
                                   const PlantModel& plant, double dt) {
  const double drive = trigger_drive(plant, static_cfg.sigma, x, e);
  auto rate = [&](double v) { return -cfg.omega(v) + drive; };
  const double k1 = rate(nu);
  const double k2 = rate(nu + 0.5 * dt * k1);
  const double k3 = rate(nu + 0.5 * dt * k2);
  const double k4 = rate(nu + dt * k3);
  const double next = nu + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!std::isfinite(next)) throw DivergenceError("dynamic trigger variable diverged", 0.0);
  return DynamicStep{next, dynamic_fired(next, x, e, cfg, static_cfg, plant)};
}

}  // namespace etpc
