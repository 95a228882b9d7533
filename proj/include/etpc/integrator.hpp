#pragma once

#include <Eigen/Dense>

namespace etpc {

/// One classical fourth-order Runge-Kutta step of length h for
/// x' = rate(t, x).
template <class Rate>
Eigen::VectorXd rk4_step(Rate&& rate, double t, const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd k1 = rate(t, x);
  const Eigen::VectorXd k2 = rate(t + 0.5 * h, Eigen::VectorXd(x + 0.5 * h * k1));
  const Eigen::VectorXd k3 = rate(t + 0.5 * h, Eigen::VectorXd(x + 0.5 * h * k2));
  const Eigen::VectorXd k4 = rate(t + h, Eigen::VectorXd(x + h * k3));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace etpc
