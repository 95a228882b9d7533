#pragma once
// Reference computations used by the tests. Nothing here calls into the
// library's numerical paths: the QP oracle is an accelerated projected
// gradient in extended precision, integrals use Gauss-Legendre nodes, and
// ODE references use a plain fine-step RK4 written out again.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

/// min 1/2 a'Ha - b'a  s.t.  |n'a - u0| <= eta, by FISTA with adaptive
/// restart on Jacobi-scaled variables. Runs until the iterate stops moving.
inline Eigen::VectorXd projected_gradient(const Eigen::MatrixXd& H, const Eigen::VectorXd& b,
                                          const Eigen::VectorXd& normal, double u0, double eta,
                                          long max_iter = 4'000'000) {
  const Eigen::Index k = H.rows();
  LVec s(k);
  for (Eigen::Index i = 0; i < k; ++i) s[i] = 1.0L / std::sqrt((long double)H(i, i));
  LMat Hs = s.asDiagonal() * H.cast<long double>() * s.asDiagonal();
  LVec bs = s.cwiseProduct(b.cast<long double>());
  LVec ns = s.cwiseProduct(normal.cast<long double>());
  const long double nn = ns.squaredNorm();
  const long double lo = (long double)u0 - eta, hi = (long double)u0 + eta;

  auto project = [&](LVec w) {
    const long double v = ns.dot(w);
    if (v > hi) w -= ((v - hi) / nn) * ns;
    if (v < lo) w += ((lo - v) / nn) * ns;
    return w;
  };

  // Lipschitz constant from the largest eigenvalue.
  Eigen::SelfAdjointEigenSolver<LMat> eig(Hs, Eigen::EigenvaluesOnly);
  const long double step = 1.0L / eig.eigenvalues().maxCoeff();

  LVec w = project(LVec::Zero(k));
  LVec v = w;
  long double t = 1.0L;
  for (long it = 0; it < max_iter; ++it) {
    const LVec next = project(v - step * (Hs * v - bs));
    const long double tn = (1.0L + std::sqrt(1.0L + 4.0L * t * t)) / 2.0L;
    // Restart momentum when the objective direction turns uphill.
    if ((v - next).dot(next - w) > 0) {
      t = 1.0L;
      v = next;
    } else {
      v = next + ((t - 1.0L) / tn) * (next - w);
      t = tn;
    }
    const long double moved = (next - w).norm();
    w = next;
    if (moved <= 1e-17L * (1.0L + w.norm())) break;
  }
  return s.cwiseProduct(w).cast<double>();
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n.
inline void gauss_legendre(int n, std::vector<long double>& x, std::vector<long double>& w) {
  x.assign(std::size_t(n), 0.0L);
  w.assign(std::size_t(n), 0.0L);
  const long double pi = 3.14159265358979323846264338327950288L;
  for (int i = 0; i < n; ++i) {
    long double z = std::cos(pi * (i + 0.75L) / (n + 0.5L));
    long double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const long double pk = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const long double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-19L) break;
    }
    x[std::size_t(i)] = z;
    w[std::size_t(i)] = 2 / ((1 - z * z) * dp * dp);
  }
}

/// 2 * integral over [0, T] of f_i f_j, with 20-point Gauss-Legendre
/// (exact for polynomials up to degree 39).
inline Eigen::MatrixXd gram(const std::function<Eigen::VectorXd(double)>& phi, int count, double T) {
  std::vector<long double> x, w;
  gauss_legendre(20, x, w);
  LMat g = LMat::Zero(count, count);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const long double tau = T * (x[k] + 1) / 2;
    const Eigen::VectorXd f = phi(double(tau));
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < count; ++j) g(i, j) += w[k] * (T / 2) * f[i] * f[j];
  }
  return (2 * g).cast<double>();
}

/// Fixed-step RK4 written independently of the library integrator.
template <class Rate>
Eigen::VectorXd integrate(Rate&& rate, Eigen::VectorXd x, double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  double t = t0;
  for (int i = 0; i < steps; ++i) {
    const Eigen::VectorXd k1 = rate(t, x);
    const Eigen::VectorXd k2 = rate(t + h / 2, x + h / 2 * k1);
    const Eigen::VectorXd k3 = rate(t + h / 2, x + h / 2 * k2);
    const Eigen::VectorXd k4 = rate(t + h, x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  return x;
}

/// Random smooth scalar signal: a low-degree polynomial plus two sinusoids.
struct SmoothSignal {
  std::vector<double> poly;
  double a1, w1, p1, a2, w2, p2;

  explicit SmoothSignal(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int deg = int(std::uniform_int_distribution<int>(0, 3)(rng));
    for (int i = 0; i <= deg; ++i) poly.push_back(2.0 * u(rng));
    a1 = u(rng);
    w1 = 1.0 + 6.0 * std::abs(u(rng));
    p1 = 3.0 * u(rng);
    a2 = 0.5 * u(rng);
    w2 = 5.0 + 15.0 * std::abs(u(rng));
    p2 = 3.0 * u(rng);
  }

  double operator()(double t) const {
    double v = 0.0, tp = 1.0;
    for (double c : poly) {
      v += c * tp;
      tp *= t;
    }
    return v + a1 * std::sin(w1 * t + p1) + a2 * std::sin(w2 * t + p2);
  }
};

}  // namespace oracle
