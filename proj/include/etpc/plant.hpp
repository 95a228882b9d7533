#pragma once

#include "etpc/basis.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace etpc {

/// Class-K-infinity function s -> coeff * s^exponent.
class PowerLaw {
 public:
  PowerLaw() = default;
  PowerLaw(double coeff, double exponent);

  double operator()(double s) const;
  double inverse(double value) const;

  double coeff() const { return coeff_; }
  double exponent() const { return exponent_; }

 private:
  double coeff_ = 1.0;
  double exponent_ = 1.0;
};

/// The class-K-infinity quintuple certifying input-to-state stability of the
/// ideal feedback loop with respect to actuation error e and disturbance d:
///
///   alpha1(|x|) <= V(x) <= alpha2(|x|)
///   dV/dx f(x, gamma(x) + e, d) <= -alpha3(|x|) + rho1(|e|) + rho2(|d|)
struct IssCertificate {
  PowerLaw alpha1;
  PowerLaw alpha2;
  PowerLaw alpha3;
  PowerLaw rho1;
  PowerLaw rho2;
};

/// amplitude * sin(frequency * t)
struct Sinusoid {
  double amplitude = 0.0;
  double frequency = 0.0;
};

/// Disturbance channels, each a sum of sinusoids.
struct SinusoidalDisturbance {
  std::vector<std::vector<Sinusoid>> channels;

  Vec at(double t) const;
};

/// Polynomial in the stacked variables (x_1..x_n, u_1..u_m, d_1..d_q).
class Polynomial {
 public:
  struct Term {
    double coeff = 0.0;
    std::vector<int> powers;  // one exponent per stacked variable
  };

  /// Parses sums of products such as `-10*x1 + 10*x2 + d1` or `x1^2*x2`.
  /// Coefficients may be written as `a/b`.
  static Polynomial parse(const std::string& text, int n, int m, int q);

  double eval(const Vec& x, const Vec& u, const Vec& d) const;
  const std::vector<Term>& terms() const { return terms_; }
  const std::string& text() const { return text_; }

 private:
  std::vector<Term> terms_;
  std::string text_;
  int n_ = 0, m_ = 0, q_ = 0;
};

/// The controlled system x' = f(x, u, d) with its ideal feedback gamma,
/// Lyapunov function V and certificate, and the disturbance acting on it.
struct PlantModel {
  using Dynamics = std::function<Vec(const Vec& x, const Vec& u, const Vec& d)>;
  using VectorMap = std::function<Vec(const Vec& x)>;
  using ScalarMap = std::function<double(const Vec& x)>;

  std::string name;
  int n = 0;
  int m = 0;
  int q = 0;
  Dynamics dynamics;
  VectorMap feedback;
  ScalarMap lyapunov;
  VectorMap lyapunov_grad;
  IssCertificate certificate;
  double disturbance_bound = 0.0;
  SinusoidalDisturbance disturbance;

  Vec disturbance_at(double t) const;

  /// Same plant with d == 0 and D = 0.
  PlantModel without_disturbance() const;
};

/// Controlled Lorenz system with a = 10, b = 28, c = 8/3,
/// gamma(x) = -(a + b) x1 - x2 / 2, V = |x|^2 / 2 and the three-tone
/// disturbance of amplitude 0.1 / sqrt(3) per channel.
///
/// Certificate: along the closed loop,
///   V' = -a x1^2 - 1.5 x2^2 - c x3^2 + x2 e + x.d
///      <= -(1.5 - k/2 - l/2)|x|^2 + e^2/(2k) + |d|^2/(2l)
/// for any k, l > 0. k = 1, l = 1/2 gives alpha3 = 0.5 s^2 (0.25 s^2 of
/// slack), rho1 = 0.5 s^2 and rho2 = s^2, so that epsilon = 0.05 at
/// sigma = 0.4 and D = 0.1.
PlantModel preset_lorenz();

/// Forced Van der Pol oscillator with gamma(x) = -x2 - (1 - x1^2) x2 and
/// V = x'Px, P = [[4.5, 1.5], [1.5, 3]].
///
/// The closed loop is linear, x' = A x + B e + d with A = [[0, 1], [-1, -1]],
/// and A'P + PA = -3 I, so
///   V' = -3|x|^2 + 2 x'PB e + 2 x'P d
///      <= -(3 - k - l)|x|^2 + (|PB|^2 / k) e^2 + (|P|^2 / l) |d|^2.
/// For fixed k the ultimate bound is smallest at l = (3 - k)/2; k = 1/2,
/// l = 5/4 gives alpha3 = 1.25 s^2, rho1 = 22.5 s^2 and
/// rho2 = (lambda_max(P)^2 / 1.25) s^2. alpha1/alpha2 use the extreme
/// eigenvalues of P.
PlantModel preset_vanderpol();

/// Plant with polynomial f and gamma and V(x) = x'Px.
PlantModel polynomial_plant(const std::string& name, int n, int m, int q,
                            std::vector<Polynomial> dynamics,
                            std::vector<Polynomial> feedback, const Mat& lyapunov_matrix,
                            const IssCertificate& certificate, double disturbance_bound,
                            SinusoidalDisturbance disturbance);

/// Disturbance-free model trajectory x_hat' = f(x_hat, gamma(x_hat), 0)
/// sampled on a uniform grid over [0, T], with u_hat = gamma(x_hat).
struct Rollout {
  double spacing = 0.0;
  Mat states;                          // samples x n
  std::vector<UniformSignal> controls; // one per input channel
  std::vector<double> lyapunov;        // V(x_hat) per sample
};

/// Integrates the model with fixed-step RK4, substepping each grid interval
/// so that the step does not exceed `max_step`. `samples` must be odd and
/// >= 3.
Rollout simulate_model(const PlantModel& plant, const Vec& x0, double horizon, int samples,
                       double max_step = 1e-3);

/// Outcome of the sampled certificate and plant checks.
struct CertificateReport {
  bool passed = true;
  double worst_dissipation_slack = 0.0;  // min of rhs - lhs
  double worst_sandwich_slack = 0.0;     // min of V - alpha1 and alpha2 - V
  double worst_gradient_error = 0.0;
  std::vector<std::string> failures;     // one line per violated check
};

struct CertificateCheckOptions {
  double state_radius = 10.0;     // R_test
  int dissipation_samples = 100000;
  int sandwich_samples = 10000;
  int gradient_samples = 100;
  double disturbance_horizon = 100.0;
  double slack_tolerance = 1e-9;
  std::uint64_t seed = 7;
};

/// Samples every certificate and plant invariant: alpha1 <= alpha2, the
/// dissipation inequality over (x, e, d), the alpha1 <= V <= alpha2 sandwich,
/// f(0,0,0) = 0, gamma(0) = 0, the gradient against central differences, and
/// |d(t)| <= D.
CertificateReport check_certificate(const PlantModel& plant,
                                    const CertificateCheckOptions& options = {});

}  // namespace etpc
