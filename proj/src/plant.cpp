#include "etpc/plant.hpp"

#include "etpc/errors.hpp"
#include "etpc/integrator.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace etpc {

PowerLaw::PowerLaw(double coeff, double exponent) : coeff_(coeff), exponent_(exponent) {
  if (!(coeff > 0.0) || !std::isfinite(coeff))
    throw DomainError("class-K coefficient must be positive");
  if (!(exponent > 0.0) || !std::isfinite(exponent))
    throw DomainError("class-K exponent must be positive");
}

double PowerLaw::operator()(double s) const {
  if (s <= 0.0) return 0.0;
  return coeff_ * std::pow(s, exponent_);
}

double PowerLaw::inverse(double value) const {
  if (value <= 0.0) return 0.0;
  return std::pow(value / coeff_, 1.0 / exponent_);
}

Vec SinusoidalDisturbance::at(double t) const {
  Vec d(static_cast<Eigen::Index>(channels.size()));
  for (std::size_t i = 0; i < channels.size(); ++i) {
    double v = 0.0;
    for (const auto& s : channels[i]) v += s.amplitude * std::sin(s.frequency * t);
    d[Eigen::Index(i)] = v;
  }
  return d;
}

Vec PlantModel::disturbance_at(double t) const {
  if (disturbance.channels.empty()) return Vec::Zero(q);
  return disturbance.at(t);
}

PlantModel PlantModel::without_disturbance() const {
  PlantModel p = *this;
  p.disturbance_bound = 0.0;
  p.disturbance.channels.clear();
  return p;
}

// ---------------------------------------------------------------------------
// Polynomial expressions

namespace {

class PolyParser {
 public:
  PolyParser(const std::string& text, int n, int m, int q) : s_(text), n_(n), m_(m), q_(q) {}

  std::vector<Polynomial::Term> parse() {
    std::vector<Polynomial::Term> terms;
    skip();
    if (pos_ >= s_.size()) fail("empty polynomial");
    bool first = true;
    while (pos_ < s_.size()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
        skip();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      Polynomial::Term t = term();
      t.coeff *= sign;
      terms.push_back(std::move(t));
      first = false;
      skip();
    }
    return terms;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("polynomial '" + s_ + "': " + what + " at column " +
                      std::to_string(pos_ + 1));
  }

  double number() {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s_.substr(pos_), &used);
    } catch (const std::exception&) {
      fail("expected a number");
    }
    pos_ += used;
    skip();
    if (peek() == '/') {
      ++pos_;
      skip();
      std::size_t used2 = 0;
      double den = 0.0;
      try {
        den = std::stod(s_.substr(pos_), &used2);
      } catch (const std::exception&) {
        fail("expected a denominator");
      }
      if (den == 0.0) fail("division by zero");
      pos_ += used2;
      v /= den;
    }
    return v;
  }

  Polynomial::Term term() {
    Polynomial::Term t;
    t.coeff = 1.0;
    t.powers.assign(std::size_t(n_ + m_ + q_), 0);
    bool any = false;
    while (true) {
      skip();
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        t.coeff *= number();
      } else if (c == 'x' || c == 'u' || c == 'd') {
        ++pos_;
        std::size_t used = 0;
        int idx = 0;
        try {
          idx = std::stoi(s_.substr(pos_), &used);
        } catch (const std::exception&) {
          fail("expected a variable index");
        }
        pos_ += used;
        const int limit = c == 'x' ? n_ : c == 'u' ? m_ : q_;
        if (idx < 1 || idx > limit) fail(std::string("variable ") + c + " index out of range");
        const int offset = c == 'x' ? 0 : c == 'u' ? n_ : n_ + m_;
        int power = 1;
        skip();
        if (peek() == '^') {
          ++pos_;
          skip();
          try {
            power = std::stoi(s_.substr(pos_), &used);
          } catch (const std::exception&) {
            fail("expected an exponent");
          }
          if (power < 0) fail("negative exponent");
          pos_ += used;
        }
        t.powers[std::size_t(offset + idx - 1)] += power;
      } else {
        fail("expected a number or variable");
      }
      any = true;
      skip();
      if (peek() == '*') {
        ++pos_;
        continue;
      }
      break;
    }
    if (!any) fail("empty term");
    return t;
  }

  std::string s_;
  std::size_t pos_ = 0;
  int n_, m_, q_;
};

}  // namespace

Polynomial Polynomial::parse(const std::string& text, int n, int m, int q) {
  Polynomial p;
  p.text_ = text;
  p.n_ = n;
  p.m_ = m;
  p.q_ = q;
  p.terms_ = PolyParser(text, n, m, q).parse();
  return p;
}

double Polynomial::eval(const Vec& x, const Vec& u, const Vec& d) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (int k = 0; k < n_ + m_ + q_; ++k) {
      const int pw = t.powers[std::size_t(k)];
      if (pw == 0) continue;
      const double base = k < n_ ? x[k] : k < n_ + m_ ? u[k - n_] : d[k - n_ - m_];
      for (int r = 0; r < pw; ++r) v *= base;
    }
    sum += v;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Presets

PlantModel preset_lorenz() {
  constexpr double a = 10.0;
  constexpr double b = 28.0;
  constexpr double c = 8.0 / 3.0;
  PlantModel p;
  p.name = "lorenz";
  p.n = 3;
  p.m = 1;
  p.q = 3;
  p.dynamics = [](const Vec& x, const Vec& u, const Vec& d) {
    Vec dx(3);
    dx[0] = -a * x[0] + a * x[1] + d[0];
    dx[1] = b * x[0] - x[1] - x[0] * x[2] + u[0] + d[1];
    dx[2] = x[0] * x[1] - c * x[2] + d[2];
    return dx;
  };
  p.feedback = [](const Vec& x) {
    Vec g(1);
    g[0] = -(a + b) * x[0] - 0.5 * x[1];
    return g;
  };
  p.lyapunov = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  p.lyapunov_grad = [](const Vec& x) { return Vec(x); };
  p.certificate = IssCertificate{PowerLaw(0.5, 2), PowerLaw(0.5, 2), PowerLaw(0.5, 2),
                                 PowerLaw(0.5, 2), PowerLaw(1.0, 2)};
  p.disturbance_bound = 0.1;
  const double amp = 0.1 / std::sqrt(3.0);
  p.disturbance.channels = {{{amp, 50.0}}, {{amp, 20.0}}, {{amp, 10.0}}};
  return p;
}

PlantModel preset_vanderpol() {
  Mat pm(2, 2);
  pm << 4.5, 1.5, 1.5, 3.0;
  Eigen::SelfAdjointEigenSolver<Mat> eig(pm, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  const double pb2 = (pm * Vec::Unit(2, 1)).squaredNorm();

  PlantModel p;
  p.name = "vanderpol";
  p.n = 2;
  p.m = 1;
  p.q = 2;
  p.dynamics = [](const Vec& x, const Vec& u, const Vec& d) {
    Vec dx(2);
    dx[0] = x[1] + d[0];
    dx[1] = (1.0 - x[0] * x[0]) * x[1] - x[0] + u[0] + d[1];
    return dx;
  };
  p.feedback = [](const Vec& x) {
    Vec g(1);
    g[0] = -x[1] - (1.0 - x[0] * x[0]) * x[1];
    return g;
  };
  p.lyapunov = [pm](const Vec& x) { return x.dot(pm * x); };
  p.lyapunov_grad = [pm](const Vec& x) { return Vec(2.0 * pm * x); };
  constexpr double kappa = 0.5;
  constexpr double lambda = (3.0 - kappa) / 2.0;
  p.certificate = IssCertificate{PowerLaw(lmin, 2), PowerLaw(lmax, 2),
                                 PowerLaw(3.0 - kappa - lambda, 2), PowerLaw(pb2 / kappa, 2),
                                 PowerLaw(lmax * lmax / lambda, 2)};
  p.disturbance_bound = 0.1;
  const double amp = 0.1 / std::sqrt(2.0);
  p.disturbance.channels = {{{amp, 10.0}}, {{amp, 20.0}}};
  return p;
}

PlantModel polynomial_plant(const std::string& name, int n, int m, int q,
                            std::vector<Polynomial> dynamics, std::vector<Polynomial> feedback,
                            const Mat& lyapunov_matrix, const IssCertificate& certificate,
                            double disturbance_bound, SinusoidalDisturbance disturbance) {
  if (n < 1 || m < 1 || q < 1) throw DomainError("plant dimensions must be positive");
  if (int(dynamics.size()) != n) throw DomainError("need one dynamics polynomial per state");
  if (int(feedback.size()) != m) throw DomainError("need one feedback polynomial per input");
  if (lyapunov_matrix.rows() != n || lyapunov_matrix.cols() != n)
    throw DomainError("Lyapunov matrix must be n x n");
  if (!(disturbance_bound >= 0.0)) throw DomainError("disturbance bound must be >= 0");
  if (!disturbance.channels.empty() && int(disturbance.channels.size()) != q)
    throw DomainError("need one disturbance channel per disturbance input");
  const Mat sym = 0.5 * (lyapunov_matrix + lyapunov_matrix.transpose());

  PlantModel p;
  p.name = name;
  p.n = n;
  p.m = m;
  p.q = q;
  p.dynamics = [dyn = std::move(dynamics)](const Vec& x, const Vec& u, const Vec& d) {
    Vec dx(static_cast<Eigen::Index>(dyn.size()));
    for (std::size_t i = 0; i < dyn.size(); ++i) dx[Eigen::Index(i)] = dyn[i].eval(x, u, d);
    return dx;
  };
  p.feedback = [fb = std::move(feedback), m, q](const Vec& x) {
    Vec g(m);
    const Vec u0 = Vec::Zero(m);
    const Vec d0 = Vec::Zero(q);
    for (int i = 0; i < m; ++i) g[i] = fb[std::size_t(i)].eval(x, u0, d0);
    return g;
  };
  p.lyapunov = [sym](const Vec& x) { return x.dot(sym * x); };
  p.lyapunov_grad = [sym](const Vec& x) { return Vec(2.0 * sym * x); };
  p.certificate = certificate;
  p.disturbance_bound = disturbance_bound;
  p.disturbance = std::move(disturbance);
  return p;
}

// ---------------------------------------------------------------------------
// Model rollout

Rollout simulate_model(const PlantModel& plant, const Vec& x0, double horizon, int samples,
                       double max_step) {
  if (samples < 3 || samples % 2 == 0)
    throw ResolutionError("rollout sample count must be odd and >= 3");
  if (!(horizon > 0.0)) throw DomainError("rollout horizon must be positive");
  if (!(max_step > 0.0)) throw DomainError("rollout step must be positive");
  if (x0.size() != plant.n) throw DomainError("rollout initial state has wrong dimension");
  if (!x0.allFinite()) throw DivergenceError("non-finite rollout initial state", 0.0);

  const double spacing = horizon / double(samples - 1);
  const int substeps = std::max(1, static_cast<int>(std::ceil(spacing / max_step - 1e-9)));
  const double h = spacing / double(substeps);
  const Vec zero_d = Vec::Zero(plant.q);
  auto rate = [&](double, const Vec& x) { return plant.dynamics(x, plant.feedback(x), zero_d); };

  Rollout out;
  out.spacing = spacing;
  out.states.resize(samples, plant.n);
  out.controls.assign(std::size_t(plant.m), UniformSignal{spacing, {}});
  for (auto& c : out.controls) c.values.resize(std::size_t(samples));
  out.lyapunov.resize(std::size_t(samples));

  Vec x = x0;
  for (int k = 0; k < samples; ++k) {
    if (k > 0) {
      for (int s = 0; s < substeps; ++s) {
        x = rk4_step(rate, 0.0, x, h);
      }
      if (!x.allFinite()) {
        throw DivergenceError("model rollout diverged", spacing * double(k));
      }
    }
    out.states.row(k) = x.transpose();
    const Vec g = plant.feedback(x);
    for (int i = 0; i < plant.m; ++i) out.controls[std::size_t(i)].values[std::size_t(k)] = g[i];
    out.lyapunov[std::size_t(k)] = plant.lyapunov(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Certificate checks

namespace {

Vec random_in_ball(std::mt19937_64& rng, int dim, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  const double norm = v.norm();
  if (norm == 0.0) return Vec::Zero(dim);
  return v * (radius * unit(rng) / norm);
}

std::string describe(const Vec& v) {
  std::ostringstream out;
  out.precision(6);
  out << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
  out << "]";
  return out.str();
}

}  // namespace

CertificateReport check_certificate(const PlantModel& plant,
                                    const CertificateCheckOptions& options) {
  CertificateReport report;
  const auto& cert = plant.certificate;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto fail = [&](std::string line) {
    report.passed = false;
    if (report.failures.size() < 20) report.failures.push_back(std::move(line));
  };

  // alpha1 <= alpha2 on a log grid.
  for (int k = 0; k <= 900; ++k) {
    const double s = std::pow(10.0, -6.0 + 9.0 * double(k) / 900.0);
    if (cert.alpha1(s) > cert.alpha2(s) * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "alpha1(s) > alpha2(s) at s=" << s;
      fail(msg.str());
      break;
    }
  }

  // Equilibrium.
  const Vec x0 = Vec::Zero(plant.n);
  if (plant.dynamics(x0, Vec::Zero(plant.m), Vec::Zero(plant.q)).norm() > 1e-12)
    fail("f(0, 0, 0) != 0");
  if (plant.feedback(x0).norm() > 1e-12) fail("gamma(0) != 0");

  // Dissipation inequality.
  report.worst_dissipation_slack = std::numeric_limits<double>::infinity();
  const double big_d = plant.disturbance_bound;
  for (int k = 0; k < options.dissipation_samples; ++k) {
    const Vec x = random_in_ball(rng, plant.n, options.state_radius);
    const Vec e = random_in_ball(rng, plant.m, options.state_radius);
    Vec d = random_in_ball(rng, plant.q, big_d);
    if (k % 2 == 0 && d.norm() > 0.0) d *= big_d / d.norm();
    const Vec u = plant.feedback(x) + e;
    const double lhs = plant.lyapunov_grad(x).dot(plant.dynamics(x, u, d));
    const double rhs = -cert.alpha3(x.norm()) + cert.rho1(e.norm()) + cert.rho2(d.norm());
    const double slack = rhs - lhs;
    report.worst_dissipation_slack = std::min(report.worst_dissipation_slack, slack);
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    if (slack < -options.slack_tolerance * scale) {
      std::ostringstream msg;
      msg.precision(10);
      msg << "dissipation inequality violated at sample " << k << ": x=" << describe(x)
          << " e=" << describe(e) << " d=" << describe(d) << " dV=" << lhs << " bound=" << rhs;
      fail(msg.str());
    }
  }

  // Sandwich alpha1(|x|) <= V(x) <= alpha2(|x|).
  report.worst_sandwich_slack = std::numeric_limits<double>::infinity();
  for (int k = 0; k < options.sandwich_samples; ++k) {
    const Vec x = random_in_ball(rng, plant.n, options.state_radius);
    const double v = plant.lyapunov(x);
    const double s = x.norm();
    const double lo = v - cert.alpha1(s);
    const double hi = cert.alpha2(s) - v;
    report.worst_sandwich_slack = std::min({report.worst_sandwich_slack, lo, hi});
    const double tol = options.slack_tolerance * std::max(1.0, std::abs(v));
    if (lo < -tol || hi < -tol) {
      std::ostringstream msg;
      msg << "alpha1 <= V <= alpha2 violated at sample " << k << ": x=" << describe(x);
      fail(msg.str());
    }
  }

  // Gradient against central differences.
  for (int k = 0; k < options.gradient_samples; ++k) {
    const Vec x = random_in_ball(rng, plant.n, options.state_radius);
    const Vec g = plant.lyapunov_grad(x);
    const double h = 1e-5 * std::max(1.0, x.norm());
    Vec fd(plant.n);
    for (int i = 0; i < plant.n; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (plant.lyapunov(xp) - plant.lyapunov(xm)) / (2.0 * h);
    }
    const double err = (fd - g).norm() / std::max(1.0, g.norm());
    report.worst_gradient_error = std::max(report.worst_gradient_error, err);
    if (err > 1e-6) {
      fail("Lyapunov gradient disagrees with finite differences at x=" + describe(x));
    }
  }

  // |d(t)| <= D.
  for (int k = 0; k < 10000; ++k) {
    const double t = options.disturbance_horizon * unit(rng);
    const double dn = plant.disturbance_at(t).norm();
    if (dn > big_d * (1.0 + 1e-12) + 1e-15) {
      std::ostringstream msg;
      msg << "|d(t)| = " << dn << " exceeds D = " << big_d << " at t=" << t;
      fail(msg.str());
      break;
    }
  }
  return report;
}

}  // namespace etpc
