#include "etpc/basis.hpp"

#include "etpc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace etpc {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    std::istringstream trim(field);
    std::string token;
    while (trim >> token) out.push_back(token);
  }
  return out;
}

}  // namespace

UniformSignal uniform_signal(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw DomainError("signal times and values differ in length");
  if (times.size() < 3) throw ResolutionError("signal needs at least 3 samples");
  if (times[0] != 0.0) throw ResolutionError("signal grid must start at tau = 0");
  const double spacing = (times.back() - times.front()) / double(times.size() - 1);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - spacing * double(k)) > 1e-9 * std::max(spacing, times.back()))
      throw ResolutionError("signal grid is not uniform at sample " + std::to_string(k));
  }
  return UniformSignal{spacing, std::vector<double>(values.begin(), values.end())};
}

double simpson(std::span<const double> samples, double spacing) {
  const std::size_t n = samples.size();
  if (n < 3 || n % 2 == 0) {
    throw ResolutionError("Simpson quadrature needs an odd number (>= 3) of samples, got " +
                          std::to_string(n));
  }
  if (!(spacing > 0.0)) throw ResolutionError("Simpson quadrature needs positive spacing");
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (k % 2 == 1)
      odd += samples[k];
    else
      even += samples[k];
  }
  return spacing / 3.0 * (samples[0] + 4.0 * odd + 2.0 * even + samples[n - 1]);
}

BasisSet BasisSet::monomial(int degree, double horizon) {
  if (degree < 0) throw DomainError("monomial degree must be >= 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw DomainError("basis horizon must be positive and finite");
  BasisSet b;
  b.kind_ = Kind::kMonomial;
  b.count_ = degree + 1;
  b.horizon_ = horizon;
  for (int j = 0; j <= degree; ++j) b.names_.push_back("tau^" + std::to_string(j));
  b.finalize();
  return b;
}

BasisSet BasisSet::tabulated(double spacing, Mat values, Mat derivatives, double horizon) {
  if (!(spacing > 0.0)) throw DomainError("tabulated basis spacing must be positive");
  if (values.cols() < 1 || values.rows() < 1)
    throw DomainError("tabulated basis needs at least one function");
  if (values.rows() != derivatives.rows() || values.cols() != derivatives.cols())
    throw DomainError("tabulated values and derivatives differ in shape");
  if (!(horizon > 0.0)) throw DomainError("basis horizon must be positive");
  const double last = spacing * double(values.rows() - 1);
  if (horizon > last * (1.0 + 1e-12))
    throw DomainError("tabulated basis does not cover the horizon");
  const auto inside = static_cast<long>(std::floor(horizon / spacing * (1.0 + 1e-12))) + 1;
  if (inside < 3)
    throw ResolutionError("tabulated basis has fewer than 3 samples on [0, T]");

  // phi_0 must be a non-zero constant.
  const double c0 = values(0, 0);
  if (c0 == 0.0) throw DomainError("phi_0 must be a non-zero constant");
  for (Eigen::Index k = 0; k < values.rows(); ++k) {
    if (std::abs(values(k, 0) - c0) > 1e-12 * std::abs(c0) ||
        std::abs(derivatives(k, 0)) > 1e-12 * std::max(1.0, std::abs(c0))) {
      throw DomainError("phi_0 must be a non-zero constant");
    }
  }

  // Supplied derivatives against central differences. The O(h^2) error of
  // the difference is estimated from the second difference of the derivative
  // samples themselves.
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index k = 1; k + 1 < values.rows(); ++k) {
      const double fd = (values(k + 1, j) - values(k - 1, j)) / (2.0 * spacing);
      const double d = derivatives(k, j);
      const double curvature =
          std::abs(derivatives(k + 1, j) - 2.0 * d + derivatives(k - 1, j));
      const double tol = curvature + 1e-6 * (1.0 + std::abs(d));
      if (std::abs(fd - d) > tol) {
        std::ostringstream msg;
        msg << "derivative samples of phi_" << j << " disagree with finite differences at tau="
            << spacing * double(k);
        throw DomainError(msg.str());
      }
    }
  }

  BasisSet b;
  b.kind_ = Kind::kTabulated;
  b.count_ = static_cast<int>(values.cols());
  b.horizon_ = horizon;
  b.spacing_ = spacing;
  b.values_ = std::move(values);
  b.derivatives_ = std::move(derivatives);
  for (int j = 0; j < b.count_; ++j) b.names_.push_back("phi" + std::to_string(j));
  b.finalize();
  return b;
}

BasisSet BasisSet::load_tabulated(const std::string& path, double horizon) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open basis table " + path);
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw ConfigError("basis table " + path + " is empty", line_no);
  if (header.front() == "tau" || header.front() == "t") header.erase(header.begin());

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::vector<double> row;
    for (const auto& tok : split_fields(line)) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ConfigError("basis table " + path + ": bad number '" + tok + "'", line_no);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError("basis table " + path + ": ragged row", line_no);
    if (row.size() < 3 || row.size() % 2 == 0)
      throw ConfigError("basis table " + path + ": expected tau, values and derivatives",
                        line_no);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw ResolutionError("basis table " + path + " has fewer than 2 rows");

  const auto count = static_cast<Eigen::Index>((rows.front().size() - 1) / 2);
  const double spacing = rows[1][0] - rows[0][0];
  if (rows[0][0] != 0.0) throw ConfigError("basis table must start at tau = 0");
  Mat values(static_cast<Eigen::Index>(rows.size()), count);
  Mat derivs(static_cast<Eigen::Index>(rows.size()), count);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double expected = spacing * double(k);
    if (std::abs(rows[k][0] - expected) > 1e-9 * std::max(1.0, expected))
      throw ResolutionError("basis table " + path + " is not uniformly spaced at row " +
                            std::to_string(k + 1));
    for (Eigen::Index j = 0; j < count; ++j) {
      values(Eigen::Index(k), j) = rows[k][std::size_t(1 + j)];
      derivs(Eigen::Index(k), j) = rows[k][std::size_t(1 + count + j)];
    }
  }
  BasisSet b = tabulated(spacing, std::move(values), std::move(derivs), horizon);
  if (header.size() >= std::size_t(count)) b.names_.assign(header.begin(), header.begin() + count);
  return b;
}

double BasisSet::max_tau() const {
  if (kind_ == Kind::kMonomial) return std::numeric_limits<double>::infinity();
  return spacing_ * double(values_.rows() - 1);
}

Vec BasisSet::eval(double tau) const {
  if (!(tau >= 0.0)) throw DomainError("basis evaluated at negative tau");
  Vec out(count_);
  if (kind_ == Kind::kMonomial) {
    double power = 1.0;
    for (int j = 0; j < count_; ++j) {
      out[j] = power;
      power *= tau;
    }
    return out;
  }
  const double last = max_tau();
  if (tau > last * (1.0 + 1e-12))
    throw DomainError("tabulated basis evaluated at tau=" + std::to_string(tau) +
                      " beyond its range " + std::to_string(last));
  const auto rows = values_.rows();
  auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(tau / spacing_), rows - 2);
  const double s = std::clamp((tau - spacing_ * double(k)) / spacing_, 0.0, 1.0);
  const double h00 = 2 * s * s * s - 3 * s * s + 1;
  const double h10 = s * s * s - 2 * s * s + s;
  const double h01 = -2 * s * s * s + 3 * s * s;
  const double h11 = s * s * s - s * s;
  out = h00 * values_.row(k).transpose() + h10 * spacing_ * derivatives_.row(k).transpose() +
        h01 * values_.row(k + 1).transpose() +
        h11 * spacing_ * derivatives_.row(k + 1).transpose();
  return out;
}

Vec BasisSet::eval_derivative(double tau) const {
  if (!(tau >= 0.0)) throw DomainError("basis evaluated at negative tau");
  Vec out(count_);
  if (kind_ == Kind::kMonomial) {
    double power = 1.0;  // tau^(j-1)
    out[0] = 0.0;
    for (int j = 1; j < count_; ++j) {
      out[j] = double(j) * power;
      power *= tau;
    }
    return out;
  }
  const double last = max_tau();
  if (tau > last * (1.0 + 1e-12))
    throw DomainError("tabulated basis evaluated at tau=" + std::to_string(tau) +
                      " beyond its range " + std::to_string(last));
  const auto rows = values_.rows();
  auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(tau / spacing_), rows - 2);
  const double s = std::clamp((tau - spacing_ * double(k)) / spacing_, 0.0, 1.0);
  const double d00 = 6 * s * s - 6 * s;
  const double d10 = 3 * s * s - 4 * s + 1;
  const double d01 = -6 * s * s + 6 * s;
  const double d11 = 3 * s * s - 2 * s;
  out = (d00 * values_.row(k).transpose() + d01 * values_.row(k + 1).transpose()) / spacing_ +
        d10 * derivatives_.row(k).transpose() + d11 * derivatives_.row(k + 1).transpose();
  return out;
}

Mat BasisSet::monomial_gram() const {
  Mat h(count_, count_);
  for (int i = 0; i < count_; ++i)
    for (int j = 0; j < count_; ++j) {
      const int e = i + j + 1;
      h(i, j) = 2.0 * std::pow(horizon_, e) / double(e);
    }
  return h;
}

Mat BasisSet::sample_grid(int samples) const {
  if (samples < 2) throw ResolutionError("basis grid needs at least 2 samples");
  const double step = horizon_ / double(samples - 1);
  Mat grid(samples, count_);
  for (int k = 0; k < samples; ++k) {
    const double tau = k + 1 == samples ? horizon_ : step * double(k);
    grid.row(k) = eval(tau).transpose();
  }
  return grid;
}

Mat BasisSet::gram_quadrature(int samples) const {
  if (samples < 3) throw ResolutionError("Gram quadrature needs at least 3 samples");
  if (samples % 2 == 0) ++samples;
  const Mat grid = sample_grid(samples);
  const double step = horizon_ / double(samples - 1);
  Mat h(count_, count_);
  std::vector<double> prod(static_cast<std::size_t>(samples));
  for (int i = 0; i < count_; ++i)
    for (int j = i; j < count_; ++j) {
      for (int k = 0; k < samples; ++k) prod[std::size_t(k)] = grid(k, i) * grid(k, j);
      h(i, j) = h(j, i) = 2.0 * simpson(prod, step);
    }
  return h;
}

Vec BasisSet::inner_products(const UniformSignal& signal) const {
  const std::size_t n = signal.values.size();
  if (n < 3 || n % 2 == 0)
    throw ResolutionError("signal needs an odd number (>= 3) of samples, got " +
                          std::to_string(n));
  if (!(signal.spacing > 0.0)) throw ResolutionError("signal spacing must be positive");
  if (std::abs(signal.span() - horizon_) > 1e-9 * horizon_)
    throw ResolutionError("signal grid does not cover [0, T]");
  const Mat grid = sample_grid(static_cast<int>(n));
  Vec b(count_);
  std::vector<double> prod(n);
  for (int j = 0; j < count_; ++j) {
    for (std::size_t k = 0; k < n; ++k) prod[k] = signal.values[k] * grid(Eigen::Index(k), j);
    b[j] = 2.0 * simpson(prod, signal.spacing);
  }
  return b;
}

void BasisSet::finalize() {
  gram_ = kind_ == Kind::kMonomial ? monomial_gram() : gram_quadrature();
  const Vec d = gram_.diagonal().cwiseSqrt().cwiseInverse();
  const Mat scaled = d.asDiagonal() * gram_ * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> eig(scaled, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0))
    throw DomainError("basis functions are not linearly independent on [0, T]");
  condition_ = hi / lo;
  if (condition_ > kMaxGramCondition) {
    std::ostringstream msg;
    msg << "basis Gram matrix is too ill-conditioned (equilibrated condition " << condition_
        << " > " << kMaxGramCondition << ")";
    throw ConditioningError(msg.str());
  }
}

}  // namespace etpc
