#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace etpc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Uniformly sampled scalar function on [0, spacing * (size - 1)].
struct UniformSignal {
  double spacing = 0.0;
  std::vector<double> values;

  double span() const {
    return values.empty() ? 0.0 : spacing * double(values.size() - 1);
  }
};

/// Builds a UniformSignal from explicit sample times, which must start at 0
/// and be uniformly spaced to 1e-9 relative.
UniformSignal uniform_signal(std::span<const double> times, std::span<const double> values);

/// Composite Simpson rule over uniformly spaced samples. Requires an odd
/// sample count >= 3.
double simpson(std::span<const double> samples, double spacing);

/// Number of samples used when a Gram matrix is assembled by quadrature.
inline constexpr int kGramQuadratureSamples = 2001;

/// Largest accepted condition number of the diagonally equilibrated Gram
/// matrix.
inline constexpr double kMaxGramCondition = 1e12;

/// The family {phi_0, ..., phi_p} the control is expanded in between events,
/// together with the fitting horizon T.
///
/// Two kinds exist. Monomial bases {1, tau, ..., tau^p} are evaluated in
/// closed form for every tau >= 0. Tabulated bases are user functions sampled
/// on a uniform grid with their derivatives; they are evaluated by cubic
/// Hermite interpolation and never extrapolate past the last sample.
///
/// Construction validates: phi_0 is a non-zero constant, the functions are
/// linearly independent on [0, T] (Gram matrix positive definite and not
/// excessively ill-conditioned), and for tabulated data the supplied
/// derivatives agree with finite differences of the values.
class BasisSet {
 public:
  enum class Kind { kMonomial, kTabulated };

  static BasisSet monomial(int degree, double horizon);

  /// `values` and `derivatives` are (samples x count); row k holds the
  /// functions at tau = k * spacing.
  static BasisSet tabulated(double spacing, Mat values, Mat derivatives,
                            double horizon);

  /// Reads the delimited table format: a header naming phi_0..phi_p, then
  /// rows `tau, phi_0, ..., phi_p, dphi_0, ..., dphi_p`.
  static BasisSet load_tabulated(const std::string& path, double horizon);

  Kind kind() const { return kind_; }
  int count() const { return count_; }
  int degree() const { return count_ - 1; }
  double horizon() const { return horizon_; }
  /// Largest tau that can be evaluated; infinity for monomials.
  double max_tau() const;

  Vec eval(double tau) const;
  Vec eval_derivative(double tau) const;

  /// H[i][j] = 2 <phi_i, phi_j>_T. Closed form for monomials, Simpson
  /// quadrature for tabulated bases.
  const Mat& gram() const { return gram_; }

  /// Gram matrix by composite Simpson with `samples` points on [0, T],
  /// regardless of kind.
  Mat gram_quadrature(int samples = kGramQuadratureSamples) const;

  /// Condition number of D^-1/2 H D^-1/2 with D = diag(H).
  double equilibrated_condition() const { return condition_; }

  /// b[j] = 2 <u, phi_j>_T by Simpson on the signal grid, which must cover
  /// exactly [0, T].
  Vec inner_products(const UniformSignal& signal) const;

  /// Basis evaluated at every grid point of a signal with `samples` points
  /// on [0, T]: (samples x count).
  Mat sample_grid(int samples) const;

  const std::vector<std::string>& names() const { return names_; }

 private:
  BasisSet() = default;
  void finalize();
  Mat monomial_gram() const;

  Kind kind_ = Kind::kMonomial;
  int count_ = 0;
  double horizon_ = 0.0;
  // tabulated storage
  double spacing_ = 0.0;
  Mat values_;
  Mat derivatives_;
  std::vector<std::string> names_;

  Mat gram_;
  double condition_ = 0.0;
};

}  // namespace etpc
