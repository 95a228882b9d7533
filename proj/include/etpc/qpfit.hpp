#pragma once

#include "etpc/basis.hpp"

#include <iosfwd>
#include <string_view>

namespace etpc {

/// min J(a) = 1/2 a'Ha - b'a + c  s.t.  y'a <= z
///
/// y = [phi(0), -phi(0)] and z = [u_hat(0) + eta, -u_hat(0) + eta], i.e. the
/// fitted signal must start within eta of u_hat(0).
struct FitProblem {
  Mat hessian;       // (p+1) x (p+1), positive definite
  Vec linear;        // b
  double constant;   // c
  Mat normals;       // y, (p+1) x 2
  Eigen::Vector2d bounds;  // z
};

enum class ActiveCase { kInterior, kUpperActive, kLowerActive, kPinned };

std::string_view to_string(ActiveCase c);

struct FitSolution {
  Vec coefficients;
  ActiveCase active_case = ActiveCase::kInterior;
  double multiplier = 0.0;  // of the active constraint; 0 when interior
};

/// Absolute tolerance on constraint residuals and multiplier signs.
inline constexpr double kFeasibilityTolerance = 1e-9;

/// Builds the problem for one input channel from the model-predicted signal
/// (covering [0, T] on the basis' quadrature grid) and the band half-width
/// eta >= 0.
FitProblem assemble(const BasisSet& basis, const UniformSignal& u_hat, double eta);

/// Unique minimizer by KKT case enumeration: the unconstrained minimizer if
/// it satisfies the band, otherwise the bordered solve on the upper, then the
/// lower constraint. eta = 0 collapses the band to an equality ("pinned").
///
/// Throws ConditioningError for singular bordered systems and
/// InconsistencyError if no candidate satisfies the KKT conditions.
FitSolution solve(const FitProblem& problem);

double objective(const FitProblem& problem, const Vec& a);

/// [u_hat(0) / phi_0(0), 0, ..., 0]: the zero-order hold, always feasible.
Vec zoh_fallback(double u_hat_0, const BasisSet& basis);

/// Writes the problem data and its solution as an INI-style block.
void dump(std::ostream& out, const FitProblem& problem, const FitSolution& solution);

}  // namespace etpc
