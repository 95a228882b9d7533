#include "etpc/qpfit.hpp"

#include "etpc/errors.hpp"

#include <cmath>
#include <ostream>

namespace etpc {

std::string_view to_string(ActiveCase c) {
  switch (c) {
    case ActiveCase::kInterior: return "interior";
    case ActiveCase::kUpperActive: return "upper_active";
    case ActiveCase::kLowerActive: return "lower_active";
    case ActiveCase::kPinned: return "pinned";
  }
  return "unknown";
}

FitProblem assemble(const BasisSet& basis, const UniformSignal& u_hat, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("band half-width must be >= 0");
  if (u_hat.values.empty()) throw ResolutionError("empty model signal");
  FitProblem p;
  p.hessian = basis.gram();
  p.linear = basis.inner_products(u_hat);
  std::vector<double> sq(u_hat.values.size());
  for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = u_hat.values[k] * u_hat.values[k];
  p.constant = simpson(sq, u_hat.spacing);
  const Vec phi0 = basis.eval(0.0);
  p.normals.resize(basis.count(), 2);
  p.normals.col(0) = phi0;
  p.normals.col(1) = -phi0;
  const double u0 = u_hat.values.front();
  p.bounds = Eigen::Vector2d(u0 + eta, -u0 + eta);
  return p;
}

double objective(const FitProblem& problem, const Vec& a) {
  return 0.5 * a.dot(problem.hessian * a) - problem.linear.dot(a) + problem.constant;
}

Vec zoh_fallback(double u_hat_0, const BasisSet& basis) {
  Vec a = Vec::Zero(basis.count());
  a[0] = u_hat_0 / basis.eval(0.0)[0];
  return a;
}

namespace {

// The problem in Jacobi-scaled coordinates a = S a_s, S = diag(H)^-1/2.
// Monomial Gram matrices span many orders of magnitude on their diagonal;
// the scaled Hessian has unit diagonal.
struct ScaledProblem {
  Vec scale;
  Mat hessian;
  Vec linear;
  Mat normals;
};

ScaledProblem rescale(const FitProblem& p) {
  ScaledProblem s;
  s.scale = p.hessian.diagonal().cwiseSqrt().cwiseInverse();
  s.hessian = s.scale.asDiagonal() * p.hessian * s.scale.asDiagonal();
  s.linear = s.scale.cwiseProduct(p.linear);
  s.normals = s.scale.asDiagonal() * p.normals;
  return s;
}

// [[H, y], [y', 0]] [a; mu] = [b; z]
std::pair<Vec, double> bordered_solve(const ScaledProblem& s, int column, double bound) {
  const auto n = s.hessian.rows();
  Mat k = Mat::Zero(n + 1, n + 1);
  k.topLeftCorner(n, n) = s.hessian;
  k.topRightCorner(n, 1) = s.normals.col(column);
  k.bottomLeftCorner(1, n) = s.normals.col(column).transpose();
  Vec rhs(n + 1);
  rhs.head(n) = s.linear;
  rhs[n] = bound;
  Eigen::PartialPivLU<Mat> lu(k);
  if (!(lu.rcond() > 1e-14)) {
    throw ConditioningError("bordered KKT system is singular (rcond " +
                            std::to_string(lu.rcond()) + ")");
  }
  const Vec sol = lu.solve(rhs);
  return {s.scale.cwiseProduct(sol.head(n)), sol[n]};
}

bool satisfies(const FitProblem& p, const Vec& a, int column) {
  return p.normals.col(column).dot(a) <= p.bounds[column] + kFeasibilityTolerance;
}

}  // namespace

FitSolution solve(const FitProblem& problem) {
  const auto n = problem.hessian.rows();
  if (n < 1 || problem.hessian.cols() != n || problem.linear.size() != n ||
      problem.normals.rows() != n || problem.normals.cols() != 2) {
    throw DomainError("fit problem dimensions are inconsistent");
  }
  if (problem.bounds.sum() < 0.0) throw DomainError("fit problem band is empty (eta < 0)");

  const ScaledProblem scaled = rescale(problem);
  FitSolution out;

  if (problem.bounds.sum() == 0.0) {
    auto [a, mu] = bordered_solve(scaled, 0, problem.bounds[0]);
    out.coefficients = std::move(a);
    out.active_case = ActiveCase::kPinned;
    out.multiplier = mu;
    return out;
  }

  Eigen::LLT<Mat> chol(scaled.hessian);
  if (chol.info() != Eigen::Success) throw ConditioningError("fit Hessian is not positive definite");
  const Vec interior = scaled.scale.cwiseProduct(chol.solve(scaled.linear));
  if (satisfies(problem, interior, 0) && satisfies(problem, interior, 1)) {
    out.coefficients = interior;
    out.active_case = ActiveCase::kInterior;
    out.multiplier = 0.0;
    return out;
  }

  for (int column : {0, 1}) {
    auto [a, mu] = bordered_solve(scaled, column, problem.bounds[column]);
    if (mu >= -kFeasibilityTolerance && satisfies(problem, a, 1 - column)) {
      out.coefficients = std::move(a);
      out.active_case = column == 0 ? ActiveCase::kUpperActive : ActiveCase::kLowerActive;
      out.multiplier = std::max(mu, 0.0);
      return out;
    }
  }
  throw InconsistencyError("no KKT case satisfies its conditions");
}

void dump(std::ostream& out, const FitProblem& problem, const FitSolution& solution) {
  const auto prec = out.precision(17);
  auto row = [&](const char* key, const auto& v) {
    out << key << " =";
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ", " : " ") << v[i];
    out << '\n';
  };
  for (Eigen::Index i = 0; i < problem.hessian.rows(); ++i) {
    out << "H" << i << " =";
    for (Eigen::Index j = 0; j < problem.hessian.cols(); ++j)
      out << (j ? ", " : " ") << problem.hessian(i, j);
    out << '\n';
  }
  row("b", problem.linear);
  out << "c = " << problem.constant << '\n';
  row("y1", Vec(problem.normals.col(0)));
  row("y2", Vec(problem.normals.col(1)));
  row("z", problem.bounds);
  row("a", solution.coefficients);
  out << "case = " << to_string(solution.active_case) << '\n';
  out << "multiplier = " << solution.multiplier << '\n';
  out << "objective = " << objective(problem, solution.coefficients) << '\n';
  out.precision(prec);
}

}  // namespace etpc
