#include "etpc/basis.hpp"
#include "etpc/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

using etpc::BasisSet;
using etpc::Mat;
using etpc::Vec;

namespace {

etpc::UniformSignal sampled(double T, int n, const std::function<double(double)>& f) {
  etpc::UniformSignal s;
  s.spacing = T / (n - 1);
  for (int i = 0; i < n; ++i) s.values.push_back(f(i * s.spacing));
  return s;
}

}  // namespace

TEST_CASE("monomial evaluation") {
  CHECK(BasisSet::monomial(3, 1.0).eval(0.0).isApprox(Vec::Unit(4, 0)));
  Vec v(3);
  v << 1, 2, 4;
  CHECK(BasisSet::monomial(2, 1.0).eval(2.0).isApprox(v));
  Vec h(2);
  h << 1, 0.5;
  CHECK(BasisSet::monomial(1, 1.0).eval(0.5).isApprox(h));
}

TEST_CASE("monomial derivative") {
  Vec d(3);
  d << 0, 1, 2;
  CHECK(BasisSet::monomial(2, 1.0).eval_derivative(1.0).isApprox(d));
  CHECK(BasisSet::monomial(0, 1.0).eval_derivative(7.3)[0] == 0.0);
  Vec e(4);
  e << 0, 1, 1, 0.75;
  CHECK(BasisSet::monomial(3, 1.0).eval_derivative(0.5).isApprox(e));
}

TEST_CASE("derivative matches central differences") {
  std::mt19937_64 rng(3);
  const auto basis = BasisSet::monomial(5, 0.8);
  std::uniform_real_distribution<double> tau(0.01, 0.79);
  const double h = 1e-5;
  for (int k = 0; k < 100; ++k) {
    const double t = tau(rng);
    const Vec fd = (basis.eval(t + h) - basis.eval(t - h)) / (2 * h);
    CHECK((fd - basis.eval_derivative(t)).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("monomial Gram closed form") {
  Mat g(2, 2);
  g << 1, 0.5, 0.5, 1.0 / 3.0;
  CHECK(BasisSet::monomial(1, 1.0).gram().isApprox(2 * g, 1e-15));
  CHECK(BasisSet::monomial(0, 0.1).gram()(0, 0) == doctest::Approx(0.2).epsilon(1e-15));

  const auto b = BasisSet::monomial(2, 0.5);
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; j <= 2; ++j)
      CHECK(b.gram()(i, j) ==
            doctest::Approx(2 * std::pow(0.5, i + j + 1) / (i + j + 1)).epsilon(1e-14));
  CHECK((b.gram_quadrature() - b.gram()).norm() <= 1e-10 * b.gram().norm());
}

TEST_CASE("Gram is symmetric positive definite against a Gauss-Legendre oracle") {
  for (int p = 0; p <= 5; ++p) {
    for (double T : {0.05, 0.1, 0.3, 0.6, 1.0}) {
      const auto b = BasisSet::monomial(p, T);
      const Mat ref = oracle::gram([&](double t) { return Vec(b.eval(t)); }, p + 1, T);
      CHECK((b.gram() - ref).norm() <= 1e-12 * ref.norm());
      CHECK((b.gram() - b.gram().transpose()).norm() <= 1e-12 * b.gram().norm());
      Eigen::SelfAdjointEigenSolver<Mat> eig(b.gram());
      CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("signal inner products") {
  const auto b = BasisSet::monomial(1, 1.0);
  Vec ones(2);
  ones << 2, 1;
  CHECK(b.inner_products(sampled(1.0, 201, [](double) { return 1.0; })).isApprox(ones, 1e-14));
  CHECK(b.inner_products(sampled(1.0, 201, [](double) { return 0.0; })).isZero());
  Vec lin(2);
  lin << 1, 2.0 / 3.0;
  CHECK(b.inner_products(sampled(1.0, 201, [](double t) { return t; })).isApprox(lin, 1e-14));
}

TEST_CASE("inner products reject short or mismatched grids") {
  const auto b = BasisSet::monomial(1, 1.0);
  etpc::UniformSignal two{1.0, {0.0, 1.0}};
  CHECK_THROWS_AS(b.inner_products(two), etpc::ResolutionError);
  CHECK_THROWS_AS(b.inner_products(sampled(0.5, 11, [](double) { return 1.0; })), etpc::Error);
  CHECK_THROWS_AS(b.inner_products(sampled(1.0, 10, [](double) { return 1.0; })), etpc::Error);
  const double times[] = {0.0, 0.4, 1.0};
  const double vals[] = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(etpc::uniform_signal(times, vals), etpc::Error);
}

TEST_CASE("Simpson integrates cubics exactly") {
  const auto s = sampled(2.0, 5, [](double t) { return t * t * t - t; });
  CHECK(etpc::simpson(s.values, s.spacing) == doctest::Approx(4.0 - 2.0).epsilon(1e-14));
  const double even[] = {1.0, 2.0};
  CHECK_THROWS_AS(etpc::simpson(even, 1.0), etpc::ResolutionError);
}

TEST_CASE("constructor guards") {
  CHECK_THROWS_AS(BasisSet::monomial(-1, 1.0), etpc::DomainError);
  CHECK_THROWS_AS(BasisSet::monomial(2, 0.0), etpc::DomainError);
  // Hilbert-like growth: high degrees blow the conditioning guard.
  CHECK_THROWS_AS(BasisSet::monomial(9, 1.0), etpc::ConditioningError);
  CHECK_THROWS_AS(BasisSet::monomial(15, 1.0), etpc::Error);
  CHECK(BasisSet::monomial(5, 0.3).equilibrated_condition() < etpc::kMaxGramCondition);
}

TEST_CASE("tabulated basis reproduces the monomials it samples") {
  const double T = 0.5, h = 0.01;
  const int n = 61;  // covers [0, 0.6]
  Mat v(n, 3), d(n, 3);
  for (int k = 0; k < n; ++k) {
    const double t = k * h;
    v.row(k) << 1, t, t * t;
    d.row(k) << 0, 1, 2 * t;
  }
  const auto tab = BasisSet::tabulated(h, v, d, T);
  const auto mono = BasisSet::monomial(2, T);
  CHECK(tab.kind() == BasisSet::Kind::kTabulated);
  CHECK(tab.max_tau() == doctest::Approx(0.6));
  for (double t : {0.0, 0.123, 0.37, 0.5, 0.6}) {
    CHECK((tab.eval(t) - mono.eval(t)).norm() < 1e-12);
    CHECK((tab.eval_derivative(t) - mono.eval_derivative(t)).norm() < 1e-10);
  }
  CHECK((tab.gram() - mono.gram()).norm() < 1e-10 * mono.gram().norm());
  CHECK_THROWS_AS(tab.eval(0.61), etpc::DomainError);
}

TEST_CASE("tabulated validation") {
  const double h = 0.1;
  const int n = 11;
  Mat v(n, 2), d(n, 2);
  for (int k = 0; k < n; ++k) {
    v.row(k) << 1, std::sin(k * h);
    d.row(k) << 0, std::cos(k * h);
  }
  CHECK_NOTHROW(BasisSet::tabulated(h, v, d, 1.0));

  Mat bad_d = d;
  bad_d.col(1) *= 2.0;
  CHECK_THROWS_AS(BasisSet::tabulated(h, v, bad_d, 1.0), etpc::DomainError);

  Mat not_const = v;
  not_const(3, 0) = 1.5;
  CHECK_THROWS_AS(BasisSet::tabulated(h, not_const, d, 1.0), etpc::DomainError);

  Mat dependent = v;
  dependent.col(1).setConstant(2.0);
  Mat dep_d = d;
  dep_d.col(1).setZero();
  CHECK_THROWS_AS(BasisSet::tabulated(h, dependent, dep_d, 1.0), etpc::Error);

  CHECK_THROWS_AS(BasisSet::tabulated(h, v.topRows(2), d.topRows(2), 0.1), etpc::ResolutionError);
}

TEST_CASE("tabulated basis loads from a delimited file") {
  const std::string path = "basis_table_test.csv";
  {
    std::ofstream out(path);
    out << "tau,one,sin\n";
    for (int k = 0; k <= 20; ++k) {
      const double t = k * 0.05;
      out << t << ',' << 1 << ',' << std::sin(t) << ',' << 0 << ',' << std::cos(t) << '\n';
    }
  }
  const auto b = BasisSet::load_tabulated(path, 1.0);
  CHECK(b.count() == 2);
  CHECK(b.names().size() == 2);
  CHECK(b.eval(0.5)[1] == doctest::Approx(std::sin(0.5)).epsilon(1e-6));
  std::remove(path.c_str());
  CHECK_THROWS_AS(BasisSet::load_tabulated("does_not_exist.csv", 1.0), etpc::Error);
}
