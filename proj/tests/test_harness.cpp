#include "etpc/errors.hpp"
#include "etpc/harness.hpp"

#include <doctest.h>

#include <sstream>

using etpc::ControllerMode;
using etpc::Vec;

TEST_CASE("sphere samples") {
  const auto pts = etpc::sample_unit_sphere(3, 10000, 1.0, 5);
  REQUIRE(pts.size() == 10000);
  Vec mean = Vec::Zero(3);
  for (const auto& p : pts) {
    CHECK(std::abs(p.norm() - 1.0) <= 1e-12);
    mean += p;
  }
  mean /= 10000.0;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i]) <= 3.0 / std::sqrt(10000.0));

  const auto again = etpc::sample_unit_sphere(3, 10000, 1.0, 5);
  CHECK(again == pts);
  CHECK(etpc::sample_unit_sphere(3, 10, 1.0, 6) != etpc::sample_unit_sphere(3, 10, 1.0, 5));
  for (const auto& p : etpc::sample_unit_sphere(2, 50, 2.5, 1)) CHECK(p.norm() == doctest::Approx(2.5));
  CHECK_THROWS_AS(etpc::sample_unit_sphere(3, 0, 1.0, 1), etpc::DomainError);
}

TEST_CASE("inter-event statistics") {
  const std::vector<double> a{0, 1, 2, 3};
  auto s = etpc::iet_stats(a, 100);
  CHECK(s.aiet == doctest::Approx(1.0));
  CHECK(s.miet == doctest::Approx(1.0));
  CHECK(s.gaps == 3);

  const std::vector<double> b{0, 0.5, 2.0};
  s = etpc::iet_stats(b, 100);
  CHECK(s.aiet == doctest::Approx(1.0));
  CHECK(s.miet == doctest::Approx(0.5));

  const std::vector<double> c{0, 1, 2, 3, 4};
  s = etpc::iet_stats(c, 2);
  CHECK(s.aiet == doctest::Approx(1.0));
  CHECK(s.gaps == 2);

  const std::vector<double> one{0};
  CHECK_THROWS_AS(etpc::iet_stats(one, 100), etpc::InsufficientEventsError);
}

TEST_CASE("statistics do not depend on logging density") {
  const auto plant = etpc::preset_lorenz();
  const auto basis = etpc::BasisSet::monomial(3, 0.4);
  const auto trig = etpc::StaticEtrConfig::make(plant, 0.4, 0.25);
  etpc::SimConfig sim;
  sim.t_max = 5;
  Vec x0(3);
  x0 << 0.6, 0.0, 0.8;
  const auto dense = etpc::run_closed_loop(plant, basis, sim, trig, {}, x0);
  sim.record_samples = false;
  const auto sparse = etpc::run_closed_loop(plant, basis, sim, trig, {}, x0);
  const auto a = etpc::iet_stats(dense, 100), b = etpc::iet_stats(sparse, 100);
  CHECK(a.aiet == b.aiet);
  CHECK(a.miet == b.miet);
}

TEST_CASE("spec validation and hashing") {
  etpc::ExperimentSpec s;
  CHECK_NOTHROW(s.validate());
  CHECK(s.hash().size() == 16);
  auto t = s;
  t.seed = 2;
  CHECK(t.hash() != s.hash());
  t = s;
  t.initial_conditions = 0;
  CHECK_THROWS_AS(t.validate(), etpc::DomainError);
  t = s;
  t.horizons.clear();
  CHECK_THROWS_AS(t.validate(), etpc::DomainError);
}

TEST_CASE("small sweep: shape, reductions and determinism") {
  etpc::ExperimentSpec s;
  s.initial_conditions = 4;
  s.events_cap = 20;
  s.horizons = {0.4, 0.8};
  s.degrees = {3};
  s.modes = {ControllerMode::kEtpcStatic, ControllerMode::kZohStatic};
  s.threads = 2;
  const auto r = etpc::sweep(s);
  CHECK(r.rows.size() == 4);
  CHECK(r.runs.size() == 16);
  for (const auto& row : r.rows) {
    CHECK(row.runs_used + row.runs_insufficient + row.runs_failed == 4);
    CHECK(row.miet > 0.0);
    CHECK(row.miet <= row.aiet);
    double mean = 0.0, low = 1e300;
    std::size_t used = 0;
    for (const auto& run : r.runs)
      if (run.mode == row.mode && run.horizon == row.horizon && run.degree == row.degree && !run.failed &&
          run.gaps > 0) {
        mean += run.aiet;
        low = std::min(low, run.miet);
        ++used;
      }
    CHECK(row.aiet == doctest::Approx(mean / double(used)));
    CHECK(row.miet == low);
  }
  CHECK(r.row(ControllerMode::kZohStatic, 0.8, 3).mode == ControllerMode::kZohStatic);
  CHECK_THROWS_AS(r.row(ControllerMode::kEtpcDynamic, 0.8, 3), etpc::DomainError);

  auto single = s;
  single.threads = 1;
  const auto r2 = etpc::sweep(single);
  std::ostringstream a, b, c, d;
  etpc::write_table_csv(a, r);
  etpc::write_table_csv(b, r2);
  CHECK(a.str() == b.str());
  etpc::write_runs_jsonl(c, r);
  etpc::write_runs_jsonl(d, r2);
  CHECK(c.str() == d.str());
  CHECK(c.str().find(r.spec_hash) != std::string::npos);
}

TEST_CASE("compare layout names the three methods") {
  etpc::ExperimentSpec s;
  s.initial_conditions = 2;
  s.events_cap = 10;
  s.horizons = {0.3};
  s.degrees = {5};
  const auto r = etpc::compare_methods(s);
  REQUIRE(r.rows.size() == 3);
  std::ostringstream out;
  etpc::write_compare_layout_csv(out, r);
  for (const char* name : {"DETC-ZOH", "ETPC-static", "ETPC-dynamic", "AIET", "MIET"})
    CHECK(out.str().find(name) != std::string::npos);
}
