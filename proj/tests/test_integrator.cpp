#include "llg/integrator.hpp"
#include "macrospin.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace llg;

namespace {

// Smooth non-uniform unit field on the unit cube.
NodalVectorField twisted(const TetMesh& mesh) {
  return interpolate_nodal(
      [](const Vec3& x) -> Vec3 {
        const double a = 1.5 * x.x() + 0.7 * x.z();
        return Vec3(std::cos(a), std::sin(a) * std::cos(x.y()), std::sin(a) * std::sin(x.y())).normalized();
      },
      mesh);
}

}  // namespace

TEST_CASE("config validation") {
  IntegratorConfig cfg;
  cfg.k = 0.1;
  cfg.T = 1.0;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.num_steps() == 10);
  auto bad = cfg;
  bad.k = 0.3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.epsilon = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.output_times = {0.25};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("uniform state without forcing is stationary") {
  const auto space = std::make_shared<const FemSpace>(test::unit_cube(2));
  ContributionSet set(space);
  IntegratorConfig cfg;
  cfg.k = 0.1;
  cfg.T = 0.5;
  const NodalVectorField m0(space->num_nodes(), Vec3(0, 0.6, 0.8));
  const Trajectory traj = integrate(cfg, set, m0);
  CHECK(test::max_diff(traj.final_state(), m0) < 1e-14);
  for (const auto& r : traj.reports()) CHECK(r.sweeps <= 2);
}

TEST_CASE("exchange-only relaxation preserves norms and dissipates energy") {
  const auto space = std::make_shared<const FemSpace>(test::unit_cube(3));
  ContributionSet set(space);
  IntegratorConfig cfg;
  cfg.k = 0.005;
  cfg.T = 0.1;
  cfg.c_ex = 0.5;
  cfg.epsilon = 1e-11;
  const auto m0 = twisted(*space->mesh);
  const Trajectory traj = integrate(cfg, set, m0);
  const auto& series = traj.series();
  REQUIRE(series.size() == static_cast<std::size_t>(cfg.num_steps() + 1));
  std::vector<EnergyBalance> balances;
  for (std::size_t i = 1; i < series.size(); ++i) {
    CHECK(series[i].energy.total() <= series[i - 1].energy.total() + 1e-12);
    CHECK(series[i].norm_dev_max < 1e-9);
    CHECK(std::abs(series[i].energy_residual) < 1e-8);
    CHECK(series[i].t == doctest::Approx(i * cfg.k));
  }
  for (const auto& r : traj.reports()) balances.push_back(r.balance);
  CHECK(std::abs(cumulative_balance_defect(cfg.c_ex, cfg.alpha, cfg.k, balances)) < 1e-12);
  CHECK(series.back().energy.total() < series.front().energy.total());
}

TEST_CASE("stray-solve counts per strategy") {
  const auto space = std::make_shared<const FemSpace>(test::unit_cube(2));
  ContributionSet set(space);
  set.enable_stray_field(std::make_shared<const StrayFieldSolver>(space));
  set.set_applied_field(Vec3(-2, -0.5, 0));
  IntegratorConfig cfg;
  cfg.k = 0.01;
  cfg.T = 0.05;
  const NodalVectorField m0(space->num_nodes(), Vec3(1, 0, 0));
  for (auto s : {PiStrategy::Midpoint, PiStrategy::AdamsBashforth, PiStrategy::ExplicitEuler}) {
    cfg.strategy = s;
    const Trajectory traj = integrate(cfg, set, m0);
    for (const auto& r : traj.reports()) {
      CHECK(r.stray_solves_other == 1);
      if (s == PiStrategy::Midpoint) CHECK(r.stray_solves_loop == r.sweeps);
      else CHECK(r.stray_solves_loop == 0);
      CHECK(r.residual <= cfg.epsilon);
    }
  }
}

TEST_CASE("sweep failure raises StepError") {
  const auto space = std::make_shared<const FemSpace>(test::unit_cube(2));
  ContributionSet set(space);
  set.set_applied_field(Vec3(-2, -0.5, 0));
  IntegratorConfig cfg;
  cfg.k = 0.1;
  cfg.T = 0.1;
  cfg.max_sweeps = 1;
  cfg.epsilon = 1e-14;
  try {
    integrate(cfg, set, twisted(*space->mesh));
    FAIL("expected StepError");
  } catch (const StepError& e) {
    CHECK(e.step() == 0);
    CHECK(e.residual_history().size() == 1);
  }
}

TEST_CASE("trajectory storage and reconstruction") {
  NodalVectorField a(2, Vec3(1, 0, 0)), b(2, Vec3(0, 1, 0)), c(2, Vec3(0, 0, 1));
  Trajectory traj(0.5, 2, a);
  traj.store(0, a);
  traj.store(1, b);
  traj.store(2, c);
  CHECK(traj.state(-1)[0] == a[0]);
  CHECK(traj.reconstruct(Reconstruction::Left, 0.6)[0] == b[0]);
  CHECK(traj.reconstruct(Reconstruction::Right, 0.6)[0] == c[0]);
  CHECK((traj.reconstruct(Reconstruction::Mean, 0.1)[1] - Vec3(0.5, 0.5, 0)).norm() < 1e-15);
  CHECK((traj.reconstruct(Reconstruction::Linear, 0.125)[1] - Vec3(0.75, 0.25, 0)).norm() < 1e-15);
  CHECK(traj.reconstruct(Reconstruction::Lagged, 0.75)[0] == a[0]);
  CHECK_THROWS_AS(traj.reconstruct(Reconstruction::Lagged, 0.2), std::out_of_range);
  CHECK_THROWS_AS(traj.reconstruct(Reconstruction::Left, 1.0), std::out_of_range);
  CHECK_THROWS_AS(traj.reconstruct(Reconstruction::Left, -0.1), std::out_of_range);
  Trajectory sparse(0.5, 2, a);
  sparse.store(0, a);
  CHECK_THROWS_AS(sparse.state(1), std::out_of_range);
}

TEST_CASE("stored output times") {
  const auto space = std::make_shared<const FemSpace>(test::unit_cube(1));
  ContributionSet set(space);
  set.set_applied_field(Vec3(0, 0, 1));
  IntegratorConfig cfg;
  cfg.k = 0.1;
  cfg.T = 1.0;
  cfg.output_times = {0.5};
  const Trajectory traj = integrate(cfg, set, NodalVectorField(space->num_nodes(), Vec3(1, 0, 0)));
  CHECK(traj.has_state(0));
  CHECK(traj.has_state(5));
  CHECK(traj.has_state(10));
  CHECK_FALSE(traj.has_state(3));
}

TEST_CASE("macrospin against an adaptive Runge-Kutta reference") {
  const test::Macrospin p;
  const Vec3 ref = test::macrospin_reference(p);
  CHECK(ref.norm() == doctest::Approx(1.0).epsilon(1e-10));
  const std::vector<double> ks{0.05, 0.025, 0.0125};
  for (auto s : {PiStrategy::Midpoint, PiStrategy::AdamsBashforth, PiStrategy::ExplicitEuler}) {
    std::vector<double> errs;
    for (double k : ks) errs.push_back(test::macrospin_error(p, k, s, ref));
    const double order = fit_order(ks, errs);
    if (s == PiStrategy::ExplicitEuler) CHECK(order == doctest::Approx(1.0).epsilon(0.3));
    else CHECK(order == doctest::Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("reference error on shared times") {
  const auto space = std::make_shared<const FemSpace>(test::unit_cube(1));
  NodalVectorField a(space->num_nodes(), Vec3(1, 0, 0)), b(space->num_nodes(), Vec3(0, 1, 0));
  Trajectory fine(0.25, 4, a), coarse(0.5, 2, a);
  for (int i = 0; i <= 4; ++i) fine.store(i, a);
  coarse.store(0, a);
  coarse.store(1, a);
  coarse.store(2, b);
  CHECK(reference_error(fine, coarse, space->mass) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}
