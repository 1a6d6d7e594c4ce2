#include "llg/contributions.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace llg;

namespace {

std::shared_ptr<const FemSpace> cube_space(int n) {
  return std::make_shared<const FemSpace>(test::unit_cube(n));
}

}  // namespace

TEST_CASE("strategy names") {
  CHECK(parse_strategy("MP") == PiStrategy::Midpoint);
  CHECK(parse_strategy("adams-bashforth") == PiStrategy::AdamsBashforth);
  CHECK(parse_strategy("ee") == PiStrategy::ExplicitEuler);
  CHECK_THROWS_AS(parse_strategy("rk4"), std::invalid_argument);
  for (auto s : {PiStrategy::Midpoint, PiStrategy::AdamsBashforth, PiStrategy::ExplicitEuler})
    CHECK(parse_strategy(to_string(s)) == s);
}

TEST_CASE("contribution validation") {
  ContributionSet set(cube_space(1));
  CHECK_THROWS_AS(set.enable_anisotropy(Vec3(1, 1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(set.enable_zhang_li(ZhangLi{Vec3(1, 0, 0), 0.0, {}}), std::invalid_argument);
  CHECK_FALSE(set.has_lower_order());
  set.enable_anisotropy(Vec3(0, 0, 1));
  CHECK(set.has_lower_order());
  CHECK(set.all_linear_self_adjoint());
  set.enable_zhang_li(ZhangLi{Vec3(1, 0, 0), 0.05, {}});
  CHECK_FALSE(set.all_linear_self_adjoint());
}

TEST_CASE("anisotropy field") {
  const auto space = cube_space(2);
  ContributionSet set(space);
  set.enable_anisotropy(Vec3(1, 0, 0));
  const NodalVectorField m(space->num_nodes(), Vec3(0.5, 0.5, 0));
  const auto p = pi_h(set, m);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK((p[i] - Vec3(0.5, 0, 0)).norm() < 1e-13);

  // Self-adjoint in the L2 sense: <pi u, v> = <u, pi v>, with <P_h g, v>_h = <g, v>.
  std::mt19937 rng(1);
  const auto u = test::random_field(space->num_nodes(), rng);
  const auto v = test::random_field(space->num_nodes(), rng);
  CHECK(inner_h(pi_h(set, u), v, space->weights) ==
        doctest::Approx(inner_h(u, pi_h(set, v), space->weights)).epsilon(1e-12));
}

TEST_CASE("Zhang-Li field") {
  const auto space = cube_space(3);
  ContributionSet set(space);
  set.enable_zhang_li(ZhangLi{Vec3(0.3, -0.2, 0.1), 0.05, {}});
  const NodalVectorField c(space->num_nodes(), Vec3(0, 0.6, 0.8));
  const auto p = pi_h(set, c);
  for (const auto& v : p.values()) CHECK(v.norm() < 1e-14);

  std::mt19937 rng(4);
  const auto m = test::random_unit_field(space->num_nodes(), rng);
  const auto [cross, adiabatic] = zhang_li_element_parts(*space, *set.zhang_li(), m);
  const auto mbar = element_average(*space->mesh, m);
  for (std::size_t e = 0; e < cross.size(); ++e) CHECK(std::abs(cross[e].dot(mbar[e])) < 1e-12);

  // The cross part is nonlinear: pi(2m) = 4 cross + 2 xi d.
  const auto p1 = evaluate_pi(set, m);
  const auto p2 = evaluate_pi(set, 2.0 * m);
  const auto cross_h = project_Ph(cross, *space->mesh, space->weights);
  const auto adia_h = project_Ph(adiabatic, *space->mesh, space->weights);
  CHECK(test::max_diff(p1.nonlinear, cross_h + adia_h) < 1e-12);
  CHECK(test::max_diff(p2.nonlinear, 4.0 * cross_h + 2.0 * adia_h) < 1e-11);
  CHECK(p1.stray_solves == 0);
}

TEST_CASE("Zhang-Li with a linear magnetization profile") {
  const auto space = cube_space(2);
  ContributionSet set(space);
  const Vec3 v(1, 0, 0);
  set.enable_zhang_li(ZhangLi{v, 0.5, {}});
  // m = (x, 1, 0) is not unit but exercises the exact derivative: (v.grad)m = (1, 0, 0).
  const auto m = interpolate_nodal([](const Vec3& x) { return Vec3(x.x(), 1, 0); }, *space->mesh);
  const auto [cross, adiabatic] = zhang_li_element_parts(*space, *set.zhang_li(), m);
  const auto mbar = element_average(*space->mesh, m);
  for (std::size_t e = 0; e < cross.size(); ++e) {
    CHECK((adiabatic[e] - Vec3(0.5, 0, 0)).norm() < 1e-12);
    CHECK((cross[e] - mbar[e].cross(Vec3(1, 0, 0))).norm() < 1e-12);
  }
}

TEST_CASE("combine_pi strategies") {
  const auto space = cube_space(2);
  ContributionSet set(space);
  set.enable_anisotropy(Vec3(1, 0, 0));
  const std::size_t n = space->num_nodes();
  const NodalVectorField curr(n, Vec3(1, 0, 0)), prev(n, Vec3(0, 1, 0)), next(n, Vec3(0, 0, 1));
  const auto ab = combine_pi(PiStrategy::AdamsBashforth, set, next, curr, prev);
  for (const auto& v : ab.values()) CHECK((v - Vec3(1.5, 0, 0)).norm() < 1e-13);

  std::mt19937 rng(9);
  const auto a = test::random_field(n, rng), b = test::random_field(n, rng), c = test::random_field(n, rng);
  const auto ee1 = combine_pi(PiStrategy::ExplicitEuler, set, a, b, c);
  const auto ee2 = combine_pi(PiStrategy::ExplicitEuler, set, test::random_field(n, rng), b,
                              test::random_field(n, rng));
  for (std::size_t i = 0; i < n; ++i) CHECK(ee1[i] == ee2[i]);

  const auto mp = combine_pi(PiStrategy::Midpoint, set, b, b, c);
  CHECK(test::max_diff(mp, pi_h(set, b)) < 1e-15);

  // Affine weights 3/2, -1/2 probed through the linear anisotropy term.
  const auto ab2 = combine_pi(PiStrategy::AdamsBashforth, set, a, b, c);
  CHECK(test::max_diff(ab2, 1.5 * pi_h(set, b) + (-0.5) * pi_h(set, c)) < 1e-13);
}

TEST_CASE("stray contribution") {
  const auto space = cube_space(4);
  ContributionSet set(space);
  set.enable_stray_field(std::make_shared<const StrayFieldSolver>(space));
  const NodalVectorField m(space->num_nodes(), Vec3(0, 1, 0));
  const auto pv = evaluate_pi(set, m);
  CHECK(pv.stray_solves == 1);
  CHECK(pv.stray_seconds >= 0.0);
  const Vec3 avg = [&] {
    Vec3 s = Vec3::Zero();
    for (std::size_t i = 0; i < m.size(); ++i) s += space->weights.beta[i] * pv.linear[i];
    return s;
  }();
  CHECK(avg.y() == doctest::Approx(-1.0 / 3).epsilon(0.05));
}

TEST_CASE("applied field sampling") {
  const auto space = cube_space(1);
  ContributionSet set(space);
  set.set_applied_field(Vec3(-2, -0.5, 0));
  CHECK(set.applied_field_is_constant());
  auto f = sample_applied_field(set, *space->mesh, 0.3, 0.1);
  for (const auto& v : f.values()) CHECK(v == Vec3(-2, -0.5, 0));

  const Vec3 c(1, 2, 3);
  set.set_applied_field([c](const Vec3&, double t) -> Vec3 { return t * c; });
  CHECK_FALSE(set.applied_field_is_constant());
  f = sample_applied_field(set, *space->mesh, 0.0, 2.0);
  for (const auto& v : f.values()) CHECK((v - c).norm() < 1e-15);

  ContributionSet none(space);
  f = sample_applied_field(none, *space->mesh, 0.0, 1.0);
  for (const auto& v : f.values()) CHECK(v.norm() == 0.0);
}
