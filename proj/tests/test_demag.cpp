#include "llg/demag.hpp"
#include "support.hpp"

#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace llg;

namespace {

// Tensor Gauss-Legendre over the collapsed square; accurate for panels far
// from x compared to their size.
std::array<double, 3> panel_by_tensor_gauss(const Vec3& x, const std::array<Vec3, 3>& tri) {
  using boost::math::quadrature::gauss;
  const Vec3 e1 = tri[1] - tri[0], e2 = tri[2] - tri[0];
  const Vec3 nn = e1.cross(e2);
  const Vec3 n = nn.normalized();
  const double two_area = nn.norm();
  std::array<double, 3> out{};
  for (int j = 0; j < 3; ++j) {
    auto inner = [&](double s) {
      return gauss<double, 30>::integrate(
          [&](double t) {
            const double l1 = s * (1 - t), l2 = s * t, l0 = 1 - l1 - l2;
            const Vec3 y = l0 * tri[0] + l1 * tri[1] + l2 * tri[2];
            const Vec3 d = x - y;
            const double lam = j == 0 ? l0 : (j == 1 ? l1 : l2);
            return d.dot(n) / std::pow(d.norm(), 3) * lam * s * two_area;
          },
          0.0, 1.0);
    };
    out[j] = gauss<double, 30>::integrate(inner, 0.0, 1.0) / (4 * std::numbers::pi);
  }
  return out;
}

}  // namespace

TEST_CASE("solid angle of a cube face seen from the centre") {
  const Vec3 c(0.5, 0.5, 0.5);
  // Face z = 1 split in two, oriented outward (+z).
  const double w = solid_angle(c, Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(1, 1, 1)) +
                   solid_angle(c, Vec3(0, 0, 1), Vec3(1, 1, 1), Vec3(0, 1, 1));
  CHECK(w == doctest::Approx(4 * std::numbers::pi / 6).epsilon(1e-13));
  // Reversed orientation flips the sign; a point in the plane sees nothing.
  CHECK(solid_angle(c, Vec3(0, 0, 1), Vec3(1, 1, 1), Vec3(1, 0, 1)) < 0);
  CHECK(solid_angle(Vec3(5, 5, 1), Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(1, 1, 1)) == 0.0);
}

TEST_CASE("panel integrals against tensor Gauss for separated panels") {
  // Target points sample a parallel panel at least two diameters away.
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1, 1), w(0, 1);
  double worst = 0.0;
  int tested = 0;
  while (tested < 200) {
    const std::array<Vec3, 3> tri{Vec3(u(rng), u(rng), 0), Vec3(u(rng), u(rng), 0), Vec3(u(rng), u(rng), 0)};
    if (((tri[1] - tri[0]).cross(tri[2] - tri[0])).norm() < 1e-2) continue;
    const double diam = std::max({(tri[0] - tri[1]).norm(), (tri[1] - tri[2]).norm(), (tri[2] - tri[0]).norm()});
    const double a = w(rng), b = w(rng) * (1 - a);
    Vec3 x = a * tri[0] + b * tri[1] + (1 - a - b) * tri[2] + Vec3(u(rng), u(rng), 0);
    x.z() = diam * (2.0 + 2.0 * w(rng));
    const auto got = double_layer_panel(x, tri);
    const auto ref = panel_by_tensor_gauss(x, tri);
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(got[j] - ref[j]));
    ++tested;
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("double layer of the constant density on a closed surface") {
  const TetMesh mesh = build_box_mesh(2, 2, 2, Vec3::Zero(), Vec3::Ones());
  const SurfaceMesh s = extract_boundary(mesh);
  auto total = [&](const Vec3& x) {
    double sum = 0.0;
    for (const auto& t : s.triangles) {
      const auto p = double_layer_panel(x, {s.vertices[t[0]], s.vertices[t[1]], s.vertices[t[2]]});
      sum += p[0] + p[1] + p[2];
    }
    return sum;
  };
  CHECK(total(Vec3(0.3, 0.6, 0.45)) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(total(Vec3(0.5, 0.5, 0.02)) == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(std::abs(total(Vec3(2.0, 0.4, 0.5))) < 1e-9);
}

TEST_CASE("surface mass integrates constants and linears") {
  const TetMesh mesh = build_box_mesh(2, 2, 2, Vec3::Zero(), Vec3::Ones());
  const SurfaceMesh s = extract_boundary(mesh);
  const SparseOperator M = assemble_surface_mass(s);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(s.num_nodes());
  CHECK(one.dot(M.apply(one)) == doctest::Approx(6.0).epsilon(1e-13));
  Eigen::VectorXd x(s.num_nodes());
  for (std::size_t l = 0; l < s.num_nodes(); ++l) x[l] = s.vertices[l].x();
  CHECK(one.dot(M.apply(x)) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("tested double layer reproduces the jump of constants") {
  // K 1 = -1/2 on a smooth part of the boundary, so T 1 = -1/2 M 1.
  const TetMesh mesh = build_box_mesh(3, 3, 3, Vec3::Zero(), Vec3::Ones());
  const SurfaceMesh s = extract_boundary(mesh);
  const DoubleLayerMatrix T = assemble_double_layer(s);
  const SparseOperator M = assemble_surface_mass(s);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(s.num_nodes());
  const Eigen::VectorXd lhs = T.tested * one;
  const Eigen::VectorXd rhs = -0.5 * M.apply(one);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("uniform magnetization of a cube") {
  const auto mesh = test::unit_cube(4);
  const auto space = std::make_shared<const FemSpace>(mesh);
  const StrayFieldSolver solver(space);
  for (int c = 0; c < 3; ++c) {
    const Vec3 e = Vec3::Unit(c);
    const NodalVectorField m(space->num_nodes(), e);
    const auto h = solver.stray_field(m);
    Vec3 avg = Vec3::Zero();
    for (std::size_t k = 0; k < h.size(); ++k) avg += h[k] * mesh->element_volumes()[k];
    CHECK(avg[c] == doctest::Approx(-1.0 / 3).epsilon(0.05));
    CHECK(solver.energy_product(m) == doctest::Approx(-1.0 / 3).epsilon(0.05));
  }
}

TEST_CASE("stray field is linear and non-positive") {
  const auto mesh = test::unit_cube(3);
  const auto space = std::make_shared<const FemSpace>(mesh);
  const StrayFieldSolver solver(space);
  std::mt19937 rng(99);
  const auto a = test::random_field(space->num_nodes(), rng);
  const auto b = test::random_field(space->num_nodes(), rng);
  const auto ha = solver.stray_field(a), hb = solver.stray_field(b);
  const auto hab = solver.stray_field(2.0 * a + (-3.0) * b);
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < hab.size(); ++k) {
    worst = std::max(worst, (hab[k] - (2 * ha[k] - 3 * hb[k])).norm());
    scale = std::max(scale, hab[k].norm());
  }
  CHECK(worst <= 1e-9 * scale);

  for (int t = 0; t < 50; ++t) {
    const auto m = test::random_field(space->num_nodes(), rng);
    CHECK(solver.energy_product(m) <= 1e-8);
  }
  const auto zero = solver.stray_field(NodalVectorField(space->num_nodes()));
  for (const auto& v : zero.values()) CHECK(v.norm() == 0.0);
}

TEST_CASE("asymmetry of the discrete stray field decreases under refinement") {
  const auto u_fn = [](const Vec3& x) -> Vec3 { return Vec3(std::cos(2 * x.y()), x.z() * x.x(), 1.0 - x.x()); };
  const auto v_fn = [](const Vec3& x) -> Vec3 { return Vec3(x.y(), std::sin(3 * x.x()), x.z() * x.z()); };
  std::vector<double> asym;
  for (int n : {2, 4}) {
    const auto mesh = test::unit_cube(n);
    const auto space = std::make_shared<const FemSpace>(mesh);
    const StrayFieldSolver solver(space);
    const auto u = interpolate_nodal(u_fn, *mesh), v = interpolate_nodal(v_fn, *mesh);
    const double uv = solver.energy_product(solver.stray_field(u), v);
    const double vu = solver.energy_product(solver.stray_field(v), u);
    asym.push_back(std::abs(uv - vu) / std::abs(uv));
  }
  MESSAGE("relative asymmetry " << asym[0] << " -> " << asym[1]);
  CHECK(asym[1] < asym[0]);
  CHECK(asym[1] < 0.02);
}

TEST_CASE("nodal collocation is selectable") {
  const auto mesh = test::unit_cube(2);
  const auto space = std::make_shared<const FemSpace>(mesh);
  StrayFieldOptions opt;
  opt.double_layer.testing = DoubleLayerTesting::NodalCollocation;
  const StrayFieldSolver solver(space, opt);
  CHECK(solver.double_layer().testing == DoubleLayerTesting::NodalCollocation);
  const NodalVectorField m(space->num_nodes(), Vec3(0, 0, 1));
  CHECK(solver.energy_product(m) < 0.0);
}

TEST_CASE("degenerate surface triangles are rejected") {
  CHECK_THROWS_AS(make_surface({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}, {Tri{0, 1, 2}}), MeshError);
  CHECK_THROWS_AS(double_layer_panel(Vec3(0, 0, 1), {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}), MeshError);
}
