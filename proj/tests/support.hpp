// Small helpers shared by the unit tests.
#pragma once

#include "llg/fem.hpp"

#include <memory>
#include <random>

namespace llg::test {

inline std::shared_ptr<const TetMesh> unit_cube(int n) {
  return std::make_shared<const TetMesh>(build_box_mesh(n, n, n, Vec3::Zero(), Vec3::Ones()));
}

inline TetMesh reference_tet() {
  return TetMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, {Tet{0, 1, 2, 3}});
}

inline NodalVectorField random_field(std::size_t n, std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  NodalVectorField f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = Vec3(u(rng), u(rng), u(rng));
  return f;
}

inline NodalVectorField random_unit_field(std::size_t n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  NodalVectorField f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = Vec3(g(rng), g(rng), g(rng)).normalized();
  return f;
}

inline double max_diff(const NodalVectorField& a, const NodalVectorField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).norm());
  return d;
}

}  // namespace llg::test
