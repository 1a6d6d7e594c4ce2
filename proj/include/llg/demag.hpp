// Stray field -grad(u) of a magnetization via the hybrid FEM-BEM split
// u = u1 + u2: a pure-Neumann FEM solve for u1, boundary data for u2 from
// the double-layer operator, and a harmonic (Dirichlet) extension for u2.
#pragma once

#include "llg/fem.hpp"
#include "llg/linsolve.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>

namespace llg {

/// How the double-layer operator is tested against boundary hat functions.
enum class DoubleLayerTesting {
  /// Outer quadrature over each boundary triangle (Galerkin with a quadrature
  /// rule in the test variable). Collocation points are always interior to
  /// a flat face, so the jump term -1/2 is exact there.
  Galerkin,
  /// Point evaluation at boundary nodes, then mass-matrix testing of the
  /// nodal interpolant. Edge and corner nodes see their true solid angle.
  NodalCollocation,
};

struct DoubleLayerOptions {
  int quadrature_order = 5;  // 1, 2 or 5: exactness degree of the triangle rule
  DoubleLayerTesting testing = DoubleLayerTesting::Galerkin;
  double near_ratio = 0.25;  // subdivide while diam(panel) > near_ratio * dist(x, panel)
  int max_depth = 10;
  int threads = 1;
};

/// Dense matrix T with T(l, l') = int phi_l (K phi_l') dS, i.e. the
/// double-layer operator K tested against boundary hat functions.
struct DoubleLayerMatrix {
  Eigen::MatrixXd tested;
  DoubleLayerTesting testing = DoubleLayerTesting::Galerkin;
  int quadrature_order = 5;

  Eigen::Index size() const { return tested.rows(); }
};

/// Signed solid angle subtended at x by the triangle (y0, y1, y2); positive
/// when the right-hand normal of the triangle points away from x.
double solid_angle(const Vec3& x, const Vec3& y0, const Vec3& y1, const Vec3& y2);

/// Double-layer potential at x of the three linear densities on a flat
/// triangle: entry j is (1/4pi) int_T (x-y).n(y) / |x-y|^3 lambda_j(y) dS(y),
/// with n the right-hand unit normal. Exactly zero when x lies in the
/// triangle's plane. The constant part is integrated in closed form (solid
/// angle); the linear remainder by adaptively subdivided quadrature.
std::array<double, 3> double_layer_panel(const Vec3& x, const std::array<Vec3, 3>& tri,
                                         const DoubleLayerOptions& opt = {});

/// Consistent P1 mass matrix of the boundary surface.
SparseOperator assemble_surface_mass(const SurfaceMesh& surface);

/// Throws MeshError on a degenerate triangle.
DoubleLayerMatrix assemble_double_layer(const SurfaceMesh& surface,
                                        const DoubleLayerOptions& opt = {});

struct StrayFieldOptions {
  DoubleLayerOptions double_layer;
  SolverConfig neumann{1e-12, 1e-15, 20000};
  SolverConfig projection{1e-12, 1e-15, 20000};
  SolverConfig dirichlet{1e-12, 1e-15, 20000};
};

/// Intermediate potentials of one stray-field evaluation (for inspection).
struct StrayFieldParts {
  Eigen::VectorXd u1;
  Eigen::VectorXd g;  // boundary-local Dirichlet datum of u2
  Eigen::VectorXd u2;
  ElementVectorField field;
};

/// All data needed to evaluate the stray field on one mesh; immutable after
/// construction and safe to share between threads.
class StrayFieldSolver {
 public:
  StrayFieldSolver(std::shared_ptr<const FemSpace> space, StrayFieldOptions opt = {});

  /// -grad(u1 + u2) per element.
  ElementVectorField stray_field(const NodalVectorField& m) const;
  StrayFieldParts solve(const NodalVectorField& m) const;

  /// <pi(m), m> = int (-grad u) . m dx. Non-positive up to discretization error.
  double energy_product(const NodalVectorField& m) const;
  double energy_product(const ElementVectorField& field, const NodalVectorField& m) const;

  const FemSpace& space() const { return *space_; }
  const SurfaceMesh& surface() const { return surface_; }
  const DoubleLayerMatrix& double_layer() const { return dl_; }
  const SparseOperator& surface_mass() const { return surface_mass_; }

 private:
  std::shared_ptr<const FemSpace> space_;
  StrayFieldOptions opt_;
  SurfaceMesh surface_;
  DoubleLayerMatrix dl_;
  SparseOperator surface_mass_;
  Eigen::MatrixXd boundary_operator_;  // tested(K) - 1/2 M_surface
  DirichletSolver dirichlet_;
};

ElementVectorField stray_field(const StrayFieldSolver& solver, const NodalVectorField& m);
double stray_energy_product(const StrayFieldSolver& solver, const NodalVectorField& m);

}  // namespace llg
