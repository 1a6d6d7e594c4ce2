// Lowest-order (P1) finite element machinery on tetrahedral meshes.
#pragma once

#include "llg/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <vector>

namespace llg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// One 3-vector per mesh node (an element of the vector-valued P1 space).
class NodalVectorField {
 public:
  NodalVectorField() = default;
  explicit NodalVectorField(std::size_t n, const Vec3& value = Vec3::Zero())
      : values_(n, value) {}
  explicit NodalVectorField(std::vector<Vec3> values) : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  Vec3& operator[](std::size_t i) { return values_[i]; }
  const Vec3& operator[](std::size_t i) const { return values_[i]; }
  const std::vector<Vec3>& values() const { return values_; }

  Eigen::VectorXd component(int c) const;
  void set_component(int c, const Eigen::VectorXd& v);
  bool all_finite() const;

  NodalVectorField& operator+=(const NodalVectorField& o);
  NodalVectorField& operator-=(const NodalVectorField& o);
  NodalVectorField& operator*=(double s);
  /// this += s * o
  NodalVectorField& axpy(double s, const NodalVectorField& o);

 private:
  std::vector<Vec3> values_;
};

NodalVectorField operator+(NodalVectorField a, const NodalVectorField& b);
NodalVectorField operator-(NodalVectorField a, const NodalVectorField& b);
NodalVectorField operator*(double s, NodalVectorField a);

/// Piecewise-constant data: one 3-vector per tetrahedron.
class ElementVectorField {
 public:
  ElementVectorField() = default;
  explicit ElementVectorField(std::size_t n, const Vec3& value = Vec3::Zero())
      : values_(n, value) {}

  std::size_t size() const { return values_.size(); }
  Vec3& operator[](std::size_t i) { return values_[i]; }
  const Vec3& operator[](std::size_t i) const { return values_[i]; }
  const std::vector<Vec3>& values() const { return values_; }

 private:
  std::vector<Vec3> values_;
};

/// beta_l = integral of the hat function phi_l; the weights of the lumped product.
struct LumpedWeights {
  Eigen::VectorXd beta;
  std::size_t size() const { return static_cast<std::size_t>(beta.size()); }
};

struct SparseOperator {
  SparseMatrix matrix;
  bool symmetric = false;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix * x; }
};

using HatGradients = std::array<Vec3, 4>;

/// Constant gradients of the four barycentric coordinates of each tet.
std::vector<HatGradients> hat_gradients(const TetMesh& mesh);

LumpedWeights assemble_lumped_weights(const TetMesh& mesh);
SparseOperator assemble_stiffness(const TetMesh& mesh);
SparseOperator assemble_consistent_mass(const TetMesh& mesh);

/// Lumped product sum_l beta_l u(z_l) . v(z_l).
double inner_h(const NodalVectorField& u, const NodalVectorField& v, const LumpedWeights& w);
double norm_h(const NodalVectorField& u, const LumpedWeights& w);

/// Exact L2 product of two P1 fields through the consistent mass matrix.
double inner_l2(const NodalVectorField& u, const NodalVectorField& v, const SparseOperator& mass);
double norm_l2(const NodalVectorField& u, const SparseOperator& mass);

/// (grad u, grad v) summed over the three components.
double grad_inner(const NodalVectorField& u, const NodalVectorField& v,
                  const SparseOperator& stiffness);

/// Componentwise (Delta_h v)_l = -(K v)_l / beta_l.
NodalVectorField discrete_laplacian(const SparseOperator& stiffness, const LumpedWeights& w,
                                    const NodalVectorField& v);

/// P_h of a P1 field: beta_l (P_h f)_l = (M f)_l.
NodalVectorField project_Ph(const NodalVectorField& source, const SparseOperator& mass,
                            const LumpedWeights& w);
/// P_h of piecewise-constant data: (P_h g)_l = sum_{K containing l} g_K |K|/4 / beta_l.
NodalVectorField project_Ph(const ElementVectorField& source, const TetMesh& mesh,
                            const LumpedWeights& w);

using SpaceField = std::function<Vec3(const Vec3&)>;

/// Nodal interpolant. Throws std::domain_error on a non-finite sample.
NodalVectorField interpolate_nodal(const SpaceField& f, const TetMesh& mesh);

/// Per-element Jacobian G with G(i, j) = d v_i / d x_j.
std::vector<Eigen::Matrix3d> element_gradient(const TetMesh& mesh,
                                              const std::vector<HatGradients>& grads,
                                              const NodalVectorField& v);

/// (dir_K . grad) v on each element.
ElementVectorField directional_derivative(const TetMesh& mesh,
                                          const std::vector<HatGradients>& grads,
                                          const NodalVectorField& v,
                                          const ElementVectorField& dir);

/// Element averages of a nodal field.
ElementVectorField element_average(const TetMesh& mesh, const NodalVectorField& v);

/// Everything the time stepper needs from one mesh, assembled once.
struct FemSpace {
  explicit FemSpace(std::shared_ptr<const TetMesh> mesh);

  std::shared_ptr<const TetMesh> mesh;
  LumpedWeights weights;
  SparseOperator stiffness;
  SparseOperator mass;
  std::vector<HatGradients> grads;

  std::size_t num_nodes() const { return mesh->num_nodes(); }
};

}  // namespace llg
