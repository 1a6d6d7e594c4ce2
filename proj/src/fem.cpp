#include "llg/fem.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace llg {

// ---------------------------------------------------------------------------
// NodalVectorField

Eigen::VectorXd NodalVectorField::component(int c) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(values_.size()));
  for (std::size_t i = 0; i < values_.size(); ++i) out[static_cast<Eigen::Index>(i)] = values_[i][c];
  return out;
}

void NodalVectorField::set_component(int c, const Eigen::VectorXd& v) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i][c] = v[static_cast<Eigen::Index>(i)];
}

bool NodalVectorField::all_finite() const {
  for (const Vec3& v : values_)
    if (!v.allFinite()) return false;
  return true;
}

NodalVectorField& NodalVectorField::operator+=(const NodalVectorField& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

NodalVectorField& NodalVectorField::operator-=(const NodalVectorField& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

NodalVectorField& NodalVectorField::operator*=(double s) {
  for (Vec3& v : values_) v *= s;
  return *this;
}

NodalVectorField& NodalVectorField::axpy(double s, const NodalVectorField& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
  return *this;
}

NodalVectorField operator+(NodalVectorField a, const NodalVectorField& b) { return a += b; }
NodalVectorField operator-(NodalVectorField a, const NodalVectorField& b) { return a -= b; }
NodalVectorField operator*(double s, NodalVectorField a) { return a *= s; }

// ---------------------------------------------------------------------------
// Assembly

std::vector<HatGradients> hat_gradients(const TetMesh& mesh) {
  const auto& x = mesh.vertices();
  std::vector<HatGradients> out(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Tet& t = mesh.tets()[e];
    Eigen::Matrix3d J;
    J.col(0) = x[t[1]] - x[t[0]];
    J.col(1) = x[t[2]] - x[t[0]];
    J.col(2) = x[t[3]] - x[t[0]];
    const Eigen::Matrix3d Jinv = J.inverse();
    HatGradients& g = out[e];
    for (int a = 0; a < 3; ++a) g[a + 1] = Jinv.row(a).transpose();
    g[0] = -(g[1] + g[2] + g[3]);
  }
  return out;
}

LumpedWeights assemble_lumped_weights(const TetMesh& mesh) {
  LumpedWeights w;
  w.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const double q = mesh.element_volumes()[e] / 4.0;
    for (int v : mesh.tets()[e]) w.beta[v] += q;
  }
  return w;
}

namespace {

template <typename LocalMatrix>
SparseOperator assemble_scalar(const TetMesh& mesh, LocalMatrix&& local) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.num_elements() * 16);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Tet& t = mesh.tets()[e];
    const Eigen::Matrix4d Ae = local(e);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) trip.emplace_back(t[a], t[b], Ae(a, b));
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
  SparseOperator op;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  op.symmetric = true;
  return op;
}

}  // namespace

SparseOperator assemble_stiffness(const TetMesh& mesh) {
  const auto grads = hat_gradients(mesh);
  return assemble_scalar(mesh, [&](std::size_t e) {
    Eigen::Matrix4d A;
    const double vol = mesh.element_volumes()[e];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) A(a, b) = vol * grads[e][a].dot(grads[e][b]);
    return A;
  });
}

SparseOperator assemble_consistent_mass(const TetMesh& mesh) {
  return assemble_scalar(mesh, [&](std::size_t e) {
    // int_K phi_a phi_b = |K| (1 + delta_ab) / 20
    Eigen::Matrix4d A = Eigen::Matrix4d::Constant(1.0) + Eigen::Matrix4d::Identity();
    return Eigen::Matrix4d(A * (mesh.element_volumes()[e] / 20.0));
  });
}

// ---------------------------------------------------------------------------
// Products and operators

double inner_h(const NodalVectorField& u, const NodalVectorField& v, const LumpedWeights& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += w.beta[static_cast<Eigen::Index>(i)] * u[i].dot(v[i]);
  return s;
}

double norm_h(const NodalVectorField& u, const LumpedWeights& w) { return std::sqrt(inner_h(u, u, w)); }

double inner_l2(const NodalVectorField& u, const NodalVectorField& v, const SparseOperator& mass) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += u.component(c).dot(mass.matrix * v.component(c));
  return s;
}

double norm_l2(const NodalVectorField& u, const SparseOperator& mass) {
  return std::sqrt(std::max(0.0, inner_l2(u, u, mass)));
}

double grad_inner(const NodalVectorField& u, const NodalVectorField& v,
                  const SparseOperator& stiffness) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += u.component(c).dot(stiffness.matrix * v.component(c));
  return s;
}

NodalVectorField discrete_laplacian(const SparseOperator& stiffness, const LumpedWeights& w,
                                    const NodalVectorField& v) {
  NodalVectorField out(v.size());
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd kv = stiffness.matrix * v.component(c);
    out.set_component(c, -kv.cwiseQuotient(w.beta));
  }
  return out;
}

NodalVectorField project_Ph(const NodalVectorField& source, const SparseOperator& mass,
                            const LumpedWeights& w) {
  NodalVectorField out(source.size());
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd mf = mass.matrix * source.component(c);
    out.set_component(c, mf.cwiseQuotient(w.beta));
  }
  return out;
}

NodalVectorField project_Ph(const ElementVectorField& source, const TetMesh& mesh,
                            const LumpedWeights& w) {
  NodalVectorField out(mesh.num_nodes());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Vec3 q = source[e] * (mesh.element_volumes()[e] / 4.0);
    for (int v : mesh.tets()[e]) out[static_cast<std::size_t>(v)] += q;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= w.beta[static_cast<Eigen::Index>(i)];
  return out;
}

NodalVectorField interpolate_nodal(const SpaceField& f, const TetMesh& mesh) {
  NodalVectorField out(mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    out[i] = f(mesh.vertices()[i]);
    if (!out[i].allFinite()) {
      throw std::domain_error("interpolate_nodal: non-finite sample at node " + std::to_string(i));
    }
  }
  return out;
}

std::vector<Eigen::Matrix3d> element_gradient(const TetMesh& mesh,
                                              const std::vector<HatGradients>& grads,
                                              const NodalVectorField& v) {
  std::vector<Eigen::Matrix3d> out(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
    const Tet& t = mesh.tets()[e];
    for (int a = 0; a < 4; ++a) G += v[static_cast<std::size_t>(t[a])] * grads[e][a].transpose();
    out[e] = G;
  }
  return out;
}

ElementVectorField directional_derivative(const TetMesh& mesh,
                                          const std::vector<HatGradients>& grads,
                                          const NodalVectorField& v,
                                          const ElementVectorField& dir) {
  ElementVectorField out(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Tet& t = mesh.tets()[e];
    Vec3 d = Vec3::Zero();
    for (int a = 0; a < 4; ++a) d += grads[e][a].dot(dir[e]) * v[static_cast<std::size_t>(t[a])];
    out[e] = d;
  }
  return out;
}

ElementVectorField element_average(const TetMesh& mesh, const NodalVectorField& v) {
  ElementVectorField out(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Tet& t = mesh.tets()[e];
    out[e] = 0.25 * (v[t[0]] + v[t[1]] + v[t[2]] + v[t[3]]);
  }
  return out;
}

FemSpace::FemSpace(std::shared_ptr<const TetMesh> m)
    : mesh(std::move(m)),
      weights(assemble_lumped_weights(*mesh)),
      stiffness(assemble_stiffness(*mesh)),
      mass(assemble_consistent_mass(*mesh)),
      grads(hat_gradients(*mesh)) {}

}  // namespace llg
