#include "llg/demag.hpp"

#include <cmath>
#include <numbers>
#include <thread>

namespace llg {

namespace {

struct TriRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weight;  // sums to 1; multiply by the triangle area
};

const TriRule& triangle_rule(int order) {
  static const TriRule r1{{{1.0 / 3, 1.0 / 3, 1.0 / 3}}, {1.0}};
  static const TriRule r2{{{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}},
                          {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  static const TriRule r5 = [] {
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, a2 = (6.0 + s15) / 21.0;
    const double w1 = (155.0 - s15) / 1200.0, w2 = (155.0 + s15) / 1200.0;
    TriRule r;
    r.bary = {{1.0 / 3, 1.0 / 3, 1.0 / 3},
              {a1, a1, 1 - 2 * a1}, {a1, 1 - 2 * a1, a1}, {1 - 2 * a1, a1, a1},
              {a2, a2, 1 - 2 * a2}, {a2, 1 - 2 * a2, a2}, {1 - 2 * a2, a2, a2}};
    r.weight = {9.0 / 40, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  if (order <= 1) return r1;
  if (order == 2) return r2;
  return r5;
}

constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);

struct RemainderCtx {
  Vec3 x;
  Vec3 p;            // projection of x onto the panel plane
  double d;          // signed distance n.(x - y)
  std::array<Vec3, 3> grad;  // in-plane gradients of the barycentric coordinates
  const TriRule* rule;
  double near_ratio;
  int max_depth;
};

// Adds int_sub d (lambda_j(y) - lambda_j(p)) / |x - y|^3 dS(y) to acc.
void integrate_remainder(const RemainderCtx& c, const Vec3& a, const Vec3& b, const Vec3& e,
                         int depth, std::array<double, 3>& acc) {
  const Vec3 centroid = (a + b + e) / 3.0;
  const double diam = std::max({(a - b).norm(), (b - e).norm(), (e - a).norm()});
  if (depth < c.max_depth && diam > c.near_ratio * (c.x - centroid).norm()) {
    const Vec3 ab = 0.5 * (a + b), be = 0.5 * (b + e), ea = 0.5 * (e + a);
    integrate_remainder(c, a, ab, ea, depth + 1, acc);
    integrate_remainder(c, ab, b, be, depth + 1, acc);
    integrate_remainder(c, ea, be, e, depth + 1, acc);
    integrate_remainder(c, ab, be, ea, depth + 1, acc);
    return;
  }
  const double area = 0.5 * (b - a).cross(e - a).norm();
  for (std::size_t q = 0; q < c.rule->weight.size(); ++q) {
    const auto& l = c.rule->bary[q];
    const Vec3 y = l[0] * a + l[1] * b + l[2] * e;
    const double r = (c.x - y).norm();
    const double k = c.rule->weight[q] * area * c.d / (r * r * r);
    const Vec3 dy = y - c.p;
    for (int j = 0; j < 3; ++j) acc[j] += k * c.grad[j].dot(dy);
  }
}

}  // namespace

double solid_angle(const Vec3& x, const Vec3& y0, const Vec3& y1, const Vec3& y2) {
  const Vec3 r0 = y0 - x, r1 = y1 - x, r2 = y2 - x;
  const double l0 = r0.norm(), l1 = r1.norm(), l2 = r2.norm();
  const double num = r0.dot(r1.cross(r2));
  const double den = l0 * l1 * l2 + r0.dot(r1) * l2 + r0.dot(r2) * l1 + r1.dot(r2) * l0;
  return 2.0 * std::atan2(num, den);
}

std::array<double, 3> double_layer_panel(const Vec3& x, const std::array<Vec3, 3>& tri,
                                         const DoubleLayerOptions& opt) {
  const Vec3 cr = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
  const double twice_area = cr.norm();
  if (!(twice_area > 0.0)) throw MeshError("double_layer_panel: degenerate triangle");
  const Vec3 n = cr / twice_area;
  const double diam = std::max({(tri[0] - tri[1]).norm(), (tri[1] - tri[2]).norm(), (tri[2] - tri[0]).norm()});

  // (x - y).n is the same for every y in the plane.
  const double d = n.dot(x - tri[0]);
  std::array<double, 3> out{0.0, 0.0, 0.0};
  if (std::abs(d) <= 1e-12 * diam) return out;

  RemainderCtx c;
  c.x = x;
  c.d = d;
  c.p = x - d * n;
  for (int j = 0; j < 3; ++j) c.grad[j] = n.cross(tri[(j + 2) % 3] - tri[(j + 1) % 3]) / twice_area;
  c.rule = &triangle_rule(opt.quadrature_order);
  c.near_ratio = opt.near_ratio;
  c.max_depth = opt.max_depth;

  // lambda_j(p): barycentric coordinates of the projected point (may lie outside).
  std::array<double, 3> lp{};
  for (int j = 0; j < 3; ++j) lp[j] = c.grad[j].dot(c.p - tri[(j + 1) % 3]);
  // grad(lambda_j) . (p - y_{j+1}) is lambda_j(p) - lambda_j(y_{j+1}) = lambda_j(p).

  // int (x-y).n / |x-y|^3 = -(solid angle with respect to n).
  const double constant_part = -solid_angle(x, tri[0], tri[1], tri[2]);
  std::array<double, 3> rem{0.0, 0.0, 0.0};
  integrate_remainder(c, tri[0], tri[1], tri[2], 0, rem);
  for (int j = 0; j < 3; ++j) out[j] = kInv4Pi * (lp[j] * constant_part + rem[j]);
  return out;
}

SparseOperator assemble_surface_mass(const SurfaceMesh& s) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(s.triangles.size() * 9);
  for (std::size_t t = 0; t < s.triangles.size(); ++t) {
    const Tri& tri = s.triangles[t];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trip.emplace_back(tri[a], tri[b], s.areas[t] * (a == b ? 2.0 : 1.0) / 12.0);
  }
  const auto n = static_cast<Eigen::Index>(s.num_nodes());
  SparseOperator op;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.symmetric = true;
  return op;
}

DoubleLayerMatrix assemble_double_layer(const SurfaceMesh& s, const DoubleLayerOptions& opt) {
  const auto nb = static_cast<Eigen::Index>(s.num_nodes());
  const std::size_t ntri = s.triangles.size();
  for (double a : s.areas)
    if (!(a > 0.0)) throw MeshError("assemble_double_layer: degenerate triangle");

  std::vector<std::array<Vec3, 3>> panels(ntri);
  for (std::size_t t = 0; t < ntri; ++t)
    for (int a = 0; a < 3; ++a) panels[t][a] = s.vertices[s.triangles[t][a]];

  // Adds the potential of every panel at x into `row`.
  const auto accumulate_at = [&](const Vec3& x, auto&& row) {
    for (std::size_t t = 0; t < ntri; ++t) {
      const auto w = double_layer_panel(x, panels[t], opt);
      for (int j = 0; j < 3; ++j) row[s.triangles[t][j]] += w[j];
    }
  };

  const int nthreads = std::max(1, opt.threads);
  DoubleLayerMatrix dl;
  dl.testing = opt.testing;
  dl.quadrature_order = opt.quadrature_order;

  if (opt.testing == DoubleLayerTesting::NodalCollocation) {
    Eigen::MatrixXd colloc = Eigen::MatrixXd::Zero(nb, nb);
    const auto work = [&](int tid) {
      for (Eigen::Index l = tid; l < nb; l += nthreads) accumulate_at(s.vertices[static_cast<std::size_t>(l)], colloc.row(l));
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& th : pool) th.join();
    const SparseOperator mass = assemble_surface_mass(s);
    dl.tested = mass.matrix * colloc;
    return dl;
  }

  const TriRule& rule = triangle_rule(opt.quadrature_order);
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(nthreads), Eigen::MatrixXd::Zero(nb, nb));
  const auto work = [&](int tid) {
    Eigen::MatrixXd& out = partial[static_cast<std::size_t>(tid)];
    Eigen::RowVectorXd kx(nb);
    for (std::size_t t = static_cast<std::size_t>(tid); t < ntri; t += static_cast<std::size_t>(nthreads)) {
      const auto& tri = panels[t];
      for (std::size_t q = 0; q < rule.weight.size(); ++q) {
        const auto& l = rule.bary[q];
        const Vec3 x = l[0] * tri[0] + l[1] * tri[1] + l[2] * tri[2];
        kx.setZero();
        accumulate_at(x, kx);
        const double wq = rule.weight[q] * s.areas[t];
        for (int a = 0; a < 3; ++a) out.row(s.triangles[t][a]) += (wq * l[a]) * kx;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& th : pool) th.join();
  dl.tested = std::move(partial[0]);
  for (std::size_t t = 1; t < partial.size(); ++t) dl.tested += partial[t];
  return dl;
}

// ---------------------------------------------------------------------------

StrayFieldSolver::StrayFieldSolver(std::shared_ptr<const FemSpace> space, StrayFieldOptions opt)
    : space_(std::move(space)),
      opt_(opt),
      surface_(extract_boundary(*space_->mesh)),
      dl_(assemble_double_layer(surface_, opt.double_layer)),
      surface_mass_(assemble_surface_mass(surface_)),
      dirichlet_(space_->stiffness, surface_.global_ids) {
  boundary_operator_ = dl_.tested - 0.5 * Eigen::MatrixXd(surface_mass_.matrix);
}

StrayFieldParts StrayFieldSolver::solve(const NodalVectorField& m) const {
  const TetMesh& mesh = *space_->mesh;
  const auto& grads = space_->grads;
  StrayFieldParts parts;

  // (i) <grad u1, grad v> = <m, grad v>, u1 mean-free.
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Tet& t = mesh.tets()[e];
    const Vec3 mbar = 0.25 * (m[t[0]] + m[t[1]] + m[t[2]] + m[t[3]]);
    const double vol = mesh.element_volumes()[e];
    for (int a = 0; a < 4; ++a) b[t[a]] += vol * mbar.dot(grads[e][a]);
  }
  parts.u1 = cg_zero_mean(space_->stiffness, b, space_->weights, opt_.neumann);

  // (ii) L2(boundary)-projection of (K - 1/2) u1|boundary.
  const auto nb = static_cast<Eigen::Index>(surface_.num_nodes());
  Eigen::VectorXd u1b(nb);
  for (Eigen::Index i = 0; i < nb; ++i) u1b[i] = parts.u1[surface_.global_ids[static_cast<std::size_t>(i)]];
  const Eigen::VectorXd rhs = boundary_operator_ * u1b;
  parts.g = cg_solve(surface_mass_, rhs, opt_.projection);

  // (iii) harmonic extension of g.
  parts.u2 = dirichlet_.solve(parts.g, opt_.dirichlet);

  // (iv) -grad(u1 + u2) per element.
  const Eigen::VectorXd u = parts.u1 + parts.u2;
  parts.field = ElementVectorField(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Tet& t = mesh.tets()[e];
    Vec3 g = Vec3::Zero();
    for (int a = 0; a < 4; ++a) g -= u[t[a]] * grads[e][a];
    parts.field[e] = g;
  }
  return parts;
}

ElementVectorField StrayFieldSolver::stray_field(const NodalVectorField& m) const {
  return solve(m).field;
}

double StrayFieldSolver::energy_product(const ElementVectorField& field, const NodalVectorField& m) const {
  const TetMesh& mesh = *space_->mesh;
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Tet& t = mesh.tets()[e];
    const Vec3 mbar = 0.25 * (m[t[0]] + m[t[1]] + m[t[2]] + m[t[3]]);
    s += mesh.element_volumes()[e] * field[e].dot(mbar);
  }
  return s;
}

double StrayFieldSolver::energy_product(const NodalVectorField& m) const {
  return energy_product(stray_field(m), m);
}

ElementVectorField stray_field(const StrayFieldSolver& solver, const NodalVectorField& m) {
  return solver.stray_field(m);
}

double stray_energy_product(const StrayFieldSolver& solver, const NodalVectorField& m) {
  return solver.energy_product(m);
}

}  // namespace llg
