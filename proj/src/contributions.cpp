#include "llg/contributions.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace llg {

std::string to_string(PiStrategy s) {
  switch (s) {
    case PiStrategy::Midpoint: return "mp";
    case PiStrategy::AdamsBashforth: return "ab";
    case PiStrategy::ExplicitEuler: return "ee";
  }
  return "?";
}

PiStrategy parse_strategy(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "mp" || l == "midpoint") return PiStrategy::Midpoint;
  if (l == "ab" || l == "adams-bashforth") return PiStrategy::AdamsBashforth;
  if (l == "ee" || l == "explicit-euler") return PiStrategy::ExplicitEuler;
  throw std::invalid_argument("unknown strategy '" + s + "' (expected mp, ab or ee)");
}

ContributionSet::ContributionSet(std::shared_ptr<const FemSpace> space) : space_(std::move(space)) {}

void ContributionSet::enable_stray_field(std::shared_ptr<const StrayFieldSolver> solver) {
  stray_ = std::move(solver);
}

void ContributionSet::enable_anisotropy(const Vec3& axis) {
  if (std::abs(axis.norm() - 1.0) > 1e-12) throw std::invalid_argument("anisotropy axis must be a unit vector");
  anisotropy_ = UniaxialAnisotropy{axis};
}

void ContributionSet::enable_zhang_li(ZhangLi zl) {
  if (!(zl.xi > 0.0)) throw std::invalid_argument("Zhang-Li xi must be positive");
  zhang_li_ = std::move(zl);
}

void ContributionSet::set_applied_field(const Vec3& constant) {
  applied_constant_ = constant;
  applied_ = nullptr;
}

void ContributionSet::set_applied_field(SpaceTimeField f) {
  applied_constant_.reset();
  applied_ = std::move(f);
}

Vec3 ContributionSet::applied_field(const Vec3& x, double t) const {
  if (applied_constant_) return *applied_constant_;
  return applied_(x, t);
}

std::pair<ElementVectorField, ElementVectorField> zhang_li_element_parts(
    const FemSpace& space, const ZhangLi& zl, const NodalVectorField& m) {
  const TetMesh& mesh = *space.mesh;
  ElementVectorField dir(mesh.num_elements(), zl.velocity);
  if (zl.velocity_field) {
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) dir[e] = zl.velocity_field(mesh.centroid(e));
  }
  const ElementVectorField dm = directional_derivative(mesh, space.grads, m, dir);
  const ElementVectorField mbar = element_average(mesh, m);
  ElementVectorField cross(mesh.num_elements()), adiabatic(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    cross[e] = mbar[e].cross(dm[e]);
    adiabatic[e] = zl.xi * dm[e];
  }
  return {std::move(cross), std::move(adiabatic)};
}

PiValue evaluate_pi(const ContributionSet& set, const NodalVectorField& m) {
  const FemSpace& space = set.space();
  const TetMesh& mesh = *space.mesh;
  PiValue out;
  out.linear = NodalVectorField(m.size());
  out.nonlinear = NodalVectorField(m.size());

  if (const StrayFieldSolver* stray = set.stray()) {
    const auto t0 = std::chrono::steady_clock::now();
    out.linear += project_Ph(stray->stray_field(m), mesh, space.weights);
    out.stray_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.stray_solves = 1;
  }
  if (const auto& an = set.anisotropy()) {
    NodalVectorField nodal(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) nodal[i] = an->axis.dot(m[i]) * an->axis;
    out.linear += project_Ph(nodal, space.mass, space.weights);
  }
  if (const auto& zl = set.zhang_li()) {
    auto [cross, adiabatic] = zhang_li_element_parts(space, *zl, m);
    for (std::size_t e = 0; e < cross.size(); ++e) cross[e] += adiabatic[e];
    out.nonlinear = project_Ph(cross, mesh, space.weights);
  }
  return out;
}

NodalVectorField pi_h(const ContributionSet& set, const NodalVectorField& m) {
  return evaluate_pi(set, m).total();
}

PiValue adams_bashforth(const PiValue& curr, const PiValue& prev) {
  PiValue out;
  out.linear = 1.5 * curr.linear;
  out.linear.axpy(-0.5, prev.linear);
  out.nonlinear = 1.5 * curr.nonlinear;
  out.nonlinear.axpy(-0.5, prev.nonlinear);
  return out;
}

NodalVectorField combine_pi(PiStrategy strategy, const ContributionSet& set,
                            const NodalVectorField& m_next, const NodalVectorField& m_curr,
                            const NodalVectorField& m_prev) {
  switch (strategy) {
    case PiStrategy::Midpoint: return pi_h(set, 0.5 * (m_next + m_curr));
    case PiStrategy::AdamsBashforth:
      return adams_bashforth(evaluate_pi(set, m_curr), evaluate_pi(set, m_prev)).total();
    case PiStrategy::ExplicitEuler: return pi_h(set, m_curr);
  }
  throw std::logic_error("combine_pi: bad strategy");
}

NodalVectorField sample_applied_field(const ContributionSet& set, const TetMesh& mesh,
                                      double t_i, double k) {
  const double t = t_i + 0.5 * k;
  return interpolate_nodal([&](const Vec3& x) { return set.applied_field(x, t); }, mesh);
}

}  // namespace llg
