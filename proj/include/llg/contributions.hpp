// Lower-order effective-field terms (stray field, uniaxial anisotropy,
// Zhang-Li spin torque, applied field) and the three time treatments of
// the lower-order term: midpoint, Adams-Bashforth and explicit Euler.
#pragma once

#include "llg/demag.hpp"
#include "llg/fem.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace llg {

enum class PiStrategy { Midpoint, AdamsBashforth, ExplicitEuler };

std::string to_string(PiStrategy s);
/// Accepts "mp", "ab", "ee" (case-insensitive). Throws std::invalid_argument.
PiStrategy parse_strategy(const std::string& s);

struct UniaxialAnisotropy {
  Vec3 axis;  // unit easy axis
};

struct ZhangLi {
  Vec3 velocity = Vec3::Zero();  // constant spin velocity (nondimensional)
  double xi = 0.0;               // non-adiabaticity, > 0
  /// Optional spatially varying velocity; sampled at element centroids.
  SpaceField velocity_field;
};

using SpaceTimeField = std::function<Vec3(const Vec3& x, double t)>;

/// Enabled lower-order contributions and the applied field.
class ContributionSet {
 public:
  explicit ContributionSet(std::shared_ptr<const FemSpace> space);

  void enable_stray_field(std::shared_ptr<const StrayFieldSolver> solver);
  /// Throws std::invalid_argument unless |axis| = 1 within 1e-12.
  void enable_anisotropy(const Vec3& axis);
  /// Throws std::invalid_argument unless xi > 0.
  void enable_zhang_li(ZhangLi zl);
  void set_applied_field(const Vec3& constant);
  void set_applied_field(SpaceTimeField f);

  const FemSpace& space() const { return *space_; }
  std::shared_ptr<const FemSpace> space_ptr() const { return space_; }
  const StrayFieldSolver* stray() const { return stray_.get(); }
  const std::optional<UniaxialAnisotropy>& anisotropy() const { return anisotropy_; }
  const std::optional<ZhangLi>& zhang_li() const { return zhang_li_; }

  bool has_lower_order() const { return stray_ || anisotropy_ || zhang_li_; }
  /// True when every enabled lower-order term is linear and self-adjoint,
  /// i.e. when the micromagnetic energy accounts for all of them.
  bool all_linear_self_adjoint() const { return !zhang_li_; }
  bool applied_field_is_constant() const { return applied_constant_.has_value(); }

  Vec3 applied_field(const Vec3& x, double t) const;

 private:
  std::shared_ptr<const FemSpace> space_;
  std::shared_ptr<const StrayFieldSolver> stray_;
  std::optional<UniaxialAnisotropy> anisotropy_;
  std::optional<ZhangLi> zhang_li_;
  std::optional<Vec3> applied_constant_ = Vec3::Zero();
  SpaceTimeField applied_;
};

/// P_h-projected lower-order field at one state, split by energy class.
struct PiValue {
  NodalVectorField linear;     // stray + anisotropy (linear, self-adjoint)
  NodalVectorField nonlinear;  // Zhang-Li
  int stray_solves = 0;
  double stray_seconds = 0.0;

  NodalVectorField total() const { return linear + nonlinear; }
};

/// Evaluates every enabled contribution at `m` and projects with P_h.
PiValue evaluate_pi(const ContributionSet& set, const NodalVectorField& m);
NodalVectorField pi_h(const ContributionSet& set, const NodalVectorField& m);

/// Elementwise Zhang-Li pieces before projection: the cross part
/// mbar_K x (v.grad)m and the non-adiabatic part xi (v.grad)m.
std::pair<ElementVectorField, ElementVectorField> zhang_li_element_parts(
    const FemSpace& space, const ZhangLi& zl, const NodalVectorField& m);

/// (3/2) a - (1/2) b, applied to both energy classes.
PiValue adams_bashforth(const PiValue& curr, const PiValue& prev);

/// Pi_h(m_next, m_curr, m_prev) for the chosen strategy. Adams-Bashforth
/// and explicit Euler never read m_next.
NodalVectorField combine_pi(PiStrategy strategy, const ContributionSet& set,
                            const NodalVectorField& m_next, const NodalVectorField& m_curr,
                            const NodalVectorField& m_prev);

/// Nodal interpolant of f(., t_i + k/2).
NodalVectorField sample_applied_field(const ContributionSet& set, const TetMesh& mesh,
                                      double t_i, double k);

}  // namespace llg
