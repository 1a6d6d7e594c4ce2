#include "llg/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace llg {

EnergyParts energy(double c_ex, const ContributionSet& set, const NodalVectorField& m,
                   const NodalVectorField& f, const NodalVectorField* pi_linear) {
  const FemSpace& space = set.space();
  EnergyParts e;
  e.exchange = 0.5 * c_ex * grad_inner(m, m, space.stiffness);
  e.zeeman = -inner_l2(f, m, space.mass);
  if (set.stray() || set.anisotropy()) {
    if (pi_linear) {
      e.pi = -0.5 * inner_h(*pi_linear, m, space.weights);
    } else {
      e.pi = -0.5 * inner_h(evaluate_pi(set, m).linear, m, space.weights);
    }
  }
  return e;
}

EnergyBalance energy_identity_residual(double c_ex, double alpha, double k, const FemSpace& space,
                                       const NodalVectorField& m_curr, const NodalVectorField& m_next,
                                       const NodalVectorField& pi_used, const NodalVectorField& f_half) {
  EnergyBalance b;
  NodalVectorField dtm = m_next - m_curr;
  dtm *= 1.0 / k;
  b.grad_sq_curr = grad_inner(m_curr, m_curr, space.stiffness);
  b.grad_sq_next = grad_inner(m_next, m_next, space.stiffness);
  b.dissipation = inner_h(dtm, dtm, space.weights);
  b.dtm_norm = std::sqrt(b.dissipation);
  // (d_t m, P_h g)_h equals the L2 product <d_t m, g> by definition of P_h.
  b.work = inner_h(dtm, pi_used, space.weights) + inner_l2(dtm, f_half, space.mass);
  b.residual = 0.5 * c_ex * (b.grad_sq_next - b.grad_sq_curr) / k + alpha * b.dissipation - b.work;
  return b;
}

double cumulative_balance_defect(double c_ex, double alpha, double k,
                                 const std::vector<EnergyBalance>& steps) {
  if (steps.empty()) return 0.0;
  double dissipation = 0.0, work = 0.0, residuals = 0.0;
  for (const auto& s : steps) {
    dissipation += s.dissipation;
    work += s.work;
    residuals += s.residual;
  }
  const double lhs = 0.5 * c_ex * steps.back().grad_sq_next + alpha * k * dissipation;
  const double rhs = 0.5 * c_ex * steps.front().grad_sq_curr + k * work;
  return (lhs - rhs) - k * residuals;
}

Vec3 average_magnetization(const NodalVectorField& m, const LumpedWeights& w) {
  Vec3 s = Vec3::Zero();
  for (std::size_t i = 0; i < m.size(); ++i) s += w.beta[static_cast<Eigen::Index>(i)] * m[i];
  return s / w.beta.sum();
}

double max_norm_deviation(const NodalVectorField& m, const NodalVectorField& m0) {
  double d = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) d = std::max(d, std::abs(m[i].norm() - m0[i].norm()));
  return d;
}

double fit_order(const std::vector<double>& ks, const std::vector<double>& errors) {
  if (ks.size() != errors.size() || ks.size() < 2)
    throw std::invalid_argument("fit_order: need at least two (k, error) pairs");
  const auto n = static_cast<double>(ks.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] > 0.0) || !(errors[i] > 0.0))
      throw std::invalid_argument("fit_order: k and error must be positive");
    const double x = std::log(ks[i]), y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) <= 1e-14 * n * sxx) throw std::invalid_argument("fit_order: k values coincide");
  return (n * sxy - sx * sy) / den;
}

}  // namespace llg
