// Energies, invariant monitors, averaged observables and convergence-order
// estimation. Everything here is a pure function of its arguments.
#pragma once

#include "llg/contributions.hpp"

#include <vector>

namespace llg {

struct EnergyParts {
  double exchange = 0.0;  // (C_ex/2) |grad m|^2
  double zeeman = 0.0;    // -<f, m>
  double pi = 0.0;        // -(1/2) <pi_lin(m), m>
  double total() const { return exchange + zeeman + pi; }
};

/// Micromagnetic energy of m for applied field f (nodal). Only contributions
/// that are linear and self-adjoint enter the pi part. Pass `pi_linear`
/// (the P_h-projected linear part at m) to avoid recomputing the stray field.
EnergyParts energy(double c_ex, const ContributionSet& set, const NodalVectorField& m,
                   const NodalVectorField& f, const NodalVectorField* pi_linear = nullptr);

/// Pieces of the per-step energy balance; `residual` is
/// (C_ex/2) d_t |grad m|^2 + alpha |d_t m|_h^2 - <d_t m, Pi + f>.
struct EnergyBalance {
  double grad_sq_curr = 0.0;
  double grad_sq_next = 0.0;
  double dissipation = 0.0;  // |d_t m|_h^2
  double work = 0.0;         // <d_t m, Pi + f>
  double dtm_norm = 0.0;     // |d_t m|_h
  double residual = 0.0;
};

/// `pi_used` is the projected lower-order term that entered the step; `f_half`
/// is the nodal applied field at the half step.
EnergyBalance energy_identity_residual(double c_ex, double alpha, double k, const FemSpace& space,
                                       const NodalVectorField& m_curr, const NodalVectorField& m_next,
                                       const NodalVectorField& pi_used, const NodalVectorField& f_half);

/// Difference between the telescoped balance over steps 0..n-1 and k times
/// the sum of stepwise residuals; zero up to rounding.
double cumulative_balance_defect(double c_ex, double alpha, double k,
                                 const std::vector<EnergyBalance>& steps);

/// sum_l beta_l m(z_l) / |Omega|
Vec3 average_magnetization(const NodalVectorField& m, const LumpedWeights& w);

/// max_l | |m(z_l)| - |m0(z_l)| |
double max_norm_deviation(const NodalVectorField& m, const NodalVectorField& m0);

/// Least-squares slope of log(error) against log(k). Throws
/// std::invalid_argument with fewer than two points, non-positive data or
/// coincident k values.
double fit_order(const std::vector<double>& ks, const std::vector<double>& errors);

/// One record of the per-step series written to CSV.
struct DiagnosticsRecord {
  int step = 0;
  double t = 0.0;
  EnergyParts energy;
  double norm_dev_max = 0.0;
  double energy_residual = 0.0;
  Vec3 m_avg = Vec3::Zero();
  int sweeps = 0;
  double wtime_total = 0.0;
  double wtime_stray = 0.0;
};

using DiagnosticsSeries = std::vector<DiagnosticsRecord>;

}  // namespace llg
