// Iterative solvers for the scalar Poisson problems and the closed-form
// nodewise solver used by every fixed-point sweep of the time stepper.
#pragma once

#include "llg/fem.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace llg {

struct SolverConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_iterations = 20000;

  /// Throws std::invalid_argument unless tolerances are positive and max_iterations >= 1.
  void validate() const;
};

/// Raised when an iterative solve misses its tolerance; carries the residual trace.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return residual_history_; }

 private:
  std::vector<double> residual_history_;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;  // final ||b - A x||
};

/// Jacobi-preconditioned CG for SPD `A`. Stops once ||A x - b|| <= max(rel_tol ||b||, abs_tol).
Eigen::VectorXd cg_solve(const SparseOperator& A, const Eigen::VectorXd& b,
                         const SolverConfig& cfg, SolveStats* stats = nullptr);

/// Pure-Neumann solve K x = b on the mean-free subspace. The constant mode
/// is removed from `b` before iterating; the result has zero beta-weighted mean.
Eigen::VectorXd cg_zero_mean(const SparseOperator& K, const Eigen::VectorXd& b,
                             const LumpedWeights& w, const SolverConfig& cfg,
                             SolveStats* stats = nullptr);

/// Harmonic extension with prescribed values on a fixed node set. The
/// interior block and the coupling block are extracted once at construction.
class DirichletSolver {
 public:
  DirichletSolver(const SparseOperator& K, std::vector<int> dirichlet_nodes);

  /// `values[i]` is prescribed at node `dirichlet_nodes()[i]`.
  Eigen::VectorXd solve(const Eigen::VectorXd& values, const SolverConfig& cfg,
                        SolveStats* stats = nullptr) const;

  const std::vector<int>& dirichlet_nodes() const { return dirichlet_; }

 private:
  Eigen::Index n_ = 0;
  std::vector<int> dirichlet_;
  std::vector<int> interior_;
  SparseOperator k_ii_;
  SparseMatrix k_ib_;
};

Eigen::VectorXd dirichlet_solve(const SparseOperator& K, const std::map<int, double>& boundary_values,
                                const SolverConfig& cfg);

/// Solves c*eta + eta x a = b for eta (c > 0) in closed form:
///   eta = (c^2 b + c (a x b) + (a.b) a) / (c (c^2 + |a|^2)).
Vec3 solve_node_cross(double c, const Vec3& a, const Vec3& b);

}  // namespace llg
