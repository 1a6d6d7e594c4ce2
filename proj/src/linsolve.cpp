#include "llg/linsolve.hpp"

#include <cmath>
#include <sstream>

namespace llg {

void SolverConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("solver tolerances must be positive");
  if (max_iterations < 1) throw std::invalid_argument("solver max_iterations must be >= 1");
}

namespace {

// Shared PCG loop. `project` is applied to the residual after every update
// (identity for SPD systems, mean removal for the Neumann problem).
template <typename Project>
Eigen::VectorXd pcg(const SparseMatrix& A, const Eigen::VectorXd& b, const SolverConfig& cfg,
                    SolveStats* stats, Project&& project) {
  cfg.validate();
  const Eigen::Index n = b.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  const double target = std::max(cfg.rel_tol * bnorm, cfg.abs_tol);
  if (bnorm <= target) {
    if (stats) *stats = {0, bnorm};
    return x;
  }

  Eigen::VectorXd inv_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = A.coeff(i, i);
    inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
  }

  Eigen::VectorXd r = b;
  project(r);
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd q(n);
  double rz = r.dot(z);
  std::vector<double> history{r.norm()};

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    q.noalias() = A * p;
    const double pq = p.dot(q);
    if (!(pq > 0.0)) break;  // breakdown: operator not SPD on this subspace
    const double step = rz / pq;
    x.noalias() += step * p;
    r.noalias() -= step * q;
    project(r);
    const double rnorm = r.norm();
    history.push_back(rnorm);
    if (rnorm <= target) {
      // Confirm with the true residual; the recursion can drift.
      Eigen::VectorXd true_r = b - A * x;
      project(true_r);
      const double tn = true_r.norm();
      if (tn <= target) {
        if (stats) *stats = {it, tn};
        return x;
      }
      r = true_r;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  std::ostringstream msg;
  msg << "CG did not converge in " << cfg.max_iterations << " iterations (residual "
      << history.back() << ", target " << target << ")";
  throw SolverError(msg.str(), std::move(history));
}

}  // namespace

Eigen::VectorXd cg_solve(const SparseOperator& A, const Eigen::VectorXd& b,
                         const SolverConfig& cfg, SolveStats* stats) {
  return pcg(A.matrix, b, cfg, stats, [](Eigen::VectorXd&) {});
}

Eigen::VectorXd cg_zero_mean(const SparseOperator& K, const Eigen::VectorXd& b,
                             const LumpedWeights& w, const SolverConfig& cfg, SolveStats* stats) {
  // null(K) = span{1}; K is symmetric, so its range is the complement of 1.
  const auto remove_constant = [](Eigen::VectorXd& v) { v.array() -= v.mean(); };
  Eigen::VectorXd rhs = b;
  remove_constant(rhs);
  Eigen::VectorXd x = pcg(K.matrix, rhs, cfg, stats, remove_constant);
  x.array() -= w.beta.dot(x) / w.beta.sum();
  return x;
}

DirichletSolver::DirichletSolver(const SparseOperator& K, std::vector<int> dirichlet_nodes)
    : n_(K.rows()), dirichlet_(std::move(dirichlet_nodes)) {
  if (dirichlet_.empty()) throw std::invalid_argument("dirichlet_solve: empty boundary node set");
  std::vector<int> slot(static_cast<std::size_t>(n_), -1);  // >=0: interior index, <-1: boundary
  for (std::size_t i = 0; i < dirichlet_.size(); ++i) slot[static_cast<std::size_t>(dirichlet_[i])] = -2 - static_cast<int>(i);
  for (Eigen::Index i = 0; i < n_; ++i) {
    if (slot[static_cast<std::size_t>(i)] == -1) {
      slot[static_cast<std::size_t>(i)] = static_cast<int>(interior_.size());
      interior_.push_back(static_cast<int>(i));
    }
  }
  std::vector<Eigen::Triplet<double>> tii, tib;
  for (int row : interior_) {
    const int ri = slot[static_cast<std::size_t>(row)];
    for (SparseMatrix::InnerIterator it(K.matrix, row); it; ++it) {
      const int s = slot[static_cast<std::size_t>(it.col())];
      if (s >= 0) tii.emplace_back(ri, s, it.value());
      else tib.emplace_back(ri, -2 - s, it.value());
    }
  }
  const auto ni = static_cast<Eigen::Index>(interior_.size());
  k_ii_.matrix.resize(ni, ni);
  k_ii_.matrix.setFromTriplets(tii.begin(), tii.end());
  k_ii_.symmetric = true;
  k_ib_.resize(ni, static_cast<Eigen::Index>(dirichlet_.size()));
  k_ib_.setFromTriplets(tib.begin(), tib.end());
}

Eigen::VectorXd DirichletSolver::solve(const Eigen::VectorXd& values, const SolverConfig& cfg,
                                       SolveStats* stats) const {
  Eigen::VectorXd out(n_);
  for (std::size_t i = 0; i < dirichlet_.size(); ++i) out[dirichlet_[i]] = values[static_cast<Eigen::Index>(i)];
  if (interior_.empty()) {
    if (stats) *stats = {};
    return out;
  }
  const Eigen::VectorXd rhs = -(k_ib_ * values);
  const Eigen::VectorXd xi = cg_solve(k_ii_, rhs, cfg, stats);
  for (std::size_t i = 0; i < interior_.size(); ++i) out[interior_[i]] = xi[static_cast<Eigen::Index>(i)];
  return out;
}

Eigen::VectorXd dirichlet_solve(const SparseOperator& K, const std::map<int, double>& boundary_values,
                                const SolverConfig& cfg) {
  std::vector<int> nodes;
  Eigen::VectorXd values(static_cast<Eigen::Index>(boundary_values.size()));
  for (const auto& [node, value] : boundary_values) {
    values[static_cast<Eigen::Index>(nodes.size())] = value;
    nodes.push_back(node);
  }
  return DirichletSolver(K, std::move(nodes)).solve(values, cfg);
}

Vec3 solve_node_cross(double c, const Vec3& a, const Vec3& b) {
  const double c2 = c * c;
  return (c2 * b + c * a.cross(b) + a.dot(b) * a) / (c * (c2 + a.squaredNorm()));
}

}  // namespace llg
