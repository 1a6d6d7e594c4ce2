#include "llg/integrator.hpp"

#include "llg/linsolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

namespace llg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int step_of_time(double t, double k) { return static_cast<int>(std::llround(t / k)); }

}  // namespace

void IntegratorConfig::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(k, "k");
  positive(T, "T");
  positive(alpha, "alpha");
  positive(c_ex, "c_ex");
  positive(epsilon, "epsilon");
  if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be >= 1");
  const double ratio = T / k;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("T/k must be an integer");
  for (double t : output_times) {
    if (t < -1e-12 || t > T * (1 + 1e-12)) throw std::invalid_argument("output time outside [0, T]");
    if (std::abs(t / k - std::round(t / k)) > 1e-6)
      throw std::invalid_argument("output times must be multiples of k");
  }
}

int IntegratorConfig::num_steps() const { return static_cast<int>(std::llround(T / k)); }

Trajectory::Trajectory(double k, int steps, NodalVectorField m0)
    : k_(k), steps_(steps), m0_(std::move(m0)) {}

const NodalVectorField& Trajectory::state(int i) const {
  if (i == -1) return m0_;
  auto it = states_.find(i);
  if (it == states_.end()) throw std::out_of_range("state " + std::to_string(i) + " not stored");
  return it->second;
}

NodalVectorField Trajectory::reconstruct(Reconstruction kind, double t) const {
  if (!(t >= 0.0) || !(t < final_time() - 1e-12 * k_)) throw std::out_of_range("reconstruct: t outside [0, T)");
  const int i = std::min(static_cast<int>(std::floor(t / k_ + 1e-9)), steps_ - 1);
  switch (kind) {
    case Reconstruction::Left: return state(i);
    case Reconstruction::Right: return state(i + 1);
    case Reconstruction::Mean: return 0.5 * (state(i) + state(i + 1));
    case Reconstruction::Lagged:
      if (i < 1) throw std::out_of_range("reconstruct: lagged needs t >= k");
      return state(i - 1);
    case Reconstruction::Linear: {
      const double s = std::clamp((t - i * k_) / k_, 0.0, 1.0);
      return (1.0 - s) * state(i) + s * state(i + 1);
    }
  }
  throw std::logic_error("reconstruct: bad kind");
}

NodalVectorField effective_field(const IntegratorConfig& cfg, const ContributionSet& set,
                                 const NodalVectorField& m_mid, const NodalVectorField& pi_term,
                                 const NodalVectorField& f_half) {
  const FemSpace& space = set.space();
  NodalVectorField h = discrete_laplacian(space.stiffness, space.weights, m_mid);
  h *= cfg.c_ex;
  h += pi_term;
  h += project_Ph(f_half, space.mass, space.weights);
  return h;
}

NodalVectorField initial_field(const IntegratorConfig& cfg, const ContributionSet& set,
                               const NodalVectorField& m0, const NodalVectorField& f_half,
                               PiCache* cache) {
  // Every strategy reduces to pi(m0) when all three arguments are m0.
  PiValue p0;
  if (set.has_lower_order()) p0 = evaluate_pi(set, m0);
  else p0 = PiValue{NodalVectorField(m0.size()), NodalVectorField(m0.size())};
  if (cache) {
    cache->curr = p0;
    cache->prev = p0;
    cache->valid = true;
  }
  return effective_field(cfg, set, m0, p0.total(), f_half);
}

StepResult fixed_point_step(const IntegratorConfig& cfg, const ContributionSet& set,
                            const NodalVectorField& m_prev, const NodalVectorField& m_curr,
                            const NodalVectorField& h_curr, const NodalVectorField& f_half,
                            PiCache* cache, int step_index) {
  const auto t_start = Clock::now();
  const FemSpace& space = set.space();
  const std::size_t n = m_curr.size();
  const double k = cfg.k;
  const bool lower = set.has_lower_order();
  PiStrategy strategy = cfg.strategy;
  if (step_index == 0 && cfg.first_step == FirstStep::Midpoint) strategy = PiStrategy::Midpoint;

  StepResult out;
  StepReport& rep = out.report;

  auto t0 = Clock::now();
  const NodalVectorField pf = project_Ph(f_half, space.mass, space.weights);
  rep.wtime_field += seconds_since(t0);

  // Explicit strategies: the lower-order term is fixed for the whole step.
  PiCache local;
  if (lower && strategy != PiStrategy::Midpoint && !(cache && cache->valid)) {
    local.curr = evaluate_pi(set, m_curr);
    local.prev = evaluate_pi(set, m_prev);
    rep.stray_solves_other += local.curr.stray_solves + local.prev.stray_solves;
    rep.wtime_stray += local.curr.stray_seconds + local.prev.stray_seconds;
    local.valid = true;
  }
  const PiCache& pc = (cache && cache->valid) ? *cache : local;
  NodalVectorField pi_fixed(n);
  if (lower && strategy == PiStrategy::AdamsBashforth) pi_fixed = adams_bashforth(pc.curr, pc.prev).total();
  if (lower && strategy == PiStrategy::ExplicitEuler) pi_fixed = pc.curr.total();

  const double c = 2.0 / k;
  const double damp = 2.0 * cfg.alpha / k;
  NodalVectorField h = h_curr;
  NodalVectorField eta(n);
  NodalVectorField pi_term = pi_fixed;
  bool converged = false;
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    t0 = Clock::now();
    for (std::size_t l = 0; l < n; ++l) eta[l] = solve_node_cross(c, h[l] + damp * m_curr[l], c * m_curr[l]);
    rep.wtime_nodal += seconds_since(t0);

    // Pi(2 eta - m^i, m^i, m^{i-1}); for the midpoint rule its argument is eta.
    if (lower && strategy == PiStrategy::Midpoint) {
      PiValue p = evaluate_pi(set, eta);
      rep.stray_solves_loop += p.stray_solves;
      rep.wtime_stray += p.stray_seconds;
      pi_term = p.total();
    }
    t0 = Clock::now();
    NodalVectorField h_new = discrete_laplacian(space.stiffness, space.weights, eta);
    h_new *= cfg.c_ex;
    h_new += pi_term;
    h_new += pf;
    const double res = norm_h(h_new - h, space.weights);
    rep.wtime_field += seconds_since(t0);
    h = std::move(h_new);
    rep.sweeps = sweep + 1;
    rep.residual = res;
    rep.residual_history.push_back(res);
    if (!std::isfinite(res)) break;
    if (res <= cfg.epsilon) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "step " << step_index << ": fixed-point iteration ";
    if (std::isfinite(rep.residual)) msg << "did not reach epsilon " << cfg.epsilon << " in " << cfg.max_sweeps << " sweeps";
    else msg << "diverged";
    msg << " (last residual " << rep.residual << "); the time-step is likely too large for the mesh";
    throw StepError(msg.str(), step_index, rep.residual_history);
  }

  out.m_next = 2.0 * eta;
  out.m_next -= m_curr;
  out.pi_used = std::move(pi_term);

  // Field for the next step: Pi(m^{i+1}, m^{i+1}, m^i).
  PiValue p_next;
  if (lower) {
    p_next = evaluate_pi(set, out.m_next);
    rep.stray_solves_other += p_next.stray_solves;
    rep.wtime_stray += p_next.stray_seconds;
  } else {
    p_next = PiValue{NodalVectorField(n), NodalVectorField(n)};
  }
  // pi(m^i), needed for the Adams-Bashforth extrapolant and the cache.
  PiValue p_curr_local;
  const PiValue* p_curr = pc.valid ? &pc.curr : nullptr;
  const bool need_curr = lower && (cfg.strategy == PiStrategy::AdamsBashforth || cache);
  if (need_curr && !p_curr) {
    p_curr_local = evaluate_pi(set, m_curr);
    rep.stray_solves_other += p_curr_local.stray_solves;
    rep.wtime_stray += p_curr_local.stray_seconds;
    p_curr = &p_curr_local;
  }
  t0 = Clock::now();
  const NodalVectorField pi_next = (lower && cfg.strategy == PiStrategy::AdamsBashforth)
                                       ? adams_bashforth(p_next, *p_curr).total()
                                       : p_next.total();
  out.h_next = discrete_laplacian(space.stiffness, space.weights, out.m_next);
  out.h_next *= cfg.c_ex;
  out.h_next += pi_next;
  out.h_next += pf;
  rep.wtime_field += seconds_since(t0);

  if (cache) {
    cache->prev = p_curr ? *p_curr : p_next;
    cache->curr = p_next;
    cache->valid = true;
  }
  // Only the lower-order energy is known here; the integrator fills the rest.
  if (lower) rep.energy.pi = -0.5 * inner_h(p_next.linear, out.m_next, space.weights);
  rep.wtime_total = seconds_since(t_start);
  return out;
}

Trajectory integrate(const IntegratorConfig& cfg, const ContributionSet& set,
                     const NodalVectorField& m0, const StepObserver& observer) {
  cfg.validate();
  const FemSpace& space = set.space();
  const TetMesh& mesh = *space.mesh;
  if (m0.size() != mesh.num_nodes()) throw std::invalid_argument("m0 size does not match the mesh");
  if (!m0.all_finite()) throw std::invalid_argument("m0 has non-finite entries");
  for (std::size_t l = 0; l < m0.size(); ++l) {
    if (m0[l].norm() == 0.0) {
      std::cerr << "warning: initial magnetization vanishes at node " << l << "; it will not move\n";
      break;
    }
  }

  const int steps = cfg.num_steps();
  const double k = cfg.k;
  Trajectory traj(k, steps, m0);
  std::vector<int> keep;
  for (double t : cfg.output_times) keep.push_back(step_of_time(t, k));
  const auto wanted = [&](int i) {
    return cfg.store_all || i == 0 || i == steps || std::find(keep.begin(), keep.end(), i) != keep.end();
  };
  traj.store(0, m0);

  const bool constant_f = set.applied_field_is_constant();
  NodalVectorField f_half = sample_applied_field(set, mesh, 0.0, k);
  PiCache cache;
  NodalVectorField h = initial_field(cfg, set, m0, f_half, &cache);

  if (cfg.diagnostics) {
    DiagnosticsRecord r;
    const NodalVectorField f0 = constant_f ? f_half : sample_applied_field(set, mesh, 0.0, 0.0);
    r.energy = energy(cfg.c_ex, set, m0, f0, &cache.curr.linear);
    r.m_avg = average_magnetization(m0, space.weights);
    traj.record(r);
  }

  NodalVectorField m_prev = m0, m_curr = m0;
  for (int i = 0; i < steps; ++i) {
    if (i > 0 && !constant_f) f_half = sample_applied_field(set, mesh, i * k, k);
    StepResult res = fixed_point_step(cfg, set, m_prev, m_curr, h, f_half, &cache, i);
    if (!res.m_next.all_finite()) {
      throw StepError("step " + std::to_string(i) + ": non-finite magnetization", i, res.report.residual_history);
    }
    StepReport& rep = res.report;
    rep.norm_dev_max = max_norm_deviation(res.m_next, m0);
    if (cfg.diagnostics) {
      const double pi_part = rep.energy.pi;
      const NodalVectorField f_next = constant_f ? f_half : sample_applied_field(set, mesh, (i + 1) * k, 0.0);
      rep.energy.exchange = 0.5 * cfg.c_ex * grad_inner(res.m_next, res.m_next, space.stiffness);
      rep.energy.zeeman = -inner_l2(f_next, res.m_next, space.mass);
      rep.energy.pi = pi_part;
      rep.balance = energy_identity_residual(cfg.c_ex, cfg.alpha, k, space, m_curr, res.m_next, res.pi_used, f_half);

      DiagnosticsRecord r;
      r.step = i + 1;
      r.t = (i + 1) * k;
      r.energy = rep.energy;
      r.norm_dev_max = rep.norm_dev_max;
      r.energy_residual = rep.balance.residual;
      r.m_avg = average_magnetization(res.m_next, space.weights);
      r.sweeps = rep.sweeps;
      r.wtime_total = rep.wtime_total;
      r.wtime_stray = rep.wtime_stray;
      traj.record(r);
    }
    if (observer) observer(i + 1, res.m_next, rep);
    m_prev = std::move(m_curr);
    m_curr = std::move(res.m_next);
    h = std::move(res.h_next);
    if (wanted(i + 1)) traj.store(i + 1, m_curr);
    traj.append(std::move(rep));
  }
  return traj;
}

double reference_error(const Trajectory& ref, const Trajectory& traj, const SparseOperator& mass) {
  const double tol = 1e-9 * std::max(ref.k(), traj.k());
  double err = 0.0;
  int shared = 0;
  for (const auto& [i, m] : traj.states()) {
    const double t = i * traj.k();
    const int j = step_of_time(t, ref.k());
    if (std::abs(j * ref.k() - t) > tol || !ref.has_state(j)) continue;
    err = std::max(err, norm_l2(ref.state(j) - m, mass));
    ++shared;
  }
  if (shared == 0) throw std::invalid_argument("reference_error: no shared output times");
  return err;
}

}  // namespace llg
