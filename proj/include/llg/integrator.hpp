// Implicit-explicit midpoint scheme for LLG with the inexact fixed-point
// solver: each sweep solves a nodewise 3x3 system in closed form and then
// refreshes the effective field, until the field stagnates to epsilon.
#pragma once

#include "llg/contributions.hpp"
#include "llg/diagnostics.hpp"

#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

namespace llg {

/// Treatment of the lower-order term in step 0. AsPrinted applies the chosen
/// strategy with m^{-1} = m^0 (so AB starts like EE); Midpoint uses the
/// midpoint rule for step 0 only.
enum class FirstStep { AsPrinted, Midpoint };

struct IntegratorConfig {
  double k = 1e-3;
  double T = 1.0;
  double alpha = 1.0;
  double c_ex = 1.0;
  double epsilon = 1e-10;
  PiStrategy strategy = PiStrategy::Midpoint;
  int max_sweeps = 500;
  FirstStep first_step = FirstStep::AsPrinted;
  /// Store every state (needed for reconstruct); otherwise only the states at
  /// `output_times` plus the first and last are kept.
  bool store_all = false;
  std::vector<double> output_times;
  /// Evaluate energies and the energy identity every step.
  bool diagnostics = true;

  /// Throws std::invalid_argument on non-positive parameters or when T/k is
  /// not an integer within 1e-9.
  void validate() const;
  int num_steps() const;
};

struct StepReport {
  int sweeps = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
  double wtime_total = 0.0;
  double wtime_stray = 0.0;
  double wtime_field = 0.0;  // exchange, projection and other field work
  double wtime_nodal = 0.0;
  int stray_solves_loop = 0;   // inside the sweep loop
  int stray_solves_other = 0;  // once per step: field for the next step, cache fill
  EnergyParts energy;            // at m^{i+1}
  EnergyBalance balance;
  double norm_dev_max = 0.0;  // against m^0
};

/// Raised when the sweep loop does not reach epsilon within max_sweeps.
class StepError : public std::runtime_error {
 public:
  StepError(const std::string& what, int step, std::vector<double> history)
      : std::runtime_error(what), step_(step), history_(std::move(history)) {}
  int step() const { return step_; }
  const std::vector<double>& residual_history() const { return history_; }

 private:
  int step_;
  std::vector<double> history_;
};

enum class Reconstruction { Left, Right, Mean, Lagged, Linear };

class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double k, int steps, NodalVectorField m0);

  double k() const { return k_; }
  int num_steps() const { return steps_; }
  double final_time() const { return k_ * steps_; }
  const NodalVectorField& initial() const { return m0_; }
  bool has_state(int i) const { return states_.count(i) != 0; }
  /// m^i; m^{-1} is m^0 by convention. Throws std::out_of_range if not stored.
  const NodalVectorField& state(int i) const;
  const NodalVectorField& final_state() const { return state(steps_); }
  const std::map<int, NodalVectorField>& states() const { return states_; }
  const std::vector<StepReport>& reports() const { return reports_; }
  const DiagnosticsSeries& series() const { return series_; }

  /// Time reconstructions on [t_i, t_{i+1}). Throws std::out_of_range for t
  /// outside [0, T), for `Lagged` with t < k, or when a needed state is not stored.
  NodalVectorField reconstruct(Reconstruction kind, double t) const;

  void store(int i, NodalVectorField m) { states_[i] = std::move(m); }
  void append(StepReport r) { reports_.push_back(std::move(r)); }
  void record(DiagnosticsRecord r) { series_.push_back(r); }

 private:
  double k_ = 0.0;
  int steps_ = 0;
  NodalVectorField m0_;
  std::map<int, NodalVectorField> states_;
  std::vector<StepReport> reports_;
  DiagnosticsSeries series_;
};

/// C_ex Delta_h m_mid + pi_term + P_h f_half (pi_term already projected).
NodalVectorField effective_field(const IntegratorConfig& cfg, const ContributionSet& set,
                                 const NodalVectorField& m_mid, const NodalVectorField& pi_term,
                                 const NodalVectorField& f_half);

/// pi values of m^i and m^{i-1} carried between steps so that the explicit
/// strategies evaluate the stray field once per step.
struct PiCache {
  PiValue curr;
  PiValue prev;
  bool valid = false;
};

struct StepResult {
  NodalVectorField m_next;
  NodalVectorField h_next;
  NodalVectorField pi_used;  // Pi_h^i that entered the final sweep
  StepReport report;
};

/// One time-step (sweeps, finalize, field for the next step). `f_half` is the
/// nodal applied field at t_i + k/2. With `cache` the explicit strategies
/// reuse pi(m^i), pi(m^{i-1}) and update the cache to the next step.
StepResult fixed_point_step(const IntegratorConfig& cfg, const ContributionSet& set,
                            const NodalVectorField& m_prev, const NodalVectorField& m_curr,
                            const NodalVectorField& h_curr, const NodalVectorField& f_half,
                            PiCache* cache = nullptr, int step_index = 0);

/// h^0 from m^0 and f^{1/2}.
NodalVectorField initial_field(const IntegratorConfig& cfg, const ContributionSet& set,
                               const NodalVectorField& m0, const NodalVectorField& f_half,
                               PiCache* cache = nullptr);

using StepObserver = std::function<void(int step, const NodalVectorField& m, const StepReport&)>;

/// Runs all M steps. Warns on stderr when a node of m0 has zero length.
Trajectory integrate(const IntegratorConfig& cfg, const ContributionSet& set,
                     const NodalVectorField& m0, const StepObserver& observer = {});

/// max over shared stored times of |m_ref(t) - m(t)|_{L2}; shared times are
/// matched by |t_ref - t| <= 1e-9 * max(k, k_ref).
double reference_error(const Trajectory& ref, const Trajectory& traj, const SparseOperator& mass);

}  // namespace llg
