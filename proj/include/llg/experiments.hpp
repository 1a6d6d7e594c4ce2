// Experiment drivers: the unit-cube relaxation, the time-step convergence
// study, the current-driven vortex benchmark and a mesh-file driven run.
#pragma once

#include "llg/integrator.hpp"
#include "llg/io.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace llg {

/// Mesh, FEM data and (optionally) the stray-field solver, shared between runs.
struct Problem {
  std::shared_ptr<const TetMesh> mesh;
  std::shared_ptr<const FemSpace> space;
  std::shared_ptr<const StrayFieldSolver> stray;
};

Problem make_problem(std::shared_ptr<const TetMesh> mesh, bool with_stray, int threads = 1);

/// Per-run aggregates mirroring the iteration and timing tables.
struct RunSummary {
  int steps = 0;
  double mean_sweeps = 0.0;
  double mean_wtime = 0.0;
  double mean_wtime_stray = 0.0;
  double mean_stray_solves_loop = 0.0;
  double mean_stray_solves_other = 0.0;
  double max_norm_dev = 0.0;
  double max_abs_energy_residual = 0.0;
  double max_energy_increase = 0.0;  // max_i E(m^{i+1}) - E(m^i)
  double cumulative_defect = 0.0;
  double final_energy = 0.0;
  Vec3 final_m_avg = Vec3::Zero();
};

RunSummary summarize(const IntegratorConfig& cfg, const Trajectory& traj);
void write_summary(const std::string& path, const RunSummary& s, PiStrategy strategy, double k);

struct CubeParams {
  int n = 8;  // cells per edge; 6 n^3 tetrahedra
  double k = 0.0016;
  double T = 5.0;
  double alpha = 1.0;
  double c_ex = 1.0;
  double epsilon = 1e-10;
  int max_sweeps = 500;
  Vec3 f{-2.0, -0.5, 0.0};
  Vec3 m0{1.0, 0.0, 0.0};
  bool stray = true;
  PiStrategy strategy = PiStrategy::Midpoint;
  FirstStep first_step = FirstStep::AsPrinted;
  std::vector<double> snapshots{0, 1, 2, 3, 4, 5};
  int threads = 1;
  std::string out_dir;  // empty: no files
};

/// Reads cube keys; throws ConfigError on bad values.
CubeParams cube_params(Config& cfg);

struct CubeResult {
  Trajectory traj;
  RunSummary summary;
};

/// `problem` may be shared between runs on the same mesh; built when null.
CubeResult run_cube(const CubeParams& p, const Problem* problem = nullptr);

struct ConvergenceParams {
  int n = 4;
  double T = 0.5;
  std::vector<double> ks{4e-4, 8e-4, 16e-4};
  double k_ref = 1e-4;
  PiStrategy reference_strategy = PiStrategy::Midpoint;
  std::vector<PiStrategy> strategies{PiStrategy::Midpoint, PiStrategy::AdamsBashforth,
                                     PiStrategy::ExplicitEuler};
  double alpha = 1.0;
  double c_ex = 1.0;
  double epsilon = 1e-10;
  Vec3 f{-2.0, -0.5, 0.0};
  Vec3 m0{1.0, 0.0, 0.0};
  bool stray = true;
  int threads = 1;
  std::string out_dir;
};

ConvergenceParams convergence_params(Config& cfg);

struct ConvergenceRow {
  PiStrategy strategy;
  double k;
  double error;
  double mean_sweeps;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  std::map<PiStrategy, double> slopes;
};

/// Throws ConfigError unless every k is an integer multiple (>1) of k_ref.
/// Errors are compared at multiples of the coarsest k up to T.
ConvergenceResult run_convergence(const ConvergenceParams& p, const Problem* problem = nullptr);

/// Physical parameters and discretization of the vortex benchmark. Lengths
/// are in units of L = 1 nm.
struct MumagParams {
  int nx = 20, ny = 20, nz = 2;
  double A = 1.3e-11;
  double Ms = 8.0e5;
  double alpha = 0.1;
  double gamma0 = 2.21e5;
  double mu0 = 4e-7 * 3.14159265358979323846;
  double L = 1e-9;
  double dt_ps = 0.4;         // time-step in picoseconds
  double relax_ns = 2.0;      // length of the relaxation stage
  double relax_alpha = 1.0;   // damping used while relaxing
  double T_ns = 8.0;
  Vec3 v_tilde{-72.17, 0.0, 0.0};  // m/s
  double xi = 0.05;
  double epsilon = 5e-5;
  int max_sweeps = 500;
  PiStrategy strategy = PiStrategy::AdamsBashforth;
  double sample_ns = 0.01;    // spacing of the averaged-magnetization series
  int threads = 1;
  std::string out_dir;
};

MumagParams mumag_params(Config& cfg);

struct MumagScaling {
  double c_ex;        // 2A / (mu0 Ms^2 L^2)
  Vec3 v;             // -v_tilde / (gamma0 Ms L)
  double time_unit_ps;  // 1 / (gamma0 Ms), in ps
  double k;           // dt_ps / time_unit_ps
};

MumagScaling mumag_scaling(const MumagParams& p);

/// (t in ns, <m_x>, <m_y>, <m_z>)
using AverageSeries = std::vector<std::array<double, 4>>;

struct MumagStage {
  NodalVectorField final_state;
  AverageSeries series;
  RunSummary summary;
};

/// Analytic vortex (-y, x, 10) / sqrt(x^2 + y^2 + 100) at the mesh nodes.
NodalVectorField vortex_initial(const TetMesh& mesh);

/// One stage of the benchmark from `m_start`: duration in ns, spin velocity
/// in m/s (zero disables the spin torque), damping alpha.
MumagStage run_mumag_stage(const MumagParams& p, const Problem& problem, const NodalVectorField& m_start,
                           double duration_ns, const Vec3& v_tilde, double alpha);

struct MumagResult {
  MumagStage relax;
  MumagStage dynamics;
};

MumagResult run_mumag5(const MumagParams& p, const Problem* problem = nullptr);
Problem make_mumag_problem(const MumagParams& p);

/// Mesh-file driven run with the lower-order terms chosen in the config.
struct CustomResult {
  Trajectory traj;
  RunSummary summary;
};
CustomResult run_custom(Config& cfg, const std::string& out_dir, PiStrategy strategy_default,
                        int threads);

}  // namespace llg
