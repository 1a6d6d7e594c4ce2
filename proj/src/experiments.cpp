#include "llg/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace llg {

namespace {

PiStrategy strategy_from(Config& cfg, const std::string& key, PiStrategy fallback) {
  const std::string s = cfg.get_string(key, to_string(fallback));
  try {
    return parse_strategy(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

FirstStep first_step_from(Config& cfg) {
  const std::string s = cfg.get_string("first_step", "as-printed");
  if (s == "as-printed") return FirstStep::AsPrinted;
  if (s == "mp") return FirstStep::Midpoint;
  throw ConfigError("first_step: expected 'mp' or 'as-printed', got '" + s + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string time_tag(double t) {
  std::ostringstream os;
  os << std::defaultfloat << std::setprecision(6) << t;
  return os.str();
}

}  // namespace

Problem make_problem(std::shared_ptr<const TetMesh> mesh, bool with_stray, int threads) {
  Problem p;
  p.mesh = std::move(mesh);
  p.space = std::make_shared<const FemSpace>(p.mesh);
  if (with_stray) {
    StrayFieldOptions opt;
    opt.double_layer.threads = std::max(1, threads);
    p.stray = std::make_shared<const StrayFieldSolver>(p.space, opt);
  }
  return p;
}

RunSummary summarize(const IntegratorConfig& cfg, const Trajectory& traj) {
  RunSummary s;
  const auto& reps = traj.reports();
  s.steps = static_cast<int>(reps.size());
  std::vector<EnergyBalance> balances;
  for (const auto& r : reps) {
    s.mean_sweeps += r.sweeps;
    s.mean_wtime += r.wtime_total;
    s.mean_wtime_stray += r.wtime_stray;
    s.mean_stray_solves_loop += r.stray_solves_loop;
    s.mean_stray_solves_other += r.stray_solves_other;
    s.max_norm_dev = std::max(s.max_norm_dev, r.norm_dev_max);
    s.max_abs_energy_residual = std::max(s.max_abs_energy_residual, std::abs(r.balance.residual));
    balances.push_back(r.balance);
  }
  if (s.steps > 0) {
    const double n = s.steps;
    s.mean_sweeps /= n;
    s.mean_wtime /= n;
    s.mean_wtime_stray /= n;
    s.mean_stray_solves_loop /= n;
    s.mean_stray_solves_other /= n;
  }
  const auto& series = traj.series();
  s.max_energy_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < series.size(); ++i)
    s.max_energy_increase = std::max(s.max_energy_increase, series[i].energy.total() - series[i - 1].energy.total());
  if (series.size() < 2) s.max_energy_increase = 0.0;
  if (cfg.diagnostics && !balances.empty())
    s.cumulative_defect = cumulative_balance_defect(cfg.c_ex, cfg.alpha, cfg.k, balances);
  if (!series.empty()) {
    s.final_energy = series.back().energy.total();
    s.final_m_avg = series.back().m_avg;
  }
  return s;
}

void write_summary(const std::string& path, const RunSummary& s, PiStrategy strategy, double k) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << std::setprecision(17);
  f << "strategy = " << to_string(strategy) << "\n"
    << "k = " << k << "\n"
    << "steps = " << s.steps << "\n"
    << "mean_sweeps = " << s.mean_sweeps << "\n"
    << "mean_wtime = " << s.mean_wtime << "\n"
    << "mean_wtime_stray = " << s.mean_wtime_stray << "\n"
    << "mean_stray_solves_loop = " << s.mean_stray_solves_loop << "\n"
    << "mean_stray_solves_other = " << s.mean_stray_solves_other << "\n"
    << "max_norm_dev = " << s.max_norm_dev << "\n"
    << "max_abs_energy_residual = " << s.max_abs_energy_residual << "\n"
    << "max_energy_increase = " << s.max_energy_increase << "\n"
    << "cumulative_defect = " << s.cumulative_defect << "\n"
    << "final_energy = " << s.final_energy << "\n"
    << "final_m_avg = " << s.final_m_avg[0] << ", " << s.final_m_avg[1] << ", " << s.final_m_avg[2] << "\n";
}

// ---------------------------------------------------------------- cube

CubeParams cube_params(Config& cfg) {
  CubeParams p;
  p.n = cfg.get_int("mesh_n", p.n);
  p.k = cfg.get_double("k", p.k);
  p.T = cfg.get_double("T", p.T);
  p.alpha = cfg.get_double("alpha", p.alpha);
  p.c_ex = cfg.get_double("c_ex", p.c_ex);
  p.epsilon = cfg.get_double("epsilon", p.epsilon);
  p.max_sweeps = cfg.get_int("max_sweeps", p.max_sweeps);
  p.f = cfg.get_vec3("f", p.f);
  p.m0 = cfg.get_vec3("m0", p.m0);
  p.stray = cfg.get_bool("stray", p.stray);
  p.strategy = strategy_from(cfg, "strategy", p.strategy);
  p.first_step = first_step_from(cfg);
  p.snapshots = cfg.get_list("snapshots", p.snapshots);
  require(p.n >= 1, "mesh_n must be >= 1");
  require(std::abs(p.m0.norm() - 1.0) < 1e-12, "m0 must be a unit vector");
  IntegratorConfig ic;
  ic.k = p.k;
  ic.T = p.T;
  ic.alpha = p.alpha;
  ic.c_ex = p.c_ex;
  ic.epsilon = p.epsilon;
  ic.max_sweeps = p.max_sweeps;
  try {
    ic.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

CubeResult run_cube(const CubeParams& p, const Problem* problem) {
  Problem local;
  if (!problem) {
    local = make_problem(std::make_shared<const TetMesh>(build_box_mesh(p.n, p.n, p.n, Vec3::Zero(), Vec3::Ones())),
                         p.stray, p.threads);
    problem = &local;
  }
  ContributionSet set(problem->space);
  if (p.stray) {
    if (!problem->stray) throw std::invalid_argument("run_cube: problem has no stray-field solver");
    set.enable_stray_field(problem->stray);
  }
  set.set_applied_field(p.f);

  IntegratorConfig ic;
  ic.k = p.k;
  ic.T = p.T;
  ic.alpha = p.alpha;
  ic.c_ex = p.c_ex;
  ic.epsilon = p.epsilon;
  ic.max_sweeps = p.max_sweeps;
  ic.strategy = p.strategy;
  ic.first_step = p.first_step;
  for (double t : p.snapshots)
    if (t <= p.T + 1e-12) ic.output_times.push_back(t);
  try {
    ic.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const NodalVectorField m0(problem->mesh->num_nodes(), p.m0);
  CubeResult res;
  res.traj = integrate(ic, set, m0);
  res.summary = summarize(ic, res.traj);

  if (!p.out_dir.empty()) {
    ensure_dir(p.out_dir);
    write_series_csv(join(p.out_dir, "series.csv"), res.traj.series());
    for (double t : ic.output_times) {
      const int i = static_cast<int>(std::llround(t / p.k));
      write_vtk(join(p.out_dir, "m_t" + time_tag(t) + ".vtk"), *problem->mesh, res.traj.state(i),
                "magnetization at t = " + time_tag(t));
    }
    write_summary(join(p.out_dir, "summary.txt"), res.summary, p.strategy, p.k);
  }
  return res;
}

// ---------------------------------------------------------------- convergence

ConvergenceParams convergence_params(Config& cfg) {
  ConvergenceParams p;
  if (cfg.has("k")) throw ConfigError("convergence uses 'ks' and 'k_ref'; a single k does not apply");
  p.n = cfg.get_int("mesh_n", p.n);
  p.T = cfg.get_double("T", p.T);
  p.ks = cfg.get_list("ks", p.ks);
  p.k_ref = cfg.get_double("k_ref", p.k_ref);
  p.reference_strategy = strategy_from(cfg, "reference_strategy", p.reference_strategy);
  const std::string list = cfg.get_string("strategies", "mp, ab, ee");
  if (cfg.has("strategy")) {
    p.strategies = {strategy_from(cfg, "strategy", PiStrategy::Midpoint)};
  } else {
    p.strategies.clear();
    std::string t = list;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::istringstream is(t);
    for (std::string tok; is >> tok;) {
      try {
        p.strategies.push_back(parse_strategy(tok));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("strategies: ") + e.what());
      }
    }
    require(!p.strategies.empty(), "strategies: empty list");
  }
  p.alpha = cfg.get_double("alpha", p.alpha);
  p.c_ex = cfg.get_double("c_ex", p.c_ex);
  p.epsilon = cfg.get_double("epsilon", p.epsilon);
  p.f = cfg.get_vec3("f", p.f);
  p.m0 = cfg.get_vec3("m0", p.m0);
  p.stray = cfg.get_bool("stray", p.stray);
  require(std::abs(p.m0.norm() - 1.0) < 1e-12, "m0 must be a unit vector");
  return p;
}

ConvergenceResult run_convergence(const ConvergenceParams& p, const Problem* problem) {
  require(p.ks.size() >= 2, "convergence needs at least two k values");
  require(p.k_ref > 0.0, "k_ref must be positive");
  const double k_max = *std::max_element(p.ks.begin(), p.ks.end());
  for (double k : p.ks) {
    const double r = k / p.k_ref;
    require(r > 1.5 && std::abs(r - std::round(r)) < 1e-9 * r,
            "every k must be an integer multiple (> 1) of k_ref");
  }
  require(p.T >= k_max, "T must be at least the largest k");
  Problem local;
  if (!problem) {
    local = make_problem(std::make_shared<const TetMesh>(build_box_mesh(p.n, p.n, p.n, Vec3::Zero(), Vec3::Ones())),
                         p.stray, p.threads);
    problem = &local;
  }
  ContributionSet set(problem->space);
  if (p.stray) set.enable_stray_field(problem->stray);
  set.set_applied_field(p.f);
  const NodalVectorField m0(problem->mesh->num_nodes(), p.m0);

  // Shared output grid: multiples of the coarsest k. Each run stops at the
  // last whole step not beyond T, so T need not be a multiple of every k.
  const auto whole_steps = [&](double k) { return std::floor(p.T / k + 1e-9); };
  std::vector<double> grid;
  const int ngrid = static_cast<int>(whole_steps(k_max));
  for (int j = 0; j <= ngrid; ++j) grid.push_back(j * k_max);

  const auto run = [&](PiStrategy s, double k) {
    IntegratorConfig ic;
    ic.k = k;
    ic.T = whole_steps(k) * k;
    ic.alpha = p.alpha;
    ic.c_ex = p.c_ex;
    ic.epsilon = p.epsilon;
    ic.strategy = s;
    ic.output_times = grid;
    ic.diagnostics = false;
    return integrate(ic, set, m0);
  };

  const Trajectory ref = run(p.reference_strategy, p.k_ref);
  ConvergenceResult out;
  for (PiStrategy s : p.strategies) {
    std::vector<double> ks, errs;
    for (double k : p.ks) {
      const Trajectory tr = run(s, k);
      double sweeps = 0.0;
      for (const auto& r : tr.reports()) sweeps += r.sweeps;
      const double err = reference_error(ref, tr, problem->space->mass);
      out.rows.push_back({s, k, err, sweeps / std::max<std::size_t>(1, tr.reports().size())});
      ks.push_back(k);
      errs.push_back(err);
    }
    out.slopes[s] = fit_order(ks, errs);
  }

  if (!p.out_dir.empty()) {
    ensure_dir(p.out_dir);
    std::ofstream f(join(p.out_dir, "errors.csv"));
    f << "strategy,k,error,mean_sweeps\n" << std::setprecision(17);
    for (const auto& r : out.rows) f << to_string(r.strategy) << ',' << r.k << ',' << r.error << ',' << r.mean_sweeps << "\n";
    std::ofstream g(join(p.out_dir, "orders.csv"));
    g << "strategy,order\n" << std::setprecision(17);
    for (const auto& [s, slope] : out.slopes) g << to_string(s) << ',' << slope << "\n";
  }
  return out;
}

// ---------------------------------------------------------------- vortex benchmark

MumagParams mumag_params(Config& cfg) {
  MumagParams p;
  p.nx = cfg.get_int("mesh_nx", p.nx);
  p.ny = cfg.get_int("mesh_ny", p.ny);
  p.nz = cfg.get_int("mesh_nz", p.nz);
  p.A = cfg.get_double("A", p.A);
  p.Ms = cfg.get_double("Ms", p.Ms);
  p.alpha = cfg.get_double("alpha", p.alpha);
  p.gamma0 = cfg.get_double("gamma0", p.gamma0);
  p.mu0 = cfg.get_double("mu0", p.mu0);
  p.L = cfg.get_double("L", p.L);
  p.relax_ns = cfg.get_double("relax_ns", p.relax_ns);
  p.relax_alpha = cfg.get_double("relax_alpha", p.relax_alpha);
  p.T_ns = cfg.get_double("T_ns", p.T_ns);
  p.v_tilde = cfg.get_vec3("v_tilde", p.v_tilde);
  p.xi = cfg.get_double("xi", p.xi);
  p.epsilon = cfg.get_double("epsilon", p.epsilon);
  p.max_sweeps = cfg.get_int("max_sweeps", p.max_sweeps);
  p.strategy = strategy_from(cfg, "strategy", p.strategy);
  p.sample_ns = cfg.get_double("sample_ns", p.sample_ns);
  if (cfg.has("k")) {
    // A nondimensional k from the command line overrides dt_ps.
    const double k = cfg.get_double("k", 0.0);
    require(k > 0.0, "k must be positive");
    std::ostringstream os;
    os << std::setprecision(17) << k * mumag_scaling(p).time_unit_ps;
    cfg.set("dt_ps", os.str());
    p.dt_ps = cfg.get_double("dt_ps", p.dt_ps);
  } else {
    p.dt_ps = cfg.get_double("dt_ps", p.dt_ps);
  }
  require(p.nx >= 1 && p.ny >= 1 && p.nz >= 1, "mesh_nx, mesh_ny, mesh_nz must be >= 1");
  require(p.A > 0 && p.Ms > 0 && p.gamma0 > 0 && p.mu0 > 0 && p.L > 0, "physical constants must be positive");
  require(p.dt_ps > 0 && p.relax_ns >= 0 && p.T_ns > 0 && p.sample_ns > 0, "times must be positive");
  require(p.xi > 0, "xi must be positive");
  return p;
}

MumagScaling mumag_scaling(const MumagParams& p) {
  MumagScaling s;
  s.c_ex = 2.0 * p.A / (p.mu0 * p.Ms * p.Ms * p.L * p.L);
  s.v = -p.v_tilde / (p.gamma0 * p.Ms * p.L);
  s.time_unit_ps = 1e12 / (p.gamma0 * p.Ms);
  s.k = p.dt_ps / s.time_unit_ps;
  return s;
}

NodalVectorField vortex_initial(const TetMesh& mesh) {
  return interpolate_nodal(
      [](const Vec3& x) -> Vec3 { return Vec3(-x[1], x[0], 10.0) / std::sqrt(x[0] * x[0] + x[1] * x[1] + 100.0); }, mesh);
}

Problem make_mumag_problem(const MumagParams& p) {
  auto mesh = std::make_shared<const TetMesh>(build_box_mesh(p.nx, p.ny, p.nz, Vec3(-50, -50, -5), Vec3(50, 50, 5)));
  return make_problem(mesh, true, p.threads);
}

MumagStage run_mumag_stage(const MumagParams& p, const Problem& problem, const NodalVectorField& m_start,
                           double duration_ns, const Vec3& v_tilde, double alpha) {
  MumagParams q = p;
  q.v_tilde = v_tilde;
  const MumagScaling sc = mumag_scaling(q);
  ContributionSet set(problem.space);
  set.enable_stray_field(problem.stray);
  if (v_tilde.norm() > 0.0) set.enable_zhang_li(ZhangLi{sc.v, p.xi, {}});

  IntegratorConfig ic;
  ic.k = sc.k;
  ic.T = duration_ns * 1e3 / sc.time_unit_ps;
  // Round T to a whole number of steps.
  ic.T = std::max(1.0, std::round(ic.T / ic.k)) * ic.k;
  ic.alpha = alpha;
  ic.c_ex = sc.c_ex;
  ic.epsilon = p.epsilon;
  ic.max_sweeps = p.max_sweeps;
  ic.strategy = p.strategy;

  const int every = std::max(1, static_cast<int>(std::llround(p.sample_ns * 1e3 / sc.time_unit_ps / sc.k)));
  const double ns_per_step = sc.k * sc.time_unit_ps * 1e-3;
  MumagStage stage;
  const LumpedWeights& w = problem.space->weights;
  const Vec3 a0 = average_magnetization(m_start, w);
  stage.series.push_back({0.0, a0[0], a0[1], a0[2]});
  const Trajectory traj = integrate(ic, set, m_start, [&](int step, const NodalVectorField& m, const StepReport&) {
    if (step % every == 0) {
      const Vec3 a = average_magnetization(m, w);
      stage.series.push_back({step * ns_per_step, a[0], a[1], a[2]});
    }
  });
  stage.final_state = traj.final_state();
  stage.summary = summarize(ic, traj);
  stage.summary.final_m_avg = average_magnetization(stage.final_state, w);
  return stage;
}

MumagResult run_mumag5(const MumagParams& p, const Problem* problem) {
  Problem local;
  if (!problem) {
    local = make_mumag_problem(p);
    problem = &local;
  }
  MumagResult res;
  const NodalVectorField m_init = vortex_initial(*problem->mesh);
  if (p.relax_ns > 0.0) {
    res.relax = run_mumag_stage(p, *problem, m_init, p.relax_ns, Vec3::Zero(), p.relax_alpha);
  } else {
    res.relax.final_state = m_init;
  }
  res.dynamics = run_mumag_stage(p, *problem, res.relax.final_state, p.T_ns, p.v_tilde, p.alpha);

  if (!p.out_dir.empty()) {
    ensure_dir(p.out_dir);
    const auto write_series = [&](const std::string& name, const AverageSeries& s) {
      std::ofstream f(join(p.out_dir, name));
      if (!f) throw std::runtime_error("cannot write " + name);
      f << "t(ns),mx,my,mz\n" << std::setprecision(17);
      for (const auto& r : s) f << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << "\n";
    };
    write_series("relax.csv", res.relax.series);
    write_series("mumag5.csv", res.dynamics.series);
    write_vtk(join(p.out_dir, "m_relaxed.vtk"), *problem->mesh, res.relax.final_state, "relaxed vortex");
    write_vtk(join(p.out_dir, "m_final.vtk"), *problem->mesh, res.dynamics.final_state, "final state");
    write_summary(join(p.out_dir, "summary.txt"), res.dynamics.summary, p.strategy, mumag_scaling(p).k);
  }
  return res;
}

// ---------------------------------------------------------------- custom

CustomResult run_custom(Config& cfg, const std::string& out_dir, PiStrategy strategy_default, int threads) {
  const std::string mesh_path = cfg.get_string("mesh", "");
  require(!mesh_path.empty(), "custom experiment needs 'mesh = <path>'");
  std::shared_ptr<const TetMesh> mesh;
  try {
    mesh = std::make_shared<const TetMesh>(load_mesh(mesh_path));
  } catch (const MeshError& e) {
    throw ConfigError(e.what());
  }
  const bool stray = cfg.get_bool("stray", false);
  Problem problem = make_problem(mesh, stray, threads);
  ContributionSet set(problem.space);
  if (stray) set.enable_stray_field(problem.stray);
  try {
    if (cfg.has("anisotropy_axis")) set.enable_anisotropy(cfg.get_vec3("anisotropy_axis", Vec3::UnitZ()));
    if (cfg.has("zl_velocity")) {
      ZhangLi zl;
      zl.velocity = cfg.get_vec3("zl_velocity", Vec3::Zero());
      zl.xi = cfg.get_double("zl_xi", 0.05);
      set.enable_zhang_li(zl);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  set.set_applied_field(cfg.get_vec3("f", Vec3::Zero()));

  IntegratorConfig ic;
  ic.k = cfg.get_double("k", 1e-3);
  ic.T = cfg.get_double("T", 1.0);
  ic.alpha = cfg.get_double("alpha", 1.0);
  ic.c_ex = cfg.get_double("c_ex", 1.0);
  ic.epsilon = cfg.get_double("epsilon", 1e-10);
  ic.max_sweeps = cfg.get_int("max_sweeps", 500);
  ic.strategy = strategy_from(cfg, "strategy", strategy_default);
  ic.first_step = first_step_from(cfg);
  ic.output_times = cfg.get_list("snapshots", {0.0});
  try {
    ic.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const Vec3 m0 = cfg.get_vec3("m0", Vec3::UnitX());
  require(m0.norm() > 0.0, "m0 must be nonzero");

  CustomResult res;
  res.traj = integrate(ic, set, NodalVectorField(mesh->num_nodes(), m0.normalized()));
  res.summary = summarize(ic, res.traj);
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    write_series_csv(join(out_dir, "series.csv"), res.traj.series());
    for (double t : ic.output_times) {
      const int i = static_cast<int>(std::llround(t / ic.k));
      write_vtk(join(out_dir, "m_t" + time_tag(t) + ".vtk"), *mesh, res.traj.state(i));
    }
    write_summary(join(out_dir, "summary.txt"), res.summary, ic.strategy, ic.k);
  }
  return res;
}

}  // namespace llg
