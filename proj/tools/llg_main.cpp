// Command-line front end: llg <cube|convergence|mumag5|custom> --config <path>
#include "llg/experiments.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void print_summary(const llg::RunSummary& s) {
  std::cout << std::setprecision(6) << "steps " << s.steps << "  mean sweeps " << s.mean_sweeps
            << "  mean wall time/step " << s.mean_wtime << " s (stray " << s.mean_wtime_stray << " s)\n"
            << "max | |m| - |m0| | " << s.max_norm_dev << "  max energy-identity residual "
            << s.max_abs_energy_residual << "\n"
            << "final energy " << s.final_energy << "  final <m> (" << s.final_m_avg.transpose() << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit-explicit midpoint LLG solver"};
  std::string experiment, config_path, strategy, out_dir;
  double k = 0.0;
  int threads = 1;
  app.add_option("experiment", experiment, "cube, convergence, mumag5 or custom")
      ->required()
      ->check(CLI::IsMember({"cube", "convergence", "mumag5", "custom"}));
  app.add_option("--config", config_path, "flat key = value config file")->required();
  app.add_option("--strategy", strategy, "lower-order treatment: mp, ab or ee");
  app.add_option("--k", k, "time-step (nondimensional)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "threads for boundary-element assembly")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    llg::Config cfg = llg::Config::load(config_path);
    if (!strategy.empty()) cfg.set("strategy", strategy);
    if (app.count("--k")) {
      std::ostringstream os;
      os << std::setprecision(17) << k;
      cfg.set("k", os.str());
    }
    if (out_dir.empty()) out_dir = cfg.get_string("out", "out_" + experiment);
    else cfg.get_string("out", out_dir);
    std::filesystem::create_directories(out_dir);

    // Parameters are read up front so that unknown keys fail before any work.
    const auto check_unused = [&cfg]() {
      const auto unused = cfg.unused_keys();
      if (!unused.empty()) throw llg::ConfigError("unknown config key '" + unused.front() + "'");
    };
    const auto resolved = [&]() { cfg.write_resolved((std::filesystem::path(out_dir) / "config.resolved").string()); };

    if (experiment == "cube") {
      llg::CubeParams p = llg::cube_params(cfg);
      p.threads = threads;
      p.out_dir = out_dir;
      check_unused();
      resolved();
      const auto res = llg::run_cube(p);
      print_summary(res.summary);
    } else if (experiment == "convergence") {
      llg::ConvergenceParams p = llg::convergence_params(cfg);
      p.threads = threads;
      p.out_dir = out_dir;
      check_unused();
      resolved();
      const auto res = llg::run_convergence(p);
      for (const auto& r : res.rows)
        std::cout << llg::to_string(r.strategy) << "  k " << r.k << "  error " << r.error << "\n";
      for (const auto& [s, slope] : res.slopes) std::cout << "order " << llg::to_string(s) << " " << slope << "\n";
    } else if (experiment == "mumag5") {
      llg::MumagParams p = llg::mumag_params(cfg);
      p.threads = threads;
      p.out_dir = out_dir;
      check_unused();
      resolved();
      const auto sc = llg::mumag_scaling(p);
      std::cout << "C_ex " << sc.c_ex << "  v (" << sc.v.transpose() << ")  time unit " << sc.time_unit_ps
                << " ps  k " << sc.k << "\n";
      const auto res = llg::run_mumag5(p);
      const auto& a = res.relax.series.empty() ? res.dynamics.series.front() : res.relax.series.back();
      std::cout << "relaxed <m> (" << a[1] << ", " << a[2] << ", " << a[3] << ")\n";
      print_summary(res.dynamics.summary);
    } else {
      const auto res = llg::run_custom(cfg, out_dir, llg::PiStrategy::Midpoint, threads);
      check_unused();
      resolved();
      print_summary(res.summary);
    }
    return 0;
  } catch (const llg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const llg::StepError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const llg::SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
