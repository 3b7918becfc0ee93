#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "swof/io/commands.hpp"

namespace {

using namespace swof;
using namespace swof::io;

Overrides common_overrides(int workers_flag) {
  Overrides ov;
  if (workers_flag > 0) {
    ov.workers = workers_flag;
  } else if (auto w = env_workers()) {
    ov.workers = *w;
  }
  return ov;
}

void print_audit(const SimulationReport& r) {
  const double scale = std::max({std::abs(r.initial_volume), std::abs(r.final_volume), r.rain_volume});
  std::cout << "steps " << r.steps << ", t = " << format_number(r.t_final) << ", layout " << r.px << "x"
            << r.py << ", volume " << format_number(r.final_volume) << ", budget drift "
            << format_number(scale > 0 ? std::abs(r.budget_residual()) / scale : 0.0) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shallow-water overland flow simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  int workers = 0;
  int order = 0;

  auto* run = app.add_subcommand("run", "Run one configuration");
  run->add_option("config", config, "Configuration file")->required();
  run->add_option("-o,--out", out_dir, "Output directory (default: output.dir)");
  run->add_option("-w,--workers", workers, "Worker threads (default: SWOF_WORKERS or run.workers)");

  std::vector<int> levels{100, 200, 400};
  auto* conv = app.add_subcommand("converge", "L1 error against the analytic solution");
  conv->add_option("config", config, "Configuration file")->required();
  conv->add_option("--levels", levels, "Cell counts along x")->delimiter(',');
  conv->add_option("--order", order, "Override scheme.order")->check(CLI::Range(1, 2));
  conv->add_option("-w,--workers", workers, "Worker threads");
  conv->add_option("-o,--out", out_dir, "Write converge.csv here as well as to stdout");

  std::vector<int> bench_workers{1, 2, 4, 8};
  long iters = 200;
  auto* ben = app.add_subcommand("bench", "Time a fixed number of iterations per worker count");
  ben->add_option("config", config, "Configuration file")->required();
  ben->add_option("--workers", bench_workers, "Worker counts")->delimiter(',');
  ben->add_option("--iters", iters, "Iterations per run");
  ben->add_option("-o,--out", out_dir, "Output directory (default: output.dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    skel::WorkerOptions opts;
    opts.halo_check = env_halo_check();

    if (*run) {
      SimulationConfig c = load_config(config, common_overrides(workers));
      c.plan.options = opts;
      const std::filesystem::path dir = out_dir.empty() ? c.output.dir : std::filesystem::path(out_dir);
      const SimulationReport r = run_to_directory(std::move(c), dir);
      print_audit(r);
      std::cout << "outputs in " << dir.string() << "\n";
      return kExitOk;
    }
    if (*conv) {
      Overrides ov = common_overrides(workers);
      if (order) ov.order = order;
      const auto rows = converge(ConfigFile::load(config), levels, ov);
      write_convergence_csv(std::cout, rows);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        auto f = open_output(std::filesystem::path(out_dir) / "converge.csv");
        write_convergence_csv(f, rows);
      }
      return kExitOk;
    }
    if (*ben) {
      SimulationConfig c = load_config(config);
      c.plan.options = opts;
      const std::filesystem::path dir = out_dir.empty() ? c.output.dir : std::filesystem::path(out_dir);
      const auto rows = bench(std::move(c), bench_workers, iters);
      std::filesystem::create_directories(dir);
      {
        auto f = open_output(dir / "bench.csv");
        write_bench_csv(f, rows);
      }
      {
        auto f = open_output(dir / "bench.dat");
        write_bench_dat(f, rows);
      }
      write_bench_csv(std::cout, rows);
      return kExitOk;
    }
  } catch (...) {
    return report_failure(std::current_exception(), std::cerr);
  }
  return kExitOk;
}
