#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "swof/analytic.hpp"
#include "swof/io/outputs.hpp"
#include "swof/io/setup.hpp"
#include "swof/solver.hpp"

namespace swof::io {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitIo = 2, kExitNumerical = 3 };

/// Maps the active exception to an exit code and prints it.
inline int report_failure(std::exception_ptr e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    err << "config error: " << x.what() << "\n";
    return kExitConfig;
  } catch (const IoError& x) {
    err << "io error: " << x.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& x) {
    err << "io error: " << x.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& x) {
    err << "numerical abort: " << x.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << "\n";
    return kExitNumerical;
  }
}

/// Environment defaults: SWOF_WORKERS and SWOF_HALO_CHECK.
inline std::optional<int> env_workers() {
  const char* v = std::getenv("SWOF_WORKERS");
  if (!v || !*v) return std::nullopt;
  const auto n = parse_long(v);
  if (!n || *n < 1) throw ConfigError(std::string("SWOF_WORKERS must be a positive integer, got '") + v + "'");
  return static_cast<int>(*n);
}

inline bool env_halo_check() {
  const char* v = std::getenv("SWOF_HALO_CHECK");
  return v && *v && std::string(v) != "0";
}

/// 64-bit FNV-1a over the bytes of the conserved fields.
inline std::uint64_t fnv1a(const Raster<ConservedState>& u) {
  std::uint64_t h = 1469598103934665603ull;
  const auto* p = reinterpret_cast<const unsigned char*>(u.data().data());
  for (std::size_t n = 0; n < u.size() * sizeof(ConservedState); ++n) {
    h ^= p[n];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---- run ------------------------------------------------------------------

/// Runs a configuration and writes gauges, snapshots and the audit into `dir`.
inline SimulationReport run_to_directory(SimulationConfig cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::optional<SnapshotWriter> snaps;
  if (!cfg.plan.output_times.empty()) {
    snaps.emplace(dir / "snapshots", cfg.scenario, cfg.output.snapshot_csv);
    cfg.plan.on_snapshot = [&](double t, const Raster<ConservedState>& u) { (*snaps)(t, u); };
  }
  SimulationReport r = run_simulation(cfg.scenario, cfg.plan);
  {
    auto f = open_output(dir / "gauges.csv");
    write_gauges_csv(f, r.gauges);
  }
  {
    auto f = open_output(dir / "gauge_summary.csv");
    write_gauge_summary(f, r.gauges);
  }
  {
    auto f = open_output(dir / "audit.txt");
    write_audit(f, r, cfg.plan.workers);
  }
  return r;
}

// ---- converge -------------------------------------------------------------

class PresetWithoutOracle : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Throws unless the loaded configuration has a closed-form solution.
inline void require_oracle(const SimulationConfig& c) {
  const Scenario& sc = c.scenario;
  const bool forced = sc.friction || !std::holds_alternative<NoRain>(sc.rain) || sc.infiltration;
  if (c.lake_level) {
    if (!std::holds_alternative<NoRain>(sc.rain) || sc.infiltration)
      throw PresetWithoutOracle("lake at rest has no closed form with rain or infiltration");
    return;
  }
  if (c.dam && (c.preset == "ritter" || c.preset == "stoker")) {
    if (c.topography != "flat" || forced)
      throw PresetWithoutOracle(c.preset + " needs a flat, frictionless bed without rain or infiltration");
    return;
  }
  throw PresetWithoutOracle("preset '" + c.preset + "' has no analytic solution (use lake_at_rest, ritter or stoker)");
}

/// Analytic depth at cell centre (i, j) and time t.
inline double oracle_depth(const SimulationConfig& c, int i, int j, double t) {
  if (c.lake_level) return std::max(*c.lake_level - c.scenario.z(i, j), 0.0);
  return analytic::dam_break(*c.dam, c.scenario.geom.center_x(i), t).h;
}

/// L1 depth error integrated over the domain and divided by its width in y.
inline double l1_depth_error(const SimulationConfig& c, const Raster<ConservedState>& u, double t) {
  const GridGeometry& g = c.scenario.geom;
  double sum = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) sum += std::abs(u(i, j).h - oracle_depth(c, i, j, t));
  return sum * g.dx * g.dy / (g.ny * g.dy);
}

struct ConvergenceRow {
  int n = 0;
  double l1 = 0.0;
  std::optional<double> order;  // against the previous level
};

/// Runs the configuration at nx = each level (ny scaled alike when > 1) and
/// compares with the analytic solution at t_end.
inline std::vector<ConvergenceRow> converge(const ConfigFile& file, const std::vector<int>& levels,
                                            Overrides ov = {}) {
  if (levels.empty()) throw ConfigError("converge: no levels given");
  const SimulationConfig base = build_config(file, ov);
  require_oracle(base);
  if (base.plan.iterations) throw ConfigError("converge: time.iterations is not allowed, set time.t_end");
  std::vector<ConvergenceRow> rows;
  for (int n : levels) {
    if (n < 1) throw ConfigError("converge: levels must be >= 1");
    Overrides o = ov;
    o.nx = n;
    if (base.scenario.geom.ny > 1) {
      const double ny = static_cast<double>(base.scenario.geom.ny) * n / base.scenario.geom.nx;
      if (ny != std::floor(ny)) throw ConfigError("converge: level " + std::to_string(n) + " does not scale ny to an integer");
      o.ny = static_cast<int>(ny);
    }
    SimulationConfig c = build_config(file, o);
    c.plan.gauges.clear();
    c.plan.output_times.clear();
    const SimulationReport r = run_simulation(c.scenario, c.plan);
    ConvergenceRow row{n, l1_depth_error(c, r.final_state, r.t_final), std::nullopt};
    if (!rows.empty() && rows.back().l1 > 0.0 && row.l1 > 0.0)
      row.order = std::log(rows.back().l1 / row.l1) / std::log(static_cast<double>(n) / rows.back().n);
    rows.push_back(row);
  }
  return rows;
}

inline void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "# schema: swof.converge/1\n"
      << "n,l1_error,observed_order\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_number(r.l1) << ',';
    if (r.order) out << format_number(*r.order);
    out << '\n';
  }
}

// ---- bench ----------------------------------------------------------------

struct BenchRow {
  int workers = 1;
  double seconds = 0.0;
  double log2_time = 0.0;
  double speedup = 1.0;  // first row's time over this row's
  std::uint64_t hash = 0;
};

class DivergentResults : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Times a fixed number of iterations per worker count. Throws
/// DivergentResults when the final fields differ between worker counts.
inline std::vector<BenchRow> bench(SimulationConfig c, const std::vector<int>& workers, long iterations) {
  if (workers.empty()) throw ConfigError("bench: no worker counts given");
  if (iterations < 1) throw ConfigError("bench: iterations must be >= 1");
  c.plan.iterations = iterations;
  c.plan.output_times.clear();
  c.plan.gauges.clear();
  c.plan.on_snapshot = nullptr;
  std::vector<BenchRow> rows;
  for (int p : workers) {
    c.plan.workers = p;
    const auto t0 = std::chrono::steady_clock::now();
    const SimulationReport r = run_simulation(c.scenario, c.plan);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    BenchRow row{p, s, std::log2(s), rows.empty() ? 1.0 : rows.front().seconds / s, fnv1a(r.final_state)};
    if (!rows.empty() && row.hash != rows.front().hash)
      throw DivergentResults("bench: final field for P = " + std::to_string(p) + " differs from P = " +
                             std::to_string(rows.front().workers));
    rows.push_back(row);
  }
  return rows;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "# schema: swof.bench/1\n"
      << "workers,wall_time_s,log2_time,speedup,fnv1a\n";
  for (const auto& r : rows)
    out << r.workers << ',' << format_number(r.seconds) << ',' << format_number(r.log2_time) << ','
        << format_number(r.speedup) << ',' << hex(r.hash) << '\n';
}

/// Whitespace columns for gnuplot and friends.
inline void write_bench_dat(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "# workers log2_workers log2_time speedup\n";
  for (const auto& r : rows)
    out << r.workers << ' ' << format_number(std::log2(static_cast<double>(r.workers))) << ' '
        << format_number(r.log2_time) << ' ' << format_number(r.speedup) << '\n';
}

}  // namespace swof::io
