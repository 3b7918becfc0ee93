#pragma once

#include <cmath>
#include <limits>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "swof/analytic.hpp"
#include "swof/io/config.hpp"
#include "swof/io/dem.hpp"
#include "swof/io/presets.hpp"
#include "swof/solver.hpp"

namespace swof::io {

struct OutputSpec {
  std::filesystem::path dir = "swof_out";
  bool snapshot_csv = false;
};

/// A fully loaded configuration plus what the analytic comparisons need.
struct SimulationConfig {
  Scenario scenario;
  RunPlan plan;
  OutputSpec output;
  std::string preset;
  std::string topography;
  std::optional<double> lake_level;              // lake_at_rest
  std::optional<analytic::DamBreak> dam;         // dam_break, ritter, stoker
};

/// Values forced by the caller (converge levels, CLI flags).
struct Overrides {
  std::optional<int> nx;
  std::optional<int> ny;
  std::optional<int> order;
  std::optional<int> workers;
};

namespace detail {

inline Raster<double> raster_input(const ConfigFile& cfg, const std::string& key, const GridGeometry& g) {
  const auto p = cfg.path(key);
  AsciiGrid a = read_ascii_grid(*p, true);
  if (a.geom.nx != g.nx || a.geom.ny != g.ny)
    throw cfg.error(key, "raster is " + std::to_string(a.geom.nx) + "x" + std::to_string(a.geom.ny) +
                             ", grid is " + std::to_string(g.nx) + "x" + std::to_string(g.ny));
  return std::move(a.values);
}

inline BoundaryCondition boundary(const ConfigFile& cfg, const std::string& side) {
  const std::string base = "bc." + side + ".";
  const std::string type = cfg.string(base + "type", "wall");
  auto h = [&] {
    const double v = cfg.required_number(base + "h");
    cfg.require(v >= 0.0, base + "h", "must be >= 0");
    return v;
  };
  if (type == "wall") return Wall{};
  if (type == "periodic") return Periodic{};
  if (type == "outflow") return FreeOutflow{};
  if (type == "height") return ImposedHeight{h()};
  if (type == "discharge") return ImposedDischarge{cfg.required_number(base + "q")};
  if (type == "height_discharge") {
    const double hh = h();
    return ImposedHeightDischarge{hh, cfg.required_number(base + "q")};
  }
  throw cfg.error(base + "type", "unknown boundary type '" + type +
                                     "' (wall, periodic, outflow, height, discharge, height_discharge)");
}

inline FrictionLaw friction_law(const ConfigFile& cfg, const std::string& name, double value) {
  if (name == "manning") return Manning{value};
  if (name == "strickler") return Strickler{value};
  if (name == "darcy_weisbach") return DarcyWeisbach{value};
  if (name == "chezy") return Chezy{value};
  throw cfg.error("friction.law", "unknown law '" + name + "' (none, manning, strickler, darcy_weisbach, chezy)");
}

}  // namespace detail

inline SimulationConfig build_config(const ConfigFile& cfg, const Overrides& ov = {}) {
  SimulationConfig out;
  Scenario& sc = out.scenario;

  // Grid and topography.
  out.topography = cfg.string("topography.type", "flat");
  GridGeometry& g = sc.geom;
  std::optional<Dem> dem;
  if (out.topography == "file") {
    const auto p = cfg.path("topography.file");
    if (!p) throw cfg.error("topography.file", "required when topography.type = file");
    dem = load_dem(*p);
    g = dem->geom;
    for (const char* k : {"grid.nx", "grid.ny", "grid.dx", "grid.dy", "grid.x0", "grid.y0"})
      if (cfg.has(k)) throw cfg.error(k, "the grid comes from topography.file");
    if (ov.nx || ov.ny) throw ConfigError("cannot change the resolution of a file topography");
  } else {
    g.nx = static_cast<int>(cfg.integer("grid.nx", 0));
    g.ny = static_cast<int>(cfg.integer("grid.ny", 1));
    cfg.require(g.nx >= 1, "grid.nx", "required, must be >= 1");
    cfg.require(g.ny >= 1, "grid.ny", "must be >= 1");
    g.dx = cfg.number("grid.dx", 1.0);
    g.dy = cfg.number("grid.dy", g.dx);
    cfg.require(g.dx > 0.0, "grid.dx", "must be > 0");
    cfg.require(g.dy > 0.0, "grid.dy", "must be > 0");
    g.x0 = cfg.number("grid.x0", 0.0);
    g.y0 = cfg.number("grid.y0", 0.0);
    const double lx = g.nx * g.dx, ly = g.ny * g.dy;
    if (ov.nx) {
      g.nx = *ov.nx;
      g.dx = lx / g.nx;
    }
    if (ov.ny) {
      g.ny = *ov.ny;
      g.dy = ly / g.ny;
    }
  }
  const double lx = g.nx * g.dx, ly = g.ny * g.dy;
  const double xc = g.x0 + lx / 2, yc = g.y0 + ly / 2;

  if (dem) {
    sc.z = std::move(dem->z);
  } else if (out.topography == "flat") {
    sc.z = Raster<double>(g.nx, g.ny, cfg.number("topography.z0", 0.0));
  } else if (out.topography == "slope") {
    sc.z = sloped_topography(g, cfg.number("topography.z0", 0.0), cfg.number("topography.slope_x", 0.0),
                             cfg.number("topography.slope_y", 0.0));
  } else if (out.topography == "bump") {
    const double w = cfg.number("topography.width", 0.1 * std::min(lx, ly));
    cfg.require(w > 0.0, "topography.width", "must be > 0");
    sc.z = bump_topography(g, cfg.number("topography.height", 0.5), w, cfg.number("topography.x", xc),
                           cfg.number("topography.y", yc));
  } else if (out.topography == "rough") {
    RoughSpec r;
    const long seed = cfg.integer("topography.seed", 1);
    cfg.require(seed >= 0, "topography.seed", "must be >= 0");
    r.seed = static_cast<std::uint64_t>(seed);
    r.amplitude = cfg.number("topography.amplitude", r.amplitude);
    r.islands = static_cast<int>(cfg.integer("topography.islands", r.islands));
    cfg.require(r.islands >= 0, "topography.islands", "must be >= 0");
    r.island_height = cfg.number("topography.island_height", r.island_height);
    r.island_radius = cfg.number("topography.island_radius", r.island_radius);
    cfg.require(r.island_radius >= 0.0, "topography.island_radius", "must be >= 0");
    sc.z = rough_topography(g, r);
  } else {
    throw cfg.error("topography.type", "unknown type '" + out.topography + "' (flat, slope, bump, rough, file)");
  }

  // Scheme.
  SchemeParams& p = sc.scheme;
  p.order = ov.order ? *ov.order : static_cast<int>(cfg.integer("scheme.order", 2));
  cfg.require(p.order == 1 || p.order == 2, "scheme.order", "must be 1 or 2");
  if (const auto c = cfg.number("scheme.cfl")) {
    cfg.require(*c > 0.0 && *c <= 1.0, "scheme.cfl", "must lie in (0, 1]");
    p.n_cfl = *c;
  }
  p.h_eps = cfg.number("scheme.h_eps", p.h_eps);
  cfg.require(p.h_eps >= 0.0, "scheme.h_eps", "must be >= 0");
  p.dt_max = cfg.number("scheme.dt_max", p.dt_max);
  cfg.require(p.dt_max > 0.0, "scheme.dt_max", "must be > 0");
  p.g = cfg.number("physics.g", p.g);
  cfg.require(p.g > 0.0, "physics.g", "must be > 0");

  // Initial state.
  out.preset = cfg.string("initial.preset", "lake_at_rest");
  const std::string& pre = out.preset;
  if (pre == "lake_at_rest") {
    out.lake_level = cfg.number("initial.level", 0.0);
    sc.initial = lake_at_rest(sc.z, *out.lake_level);
  } else if (pre == "dam_break" || pre == "ritter" || pre == "stoker") {
    analytic::DamBreak d;
    d.g = p.g;
    d.h_left = cfg.number("initial.h_left", 1.0);
    d.h_right = cfg.number("initial.h_right", pre == "ritter" ? 0.0 : 0.1);
    if (pre == "ritter") cfg.require(d.h_right == 0.0, "initial.h_right", "must be 0 for ritter");
    if (pre == "stoker") cfg.require(d.h_right > 0.0, "initial.h_right", "must be > 0 for stoker");
    cfg.require(d.h_left > 0.0, "initial.h_left", "must be > 0");
    cfg.require(d.h_right >= 0.0 && d.h_right < d.h_left, "initial.h_right", "need 0 <= h_right < h_left");
    d.x_dam = cfg.number("initial.x_dam", xc);
    sc.initial = dam_break_state(g, d.x_dam, d.h_left, d.h_right);
    out.dam = d;
  } else if (pre == "radial_dam") {
    const double r = cfg.number("initial.radius", 0.25 * std::min(lx, ly));
    cfg.require(r > 0.0, "initial.radius", "must be > 0");
    const double hin = cfg.number("initial.h_in", 1.0), hout = cfg.number("initial.h_out", 0.1);
    cfg.require(hin >= 0.0, "initial.h_in", "must be >= 0");
    cfg.require(hout >= 0.0, "initial.h_out", "must be >= 0");
    sc.initial = radial_dam_state(g, cfg.number("initial.x", xc), cfg.number("initial.y", yc), r, hin, hout);
  } else if (pre == "uniform") {
    const double h = cfg.number("initial.h", 1.0);
    cfg.require(h >= 0.0, "initial.h", "must be >= 0");
    sc.initial = uniform_state(g, h, cfg.number("initial.u", 0.0), cfg.number("initial.v", 0.0));
  } else if (pre == "file") {
    if (!cfg.has("initial.h_file")) throw cfg.error("initial.h_file", "required when initial.preset = file");
    const Raster<double> h = detail::raster_input(cfg, "initial.h_file", g);
    const Raster<double> u = cfg.has("initial.u_file") ? detail::raster_input(cfg, "initial.u_file", g)
                                                       : Raster<double>(g.nx, g.ny, 0.0);
    const Raster<double> v = cfg.has("initial.v_file") ? detail::raster_input(cfg, "initial.v_file", g)
                                                       : Raster<double>(g.nx, g.ny, 0.0);
    sc.initial = Raster<ConservedState>(g.nx, g.ny);
    for (std::size_t n = 0; n < h.size(); ++n) {
      if (!(h.data()[n] >= 0.0)) throw cfg.error("initial.h_file", "depths must be >= 0");
      sc.initial.data()[n] = to_conserved(PrimitiveState{h.data()[n], u.data()[n], v.data()[n]});
    }
  } else {
    throw cfg.error("initial.preset", "unknown preset '" + pre +
                                          "' (lake_at_rest, dam_break, ritter, stoker, radial_dam, uniform, file)");
  }

  // Boundaries.
  sc.bc.west = detail::boundary(cfg, "west");
  sc.bc.east = detail::boundary(cfg, "east");
  sc.bc.south = detail::boundary(cfg, "south");
  sc.bc.north = detail::boundary(cfg, "north");
  try {
    sc.bc.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(cfg.name() + ": " + e.what());
  }

  // Friction.
  const std::string law = cfg.string("friction.law", "none");
  if (law != "none") {
    if (cfg.has("friction.file")) {
      const Raster<double> k = detail::raster_input(cfg, "friction.file", g);
      FrictionField f{friction_coefficient(detail::friction_law(cfg, law, 1.0), p.g).family,
                      Raster<double>(g.nx, g.ny)};
      for (std::size_t n = 0; n < k.size(); ++n) {
        cfg.require(k.data()[n] > 0.0, "friction.file", "coefficients must be > 0");
        f.cf.data()[n] = friction_coefficient(detail::friction_law(cfg, law, k.data()[n]), p.g).cf;
      }
      sc.friction = std::move(f);
    } else {
      const double v = cfg.required_number("friction.value");
      cfg.require(v > 0.0, "friction.value", "must be > 0");
      sc.friction = uniform_friction(detail::friction_law(cfg, law, v), g.nx, g.ny, p.g);
    }
  }

  // Rain and infiltration.
  const std::string rain = cfg.string("rain.type", "none");
  if (rain != "none") {
    const double start = cfg.number("rain.start", 0.0);
    const double end = cfg.number("rain.end", std::numeric_limits<double>::infinity());
    cfg.require(start >= 0.0, "rain.start", "must be >= 0");
    cfg.require(end > start, "rain.end", "must exceed rain.start");
    if (rain == "uniform") {
      const double r = cfg.required_number("rain.rate");
      cfg.require(r >= 0.0, "rain.rate", "must be >= 0");
      sc.rain = UniformRain{r, start, end};
    } else if (rain == "raster") {
      if (!cfg.has("rain.file")) throw cfg.error("rain.file", "required when rain.type = raster");
      Raster<double> r = detail::raster_input(cfg, "rain.file", g);
      for (double v : r.data()) cfg.require(v >= 0.0, "rain.file", "rates must be >= 0");
      sc.rain = RasterRain{std::move(r), start, end};
    } else {
      throw cfg.error("rain.type", "unknown type '" + rain + "' (none, uniform, raster)");
    }
  }
  if (!cfg.keys_with_prefix("infiltration.").empty()) {
    GreenAmptParams ga;
    ga.ks = cfg.required_number("infiltration.ks");
    ga.hf = cfg.required_number("infiltration.hf");
    ga.a = cfg.number("infiltration.a", ga.a);
    ga.theta_i = cfg.required_number("infiltration.theta_i");
    ga.theta_s = cfg.number("infiltration.theta_s", ga.theta_s);
    ga.ic_init = cfg.number("infiltration.ic_init", ga.ic_init);
    cfg.require(ga.ks >= 0.0, "infiltration.ks", "must be >= 0");
    cfg.require(ga.theta_i >= 0.0 && ga.theta_i < ga.theta_s, "infiltration.theta_i",
                "must lie in [0, theta_s)");
    cfg.require(ga.theta_s <= 1.0, "infiltration.theta_s", "must be <= 1");
    cfg.require(ga.ic_init >= 0.0, "infiltration.ic_init", "must be >= 0");
    sc.infiltration = ga;
  }

  // Time, outputs, gauges.
  RunPlan& plan = out.plan;
  if (cfg.has("time.t_end_scaled")) {
    if (!out.dam) throw cfg.error("time.t_end_scaled", "only defined for dam-break presets");
    if (cfg.has("time.t_end")) throw cfg.error("time.t_end_scaled", "conflicts with time.t_end");
    const double tau = cfg.required_number("time.t_end_scaled");
    cfg.require(tau >= 0.0, "time.t_end_scaled", "must be >= 0");
    plan.t_end = tau * lx / std::sqrt(p.g * out.dam->h_left);
  } else {
    plan.t_end = cfg.number("time.t_end", 0.0);
    cfg.require(plan.t_end >= 0.0, "time.t_end", "must be >= 0");
  }
  if (const auto it = cfg.integer("time.iterations")) {
    cfg.require(*it >= 0, "time.iterations", "must be >= 0");
    plan.iterations = *it;
  }
  plan.output_times = cfg.numbers("output.times");
  for (double t : plan.output_times)
    cfg.require(t >= 0.0 && (plan.iterations || t <= plan.t_end), "output.times", "must lie in [0, t_end]");
  if (plan.iterations && !plan.output_times.empty())
    throw cfg.error("output.times", "not available with time.iterations");
  plan.arrival_threshold = cfg.number("output.arrival_threshold", plan.arrival_threshold);
  cfg.require(plan.arrival_threshold >= 0.0, "output.arrival_threshold", "must be >= 0");
  out.output.dir = cfg.string("output.dir", out.output.dir.string());
  out.output.snapshot_csv = cfg.boolean("output.snapshot_csv", false);
  for (const std::string& key : cfg.keys_with_prefix("gauge.")) {
    const auto xy = cfg.numbers(key);
    cfg.require(xy.size() == 2, key, "expected 'x, y'");
    Gauge gauge{key.substr(6), xy[0], xy[1]};
    cfg.require(gauge.x >= g.x0 && gauge.x < g.x0 + lx && gauge.y >= g.y0 && gauge.y < g.y0 + ly, key,
                "lies outside the domain");
    plan.gauges.push_back(std::move(gauge));
  }
  plan.workers = ov.workers ? *ov.workers : static_cast<int>(cfg.integer("run.workers", 1));
  if (!ov.workers) cfg.require(plan.workers >= 1, "run.workers", "must be >= 1");

  cfg.check_all_used();
  sc.validate();
  return out;
}

inline SimulationConfig load_config(const std::filesystem::path& path, const Overrides& ov = {}) {
  return build_config(ConfigFile::load(path), ov);
}

}  // namespace swof::io
