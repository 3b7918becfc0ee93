#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "swof/boundary.hpp"
#include "swof/core.hpp"
#include "swof/errors.hpp"
#include "swof/flux.hpp"
#include "swof/reconstruction.hpp"
#include "swof/skeleton/apply.hpp"
#include "swof/skeleton/comm.hpp"
#include "swof/skeleton/dmatrix.hpp"
#include "swof/skeleton/topology.hpp"
#include "swof/sources.hpp"

namespace swof {

struct SchemeParams {
  int order = 2;
  double n_cfl = 0.0;  // 0 selects the order default (1.0 or 0.5)
  double h_eps = kDefaultDryThreshold;
  double dt_max = 1.0;
  double g = 9.81;

  /// CFL number. Defaults to 1 (order 1) or 0.5 (order 2) on a grid one
  /// cell wide, and half of that otherwise: the unsplit 2D update drains a
  /// cell through both axes at once, so each axis gets half the 1D bound.
  double cfl(const GridGeometry& geom) const {
    if (n_cfl > 0.0) return n_cfl;
    const bool line = geom.nx == 1 || geom.ny == 1;
    const double one_d = order == 1 ? 1.0 : 0.5;
    return line ? one_d : one_d / 2;
  }
  int ghost_width() const { return order == 1 ? 1 : 2; }

  void validate() const {
    if (order != 1 && order != 2) throw ConfigError("scheme.order must be 1 or 2");
    if (n_cfl < 0.0 || n_cfl > 1.0) throw ConfigError("scheme.cfl must lie in (0, 1]");
    if (!(h_eps >= 0.0)) throw ConfigError("scheme.h_eps must be >= 0");
    if (!(dt_max > 0.0)) throw ConfigError("scheme.dt_max must be > 0");
    if (!(g > 0.0)) throw ConfigError("physics.g must be > 0");
  }
};

/// Per-cell friction coefficients C_f of a single law family.
struct FrictionField {
  FrictionFamily family = FrictionFamily::PowerFourThirds;
  Raster<double> cf;
};

inline FrictionField uniform_friction(const FrictionLaw& law, int nx, int ny, double g) {
  const FrictionCoefficient c = friction_coefficient(law, g);
  return {c.family, Raster<double>(nx, ny, c.cf)};
}

/// Everything that defines the physical problem.
struct Scenario {
  GridGeometry geom;
  Raster<double> z;
  Raster<ConservedState> initial;
  BoundarySet bc;
  SchemeParams scheme;
  std::optional<FrictionField> friction;
  RainForcing rain = NoRain{};
  std::optional<GreenAmptParams> infiltration;

  void validate() const {
    geom.validate();
    scheme.validate();
    bc.validate();
    swof::validate(rain);
    if (infiltration) infiltration->validate();
    auto same = [&](int nx, int ny) { return nx == geom.nx && ny == geom.ny; };
    if (!same(z.nx(), z.ny())) throw ConfigError("topography size does not match the grid");
    if (!same(initial.nx(), initial.ny())) throw ConfigError("initial state size does not match the grid");
    if (friction && !same(friction->cf.nx(), friction->cf.ny()))
      throw ConfigError("friction raster size does not match the grid");
    if (const auto* r = std::get_if<RasterRain>(&rain); r && !same(r->rates.nx(), r->rates.ny()))
      throw ConfigError("rain raster size does not match the grid");
    for (double v : z.data())
      if (!std::isfinite(v)) throw ConfigError("topography must be finite");
    for (const auto& s : initial.data()) {
      if (!(s.h >= 0.0) || !std::isfinite(s.hu) || !std::isfinite(s.hv))
        throw ConfigError("initial state must have finite values and h >= 0");
    }
  }
};

struct Gauge {
  std::string id;
  double x = 0.0;
  double y = 0.0;
};

struct GaugeSample {
  double t = 0.0;
  double h = 0.0;
  double u = 0.0;
  double v = 0.0;
};

struct GaugeRecord {
  Gauge gauge;
  int i = 0;
  int j = 0;
  std::vector<GaugeSample> series;
  double max_level = -std::numeric_limits<double>::infinity();  // max of h + z
  std::optional<double> arrival_time;                           // first t with h > threshold
};

using SnapshotSink = std::function<void(double t, const Raster<ConservedState>& state)>;

struct RunPlan {
  double t_end = 0.0;
  /// Fixed iteration count; when set, t_end and outputs are ignored.
  std::optional<long> iterations;
  std::vector<double> output_times;
  std::vector<Gauge> gauges;
  double arrival_threshold = 1e-3;
  int workers = 1;
  skel::WorkerOptions options;
  SnapshotSink on_snapshot;
};

struct SimulationReport {
  Raster<ConservedState> final_state;
  double t_final = 0.0;
  long steps = 0;
  double initial_volume = 0.0;
  double final_volume = 0.0;
  double rain_volume = 0.0;
  double infiltrated_volume = 0.0;
  double outflow_volume = 0.0;  // net volume through non-periodic edges
  double min_stage_h = std::numeric_limits<double>::infinity();
  long rejected_steps = 0;  // order-2 steps retried with a smaller dt
  std::vector<GaugeRecord> gauges;
  skel::WorkerStats root_stats;
  int px = 1;
  int py = 1;

  /// V_final - V_initial - rain + infiltration + outflow.
  double budget_residual() const {
    return final_volume - initial_volume - rain_volume + infiltrated_volume + outflow_volume;
  }
};

/// H = u^2 / (2 g) + h + z.
inline double bernoulli_head(double h, double u, double z, double g) {
  if (!(h > 0.0)) throw NumericalError("bernoulli_head: dry cell");
  return u * u / (2.0 * g) + h + z;
}

inline double heun_average(double a, double b) { return 0.5 * (a + b); }

inline ConservedState heun_average(const ConservedState& a, const ConservedState& b) {
  return {0.5 * (a.h + b.h), 0.5 * (a.hu + b.hu), 0.5 * (a.hv + b.hv)};
}

/// U^{n+1} = (U^n + stage(stage(U^n))) / 2 for any state with heun_average.
template <class State, class Stage>
State heun_step(const State& u, Stage&& stage) {
  const State u1 = stage(u);
  const State u2 = stage(u1);
  return heun_average(u, u2);
}

namespace detail {

inline Side to_side(skel::Direction d) {
  switch (d) {
    case skel::Direction::West: return Side::West;
    case skel::Direction::East: return Side::East;
    case skel::Direction::South: return Side::South;
    case skel::Direction::North: return Side::North;
  }
  return Side::West;
}

/// Per-cell accumulators that go through the Heun average with the state.
struct CellBudget {
  double rain = 0.0;      // cumulative rain depth [m]
  double infiltrated = 0.0;  // V_inf [m]
  double outflow = 0.0;   // net depth left through the domain edge [m]
};

inline CellBudget heun_average(const CellBudget& a, const CellBudget& b) {
  return {0.5 * (a.rain + b.rain), 0.5 * (a.infiltrated + b.infiltrated),
          0.5 * (a.outflow + b.outflow)};
}

}  // namespace detail

/// The solver state of one worker's block and the stage pipeline acting on
/// it. Written against the skeleton only: local loops, apply_list and
/// collective reductions.
/// Relative size of a negative depth still attributed to round-off.
inline constexpr double kRoundoffDepth = 64 * std::numeric_limits<double>::epsilon();

class BlockSolver {
 public:
  using StateMatrix = skel::DMatrix<ConservedState>;

  BlockSolver(skel::Worker& w, const Scenario& sc)
      : w_(w), sc_(sc), p_(sc.scheme), gw_(sc.scheme.ghost_width()),
        u0_(skel::scatter(w, sc.initial, gw_)), u1_(w, gw_), u2_(w, gw_),
        z_(skel::scatter(w, sc.z, gw_)), fx_(w, 1), fy_(w, 1), ix_(w, 1), iy_(w, 1),
        b0_(w, 0), b1_(w, 0), b2_(w, 0) {
    for (StateMatrix* m : {&u0_, &u1_, &u2_}) attach_state_boundaries(*m);
    z_.set_boundary_filler([this](PaddedGrid<double>& g, skel::Direction d) {
      const Side s = detail::to_side(d);
      fill_side_topography(g, s, sc_.bc[s]);
    });
    z_.exchange(w_);
    if (sc.friction) cf_.emplace(skel::scatter(w, sc.friction->cf, 0));
  }

  skel::Worker& worker() { return w_; }
  StateMatrix& state() { return u0_; }
  const StateMatrix& state() const { return u0_; }
  const skel::DMatrix<double>& topography() const { return z_; }
  const skel::DMatrix<detail::CellBudget>& budget() const { return b0_; }
  double min_stage_h() const { return min_stage_h_; }

  /// Collective: CFL step from the current state, capped by dt_max.
  double stable_dt() {
    reconstruct(u0_);
    const auto [sx, sy] = signal_speeds(u0_);
    const auto local = cfl_from_speeds(sx, sy, sc_.geom.dx, sc_.geom.dy, p_.cfl(sc_.geom));
    const double dt = skel::reduce_min(w_, local.value_or(std::numeric_limits<double>::infinity()));
    return std::min(dt, p_.dt_max);
  }

  /// One time step of length dt from time t. The faces of the current state
  /// must come from the stable_dt call of this step. At order 2 the step is
  /// refused, leaving the state untouched, when the intermediate state
  /// violates the CFL bound for this dt; retry_dt() then gives a step that
  /// satisfies it to first order.
  bool step(double t, double dt) {
    if (p_.order == 1) {
      stage(u0_, b0_, u1_, b1_, t, dt, true);
      std::swap(u0_, u1_);
      std::swap(b0_, b1_);
      return true;
    }
    stage(u0_, b0_, u1_, b1_, t, dt, true);
    reconstruct(u1_);
    const auto [sx, sy] = signal_speeds(u1_);
    const double courant =
        skel::reduce_max(w_, std::max(sx * dt / sc_.geom.dx, sy * dt / sc_.geom.dy));
    const double limit = p_.cfl(sc_.geom);
    accepted_dt_bound_ = courant > 0.0 ? dt * limit / courant : std::numeric_limits<double>::infinity();
    if (courant > limit) {
      retry_dt_ = dt * 0.9 * limit / courant;
      ++rejected_;
      reconstruct(u0_);
      return false;
    }
    // Rain is held at its value on [t, t + dt): steps land on the window
    // edges, so both stages see the same rate and the rain volume is exact.
    stage(u1_, b1_, u2_, b2_, t, dt, true);
    for (auto [i, j] : u0_.interior()) {
      u0_(i, j) = heun_average(u0_(i, j), u2_(i, j));
      b0_(i, j) = detail::heun_average(b0_(i, j), b2_(i, j));
    }
    u0_.invalidate_halo();
    return true;
  }

  double retry_dt() const { return retry_dt_; }
  /// Largest dt the intermediate state of the last order-2 step would have
  /// allowed; infinite at order 1.
  double accepted_dt_bound() const { return accepted_dt_bound_; }
  long rejected_steps() const { return rejected_; }

  /// One explicit Euler stage applied to the current state, without Heun.
  void single_stage(double t, double dt) {
    reconstruct(u0_);
    stage(u0_, b0_, u1_, b1_, t, dt, true);
    std::swap(u0_, u1_);
    std::swap(b0_, b1_);
  }

 private:
  /// Largest signal speeds along x and y: over the reconstructed faces of
  /// interior cells at order 2, over cell values at order 1.
  std::pair<double, double> signal_speeds(const StateMatrix& m) const {
    double sx = 0.0;
    double sy = 0.0;
    const double g = p_.g;
    for (auto [i, j] : m.interior()) {
      if (p_.order == 2) {
        const CellFaces& a = fx_(i, j);
        const CellFaces& b = fy_(i, j);
        sx = std::max({sx, signal_speed(a.h_lo, a.un_lo, g), signal_speed(a.h_hi, a.un_hi, g)});
        sy = std::max({sy, signal_speed(b.h_lo, b.un_lo, g), signal_speed(b.h_hi, b.un_hi, g)});
      } else {
        const PrimitiveState c = to_primitive(m(i, j), p_.h_eps);
        sx = std::max(sx, signal_speed(c.h, c.u, g));
        sy = std::max(sy, signal_speed(c.h, c.v, g));
      }
    }
    return {sx, sy};
  }

  void attach_state_boundaries(StateMatrix& m) {
    m.set_boundary_filler([this](PaddedGrid<ConservedState>& g, skel::Direction d) {
      const Side s = detail::to_side(d);
      fill_side(g, s, sc_.bc[s], p_.g, p_.h_eps);
    });
  }

  /// Boundary conditions + second order reconstruction: face values of every
  /// interior cell and of the first halo ring along each axis.
  void reconstruct(StateMatrix& in) {
    const bool second = p_.order == 2;
    const double h_eps = p_.h_eps;
    const double dx = sc_.geom.dx;
    const double dy = sc_.geom.dy;
    auto cell_x = [&](int i, int j) {
      const PrimitiveState s = to_primitive(in(i, j), h_eps);
      return StencilCell{s.h, s.u, s.v, z_(i, j)};
    };
    auto cell_y = [&](int i, int j) {
      const PrimitiveState s = to_primitive(in(i, j), h_eps);
      return StencilCell{s.h, s.v, s.u, z_(i, j)};
    };
    const int r = second ? 1 : 0;  // stencil radius
    skel::apply_list(
        w_, {skel::Step{"second order reconstruction",
                        {&in, &z_},
                        {},
                        {&fx_, &fy_},
                        [&] {
                          for (int j = 0; j < in.ny(); ++j)
                            for (int i = -1; i <= in.nx(); ++i)
                              fx_(i, j) = reconstruct_cell(r ? cell_x(i - 1, j) : StencilCell{},
                                                           cell_x(i, j),
                                                           r ? cell_x(i + 1, j) : StencilCell{},
                                                           dx, second, h_eps);
                          for (int j = -1; j <= in.ny(); ++j)
                            for (int i = 0; i < in.nx(); ++i)
                              fy_(i, j) = reconstruct_cell(r ? cell_y(i, j - 1) : StencilCell{},
                                                           cell_y(i, j),
                                                           r ? cell_y(i, j + 1) : StencilCell{},
                                                           dy, second, h_eps);
                        }}});
  }

  static InterfaceFlux interface_flux(const CellFaces& lower, const CellFaces& upper, double g) {
    const HydrostaticFaceStates hs = hydrostatic_reconstruct(
        lower.h_hi, lower.z_hi, upper.h_lo, upper.z_lo, lower.un_hi, upper.un_lo);
    const Flux2D f = hll_flux(FaceState{hs.h_left, lower.un_hi, lower.ut_hi},
                              FaceState{hs.h_right, upper.un_lo, upper.ut_lo}, g);
    const InterfaceSourceCorrections s =
        interface_source_corrections(lower.h_hi, hs.h_left, upper.h_lo, hs.h_right, g);
    InterfaceFlux out{f, f};
    out.to_lower.normal += s.s_left;
    out.to_upper.normal += s.s_right;
    return out;
  }

  void stage(StateMatrix& in, skel::DMatrix<detail::CellBudget>& bin, StateMatrix& out,
             skel::DMatrix<detail::CellBudget>& bout, double t, double dt, bool faces_ready) {
    if (!faces_ready) reconstruct(in);
    const double g = p_.g;
    const double h_eps = p_.h_eps;
    const double rx = dt / sc_.geom.dx;
    const double ry = dt / sc_.geom.dy;

    skel::apply_list(
        w_,
        {
            skel::Step{"hydrostatic reconstruction and numerical flux",
                       {},
                       {&fx_, &fy_},
                       {&ix_, &iy_},
                       [&] {
                         for (int j = 0; j < in.ny(); ++j)
                           for (int i = 0; i <= in.nx(); ++i)
                             ix_(i, j) = interface_flux(fx_(i - 1, j), fx_(i, j), g);
                         for (int j = 0; j <= in.ny(); ++j)
                           for (int i = 0; i < in.nx(); ++i)
                             iy_(i, j) = interface_flux(fy_(i, j - 1), fy_(i, j), g);
                       }},
            skel::Step{"scheme computation",
                       {},
                       {&in, &ix_, &iy_, &fx_, &fy_},
                       {&out},
                       [&] {
                         for (auto [i, j] : in.interior()) {
                           const Flux2D& fw = ix_(i, j).to_upper;
                           const Flux2D& fe = ix_(i + 1, j).to_lower;
                           const Flux2D& gs = iy_(i, j).to_upper;
                           const Flux2D& gn = iy_(i, j + 1).to_lower;
                           const CellFaces& cx = fx_(i, j);
                           const CellFaces& cy = fy_(i, j);
                           const double scx =
                               centered_source(cx.h_lo, cx.h_hi, cx.z_lo, cx.z_hi, g).momentum;
                           const double scy =
                               centered_source(cy.h_lo, cy.h_hi, cy.z_lo, cy.z_hi, g).momentum;
                           const ConservedState& c = in(i, j);
                           double h = c.h - rx * (fe.mass - fw.mass) - ry * (gn.mass - gs.mass);
                           // A cell drained exactly can land a few ulps below zero.
                           if (h < 0.0) {
                             const double scale = c.h + rx * (std::abs(fe.mass) + std::abs(fw.mass)) +
                                                  ry * (std::abs(gn.mass) + std::abs(gs.mass));
                             if (h >= -kRoundoffDepth * scale) h = 0.0;
                           }
                           out(i, j) = ConservedState{
                               h,
                               c.hu - rx * (fe.normal - fw.normal - scx) -
                                   ry * (gn.transverse - gs.transverse),
                               c.hv - rx * (fe.transverse - fw.transverse) -
                                   ry * (gn.normal - gs.normal - scy)};
                         }
                       }},
            skel::Step{"rain and infiltration",
                       {},
                       {&bin, &ix_, &iy_},
                       {&out, &bout},
                       [&] {
                         const bool open_x = !sc_.bc.periodic_x();
                         const bool open_y = !sc_.bc.periodic_y();
                         for (auto [i, j] : out.interior()) {
                           detail::CellBudget b = bin(i, j);
                           const int gi = out.global_i(i);
                           const int gj = out.global_j(j);
                           if (open_x && gi == 0) b.outflow -= rx * ix_(i, j).to_upper.mass;
                           if (open_x && gi == sc_.geom.nx - 1) b.outflow += rx * ix_(i + 1, j).to_lower.mass;
                           if (open_y && gj == 0) b.outflow -= ry * iy_(i, j).to_upper.mass;
                           if (open_y && gj == sc_.geom.ny - 1) b.outflow += ry * iy_(i, j + 1).to_lower.mass;
                           double& h = out(i, j).h;
                           const double rain =
                               dt * rain_rate(sc_.rain, t, gi, gj);
                           h += rain;
                           b.rain += rain;
                           if (sc_.infiltration && h > 0.0) {
                             // Depth form of I = min(h_over, dt I_C) / dt, so a
                             // supply-limited cell ends exactly dry.
                             const double depth = std::min(
                                 h, dt * infiltration_capacity(*sc_.infiltration, h,
                                                               GreenAmptState{b.infiltrated}));
                             h -= depth;
                             b.infiltrated += depth;
                           }
                           bout(i, j) = b;
                         }
                       }},
            skel::Step{"frictions",
                       {},
                       {&in},
                       {&out},
                       [&] {
                         for (auto [i, j] : out.interior()) {
                           ConservedState& s = out(i, j);
                           check_height(s.h, out.global_i(i), out.global_j(j), t);
                           if (s.h <= h_eps) {
                             s.hu = 0.0;
                             s.hv = 0.0;
                             continue;
                           }
                           if (!cf_) continue;
                           const ConservedState& old = in(i, j);
                           const FrictionCoefficient fc{(*cf_)(i, j), sc_.friction->family};
                           const double qmag = std::hypot(old.hu, old.hv);
                           const double d = friction_denominator(s.h, old.h, qmag, fc, dt, g, h_eps);
                           s.hu /= d;
                           s.hv /= d;
                         }
                       }},
        });
  }

  void check_height(double h, int gi, int gj, double t) {
    if (h < 0.0 || !std::isfinite(h)) {
      if (!std::isfinite(h))
        throw NumericalError("non-finite water height at cell (" + std::to_string(gi) + ", " +
                             std::to_string(gj) + "), t = " + std::to_string(t));
      std::ostringstream msg;
      msg.precision(17);
      msg << "negative water height " << h << " at cell (" << gi << ", " << gj << "), t = " << t;
      throw NegativeHeight(msg.str());
    }
    min_stage_h_ = std::min(min_stage_h_, h);
  }

  skel::Worker& w_;
  const Scenario& sc_;
  SchemeParams p_;
  int gw_;
  StateMatrix u0_, u1_, u2_;
  skel::DMatrix<double> z_;
  skel::DMatrix<CellFaces> fx_, fy_;
  skel::DMatrix<InterfaceFlux> ix_, iy_;
  skel::DMatrix<detail::CellBudget> b0_, b1_, b2_;
  std::optional<skel::DMatrix<double>> cf_;
  double min_stage_h_ = std::numeric_limits<double>::infinity();
  double retry_dt_ = 0.0;
  double accepted_dt_bound_ = std::numeric_limits<double>::infinity();
  long rejected_ = 0;
};

namespace detail {

inline std::pair<int, int> gauge_cell(const GridGeometry& geom, const Gauge& gauge) {
  const int i = static_cast<int>(std::floor((gauge.x - geom.x0) / geom.dx));
  const int j = static_cast<int>(std::floor((gauge.y - geom.y0) / geom.dy));
  if (i < 0 || i >= geom.nx || j < 0 || j >= geom.ny)
    throw ConfigError("gauge '" + gauge.id + "' lies outside the domain");
  return {i, j};
}

struct LocalGauge {
  std::size_t index;
  int li, lj;
};

inline double sum_budget(const Raster<CellBudget>& b, double CellBudget::*term) {
  double s = 0.0;
  for (const auto& c : b.data()) s += c.*term;
  return s;
}

}  // namespace detail

/// Runs the scenario from t = 0 on plan.workers threads. Every worker runs
/// the same loop on its own block; the report is assembled on the root.
inline SimulationReport run_simulation(const Scenario& sc, const RunPlan& plan) {
  sc.validate();
  if (!plan.iterations && !(plan.t_end >= 0.0)) throw ConfigError("time.t_end must be >= 0");
  if (plan.iterations && *plan.iterations < 0) throw ConfigError("iterations must be >= 0");
  std::vector<double> outputs;
  if (!plan.iterations) {
    for (double t : plan.output_times) {
      if (t < 0.0 || t > plan.t_end) throw ConfigError("output time outside [0, t_end]");
      outputs.push_back(t);
    }
    std::sort(outputs.begin(), outputs.end());
    outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  }
  // Steps also land on the rain window edges so the rain volume is exact.
  std::vector<double> breaks;
  std::visit(
      [&](const auto& r) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(r)>, NoRain>) {
          breaks.push_back(r.start);
          breaks.push_back(r.end);
        }
      },
      sc.rain);
  std::vector<GaugeRecord> records;
  for (const Gauge& gauge : plan.gauges) {
    const auto [i, j] = detail::gauge_cell(sc.geom, gauge);
    records.push_back(GaugeRecord{gauge, i, j, {}, -std::numeric_limits<double>::infinity(), {}});
  }

  const skel::ProcessTopology topo =
      skel::decompose(plan.workers, sc.geom.nx, sc.geom.ny, sc.scheme.ghost_width(),
                      sc.bc.periodic_x(), sc.bc.periodic_y());
  SimulationReport report;
  report.px = topo.px();
  report.py = topo.py();
  const double area = sc.geom.cell_area();

  skel::run_spmd(topo, plan.options, [&](skel::Worker& w) {
    BlockSolver solver(w, sc);
    auto& u = solver.state();
    const auto& z = solver.topography();

    std::vector<detail::LocalGauge> mine;
    std::vector<GaugeRecord> local = records;
    for (std::size_t k = 0; k < records.size(); ++k) {
      const auto e = w.extent();
      if (e.contains(records[k].i, records[k].j))
        mine.push_back({k, records[k].i - e.x0, records[k].j - e.y0});
    }
    auto sample = [&](double t) {
      for (const auto& lg : mine) {
        const PrimitiveState p = to_primitive(u(lg.li, lg.lj), sc.scheme.h_eps);
        GaugeRecord& r = local[lg.index];
        r.series.push_back({t, p.h, p.u, p.v});
        r.max_level = std::max(r.max_level, p.h + z(lg.li, lg.lj));
        if (!r.arrival_time && p.h > plan.arrival_threshold) r.arrival_time = t;
      }
    };
    std::size_t next_output = 0;
    auto emit_outputs = [&](double t) {
      while (next_output < outputs.size() && outputs[next_output] <= t) {
        auto g = skel::gather(w, u);
        if (g && plan.on_snapshot) plan.on_snapshot(outputs[next_output], *g);
        ++next_output;
      }
    };

    sample(0.0);
    emit_outputs(0.0);
    double t = 0.0;
    long steps = 0;
    // Once a step has been refused, the intermediate-state bound of each
    // accepted step caps the next one, so a run does not pay one refusal per
    // step. Runs that never refuse are unaffected.
    double dt_cap = std::numeric_limits<double>::infinity();
    for (;;) {
      if (plan.iterations ? steps >= *plan.iterations : t >= plan.t_end) break;
      double dt = std::min(solver.stable_dt(), dt_cap);
      double t_next = t + dt;
      if (!plan.iterations) {
        double target = plan.t_end;
        if (next_output < outputs.size()) target = std::min(target, outputs[next_output]);
        for (double b : breaks)
          if (b > t) target = std::min(target, b);
        if (t_next >= target) {
          dt = target - t;
          t_next = target;
        }
      }
      if (!(dt > 0.0) || !std::isfinite(dt))
        throw NumericalError("time step collapsed to " + std::to_string(dt) + " at t = " +
                             std::to_string(t));
      bool refused = false;
      for (int attempt = 0; !solver.step(t, dt); ++attempt) {
        if (attempt == 50)
          throw NumericalError("step size control failed at t = " + std::to_string(t));
        dt = solver.retry_dt();
        t_next = t + dt;
        refused = true;
      }
      if (refused || std::isfinite(dt_cap)) dt_cap = 0.95 * solver.accepted_dt_bound();
      t = t_next;
      ++steps;
      sample(t);
      emit_outputs(t);
    }

    const double min_h = skel::reduce_min(w, solver.min_stage_h());
    const long rejected = solver.rejected_steps();
    auto final_state = skel::gather(w, u);
    auto budget = skel::gather(w, solver.budget());

    // Gauge series travel to the root in gauge order.
    const std::uint64_t seq = w.next_sequence();
    const std::uint64_t tag = skel::make_tag(seq, skel::channel::kUser);
    if (!w.is_root()) {
      for (const auto& lg : mine) {
        const GaugeRecord& r = local[lg.index];
        w.send(0, tag, skel::to_bytes(r.series.data(), r.series.size()));
      }
      return;
    }
    for (std::size_t k = 0; k < records.size(); ++k) {
      const int owner = topo.owner(records[k].i, records[k].j);
      GaugeRecord r = records[k];
      if (owner == 0) {
        r = local[k];
      } else {
        r.series = skel::from_bytes<GaugeSample>(w.recv(owner, tag));
        const double zk = sc.z(r.i, r.j);
        for (const auto& s : r.series) {
          r.max_level = std::max(r.max_level, s.h + zk);
          if (!r.arrival_time && s.h > plan.arrival_threshold) r.arrival_time = s.t;
        }
      }
      report.gauges.push_back(std::move(r));
    }
    report.final_state = std::move(*final_state);
    report.t_final = t;
    report.steps = steps;
    report.min_stage_h = min_h;
    report.rejected_steps = rejected;
    report.initial_volume = total_volume(sc.initial, sc.geom);
    report.final_volume = total_volume(report.final_state, sc.geom);
    report.rain_volume = detail::sum_budget(*budget, &detail::CellBudget::rain) * area;
    report.infiltrated_volume = detail::sum_budget(*budget, &detail::CellBudget::infiltrated) * area;
    report.outflow_volume = detail::sum_budget(*budget, &detail::CellBudget::outflow) * area;
    report.root_stats = w.stats();
  });
  return report;
}

/// One explicit Euler stage of the scheme on a single worker, starting
/// from `u` at time t.
inline Raster<ConservedState> phi_stage(const Scenario& sc, const Raster<ConservedState>& u,
                                        double t, double dt) {
  Scenario s = sc;
  s.initial = u;
  s.validate();
  const skel::ProcessTopology topo =
      skel::decompose(1, s.geom.nx, s.geom.ny, s.scheme.ghost_width(), s.bc.periodic_x(),
                      s.bc.periodic_y());
  Raster<ConservedState> out;
  skel::run_spmd(topo, {}, [&](skel::Worker& w) {
    BlockSolver solver(w, s);
    solver.single_stage(t, dt);
    out = std::move(*skel::gather(w, solver.state()));
  });
  return out;
}

}  // namespace swof
