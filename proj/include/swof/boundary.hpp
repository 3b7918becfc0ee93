#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <variant>

#include "swof/core.hpp"
#include "swof/padded_grid.hpp"

namespace swof {

enum class Side { West, East, South, North };

inline const char* to_string(Side s) {
  switch (s) {
    case Side::West: return "west";
    case Side::East: return "east";
    case Side::South: return "south";
    case Side::North: return "north";
  }
  return "?";
}

inline constexpr std::array<Side, 4> kAllSides{Side::West, Side::East, Side::South, Side::North};

struct Wall {};
struct Periodic {};
struct FreeOutflow {};
/// Imposed water height [m].
struct ImposedHeight {
  double h = 0.0;
};
/// Imposed discharge [m^2/s], positive when water enters the domain.
struct ImposedDischarge {
  double q = 0.0;
};
/// Height and discharge both imposed (required for supercritical inflow).
struct ImposedHeightDischarge {
  double h = 0.0;
  double q = 0.0;
};

using BoundaryCondition =
    std::variant<Wall, Periodic, FreeOutflow, ImposedHeight, ImposedDischarge, ImposedHeightDischarge>;

class InconsistentPeriodic : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class SupercriticalInflowUnderconstrained : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct BoundarySet {
  BoundaryCondition west = Wall{};
  BoundaryCondition east = Wall{};
  BoundaryCondition south = Wall{};
  BoundaryCondition north = Wall{};

  const BoundaryCondition& operator[](Side s) const {
    switch (s) {
      case Side::West: return west;
      case Side::East: return east;
      case Side::South: return south;
      case Side::North: return north;
    }
    return west;
  }
  BoundaryCondition& operator[](Side s) {
    return const_cast<BoundaryCondition&>(std::as_const(*this)[s]);
  }

  bool periodic_x() const { return std::holds_alternative<Periodic>(west); }
  bool periodic_y() const { return std::holds_alternative<Periodic>(south); }

  void validate() const {
    auto is_p = [](const BoundaryCondition& b) { return std::holds_alternative<Periodic>(b); };
    if (is_p(west) != is_p(east))
      throw InconsistentPeriodic("periodic boundary must be set on both west and east");
    if (is_p(south) != is_p(north))
      throw InconsistentPeriodic("periodic boundary must be set on both south and north");
    for (Side s : kAllSides) {
      const auto& b = (*this)[s];
      if (const auto* ih = std::get_if<ImposedHeight>(&b); ih && ih->h < 0.0)
        throw ConfigError(std::string("bc.") + to_string(s) + ": imposed height must be >= 0");
      if (const auto* ib = std::get_if<ImposedHeightDischarge>(&b); ib && ib->h < 0.0)
        throw ConfigError(std::string("bc.") + to_string(s) + ": imposed height must be >= 0");
    }
  }
};

namespace detail {

/// Maps (layer k >= 1, position p along the side) to the ghost cell and to
/// the interior cell at distance k - 1 from the boundary.
struct SideGeometry {
  Side side;
  int nx, ny;

  bool along_x() const { return side == Side::West || side == Side::East; }
  // +1 when the outward normal points along +axis.
  int outward() const { return (side == Side::East || side == Side::North) ? 1 : -1; }

  std::pair<int, int> ghost(int k, int p) const {
    switch (side) {
      case Side::West: return {-k, p};
      case Side::East: return {nx - 1 + k, p};
      case Side::South: return {p, -k};
      case Side::North: return {p, ny - 1 + k};
    }
    return {0, 0};
  }
  std::pair<int, int> interior(int k, int p) const {
    switch (side) {
      case Side::West: return {k - 1, p};
      case Side::East: return {nx - k, p};
      case Side::South: return {p, k - 1};
      case Side::North: return {p, ny - k};
    }
    return {0, 0};
  }
};

/// Imposed height completed by the Riemann invariant u + s 2 sqrt(g h)
/// carried by the characteristic that leaves the domain (s = outward sign).
inline double velocity_from_invariant(double h_in, double u_in, double h_b, int s, double g) {
  return u_in + s * 2.0 * (std::sqrt(g * h_in) - std::sqrt(g * h_b));
}

/// Height h >= h_crit solving q/h + s 2 sqrt(g h) = R on the subcritical
/// branch, or h_crit when no subcritical solution exists.
inline double height_from_invariant(double q_axis, double riemann, int s, double g) {
  const double h_crit = std::cbrt(q_axis * q_axis / g);
  auto f = [&](double h) { return q_axis / h + s * 2.0 * std::sqrt(g * h) - riemann; };
  if (h_crit == 0.0) {
    // q = 0: s 2 sqrt(g h) = R.
    const double root = riemann * s / 2.0;
    return root > 0.0 ? root * root / g : 0.0;
  }
  // f is monotone on [h_crit, inf) with slope sign s.
  double lo = h_crit;
  double f_lo = f(lo);
  if (f_lo * s > 0.0) return h_crit;
  double hi = std::max(2.0 * h_crit, 1.0);
  while (f(hi) * s < 0.0) {
    hi *= 2.0;
    if (hi > 1e12) return h_crit;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) * s < 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Ghost value of the first layer for an imposed condition beside the
/// interior cell `in`. Components are (h, q_normal, q_tangential) with
/// q_normal along +axis.
struct SideState {
  double h = 0.0;
  double qn = 0.0;
  double qt = 0.0;
};

inline SideState imposed_ghost_state(const BoundaryCondition& bc, Side side, const SideState& in,
                                     double g, double h_eps) {
  const int s = detail::SideGeometry{side, 0, 0}.outward();
  const double u_in = in.h > h_eps ? in.qn / in.h : 0.0;
  const double ut_in = in.h > h_eps ? in.qt / in.h : 0.0;
  const FlowRegime regime = flow_regime(in.h, u_in, g);
  const bool inflow = u_in * s < 0.0;

  if (regime == FlowRegime::Supercritical) {
    if (!inflow) return in;  // free outflow
    if (const auto* both = std::get_if<ImposedHeightDischarge>(&bc)) {
      return {both->h, -s * both->q, both->h * ut_in};
    }
    throw SupercriticalInflowUnderconstrained(
        std::string("bc.") + to_string(side) +
        ": supercritical inflow needs both height and discharge imposed");
  }

  double h_b = 0.0;
  double u_b = 0.0;
  if (const auto* ih = std::get_if<ImposedHeight>(&bc)) {
    h_b = ih->h;
    u_b = detail::velocity_from_invariant(in.h, u_in, h_b, s, g);
  } else if (const auto* ib = std::get_if<ImposedHeightDischarge>(&bc)) {
    h_b = ib->h;
    u_b = detail::velocity_from_invariant(in.h, u_in, h_b, s, g);
  } else if (const auto* iq = std::get_if<ImposedDischarge>(&bc)) {
    const double q_axis = -s * iq->q;
    const double riemann = u_in + s * 2.0 * std::sqrt(g * in.h);
    h_b = detail::height_from_invariant(q_axis, riemann, s, g);
    return {h_b, h_b > h_eps ? q_axis : 0.0, h_b * ut_in};
  }
  return {h_b, h_b * u_b, h_b * ut_in};
}

/// Fills the ghost layers of one physical side of a block. Wall mirrors
/// the interior (normal discharge negated); free outflow and imposed
/// conditions extrapolate the first ghost layer outward. Periodic sides are
/// filled by wrap-around exchange, not here. West/east sides cover the
/// interior rows, south/north sides the widened extent [-ghost, nx+ghost).
inline void fill_side(PaddedGrid<ConservedState>& u, Side side, const BoundaryCondition& bc,
                      double g, double h_eps) {
  if (std::holds_alternative<Periodic>(bc)) return;
  const detail::SideGeometry geo{side, u.nx(), u.ny()};
  const int gw = u.ghost();
  const int p_begin = geo.along_x() ? 0 : -gw;
  const int p_end = geo.along_x() ? u.ny() : u.nx() + gw;
  const bool x_normal = geo.along_x();

  auto split = [&](const ConservedState& c) {
    return x_normal ? SideState{c.h, c.hu, c.hv} : SideState{c.h, c.hv, c.hu};
  };
  auto join = [&](const SideState& s) {
    return x_normal ? ConservedState{s.h, s.qn, s.qt} : ConservedState{s.h, s.qt, s.qn};
  };

  for (int p = p_begin; p < p_end; ++p) {
    if (std::holds_alternative<Wall>(bc)) {
      for (int k = 1; k <= gw; ++k) {
        const auto [gi, gj] = geo.ghost(k, p);
        const auto [ii, ij] = geo.interior(std::min(k, x_normal ? u.nx() : u.ny()), p);
        SideState s = split(u(ii, ij));
        s.qn = -s.qn;
        u(gi, gj) = join(s);
      }
      continue;
    }
    const auto [ii, ij] = geo.interior(1, p);
    const auto [g1i, g1j] = geo.ghost(1, p);
    if (std::holds_alternative<FreeOutflow>(bc)) {
      u(g1i, g1j) = u(ii, ij);
    } else {
      u(g1i, g1j) = join(imposed_ghost_state(bc, side, split(u(ii, ij)), g, h_eps));
    }
    for (int k = 2; k <= gw; ++k) {
      const auto [gi, gj] = geo.ghost(k, p);
      u(gi, gj) = u(g1i, g1j);
    }
  }
}

/// Ghost topography: mirrored beside walls, extrapolated elsewhere.
inline void fill_side_topography(PaddedGrid<double>& z, Side side, const BoundaryCondition& bc) {
  if (std::holds_alternative<Periodic>(bc)) return;
  const detail::SideGeometry geo{side, z.nx(), z.ny()};
  const int gw = z.ghost();
  const bool x_normal = geo.along_x();
  const int p_begin = x_normal ? 0 : -gw;
  const int p_end = x_normal ? z.ny() : z.nx() + gw;
  const bool wall = std::holds_alternative<Wall>(bc);
  for (int p = p_begin; p < p_end; ++p) {
    for (int k = 1; k <= gw; ++k) {
      const auto [gi, gj] = geo.ghost(k, p);
      const int depth = wall ? std::min(k, x_normal ? z.nx() : z.ny()) : 1;
      const auto [ii, ij] = geo.interior(depth, p);
      z(gi, gj) = z(ii, ij);
    }
  }
}

/// Wrap-around copy of one axis of a single block covering the whole
/// domain along that axis.
template <class T>
void wrap_axis(PaddedGrid<T>& a, bool x_axis) {
  const int gw = a.ghost();
  if (x_axis) {
    for (int j = 0; j < a.ny(); ++j)
      for (int k = 1; k <= gw; ++k) {
        a(-k, j) = a(a.nx() - k, j);
        a(a.nx() - 1 + k, j) = a(k - 1, j);
      }
  } else {
    for (int i = -gw; i < a.nx() + gw; ++i)
      for (int k = 1; k <= gw; ++k) {
        a(i, -k) = a(i, a.ny() - k);
        a(i, a.ny() - 1 + k) = a(i, k - 1);
      }
  }
}

/// Fills every ghost cell of a single block covering the whole domain:
/// west/east first over the interior rows, then south/north over the
/// widened extent so that corners are consistent.
inline void fill_ghost_cells(PaddedGrid<ConservedState>& u, PaddedGrid<double>& z,
                             const BoundarySet& bc, double g,
                             double h_eps = kDefaultDryThreshold) {
  bc.validate();
  if (bc.periodic_x()) {
    wrap_axis(u, true);
    wrap_axis(z, true);
  } else {
    for (Side s : {Side::West, Side::East}) {
      fill_side(u, s, bc[s], g, h_eps);
      fill_side_topography(z, s, bc[s]);
    }
  }
  if (bc.periodic_y()) {
    wrap_axis(u, false);
    wrap_axis(z, false);
  } else {
    for (Side s : {Side::South, Side::North}) {
      fill_side(u, s, bc[s], g, h_eps);
      fill_side_topography(z, s, bc[s]);
    }
  }
}

}  // namespace swof
