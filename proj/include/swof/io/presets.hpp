#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "swof/core.hpp"

namespace swof::io {

/// Plane z = z0 + sx (x - x0) + sy (y - y0) at cell centres.
inline Raster<double> sloped_topography(const GridGeometry& g, double z0, double sx, double sy) {
  Raster<double> z(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      z(i, j) = z0 + sx * (g.center_x(i) - g.x0) + sy * (g.center_y(j) - g.y0);
  return z;
}

/// Gaussian hump of height `a` and e-folding radius `w` centred on (xc, yc).
inline Raster<double> bump_topography(const GridGeometry& g, double a, double w, double xc, double yc) {
  Raster<double> z(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double dx = g.center_x(i) - xc, dy = g.center_y(j) - yc;
      z(i, j) = a * std::exp(-(dx * dx + dy * dy) / (w * w));
    }
  return z;
}

struct RoughSpec {
  std::uint64_t seed = 1;
  double amplitude = 0.1;  // cell-to-cell noise in [0, amplitude)
  int islands = 3;
  double island_height = 1.0;
  double island_radius = 0.0;  // 0 picks a tenth of the shorter side
};

/// Uncorrelated cell noise plus Gaussian islands at random centres.
inline Raster<double> rough_topography(const GridGeometry& g, const RoughSpec& s) {
  std::mt19937_64 gen(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Raster<double> z(g.nx, g.ny);
  for (double& v : z.data()) v = s.amplitude * unit(gen);
  const double lx = g.nx * g.dx, ly = g.ny * g.dy;
  const double r = s.island_radius > 0.0 ? s.island_radius : 0.1 * std::min(lx, ly);
  for (int k = 0; k < s.islands; ++k) {
    const double xc = g.x0 + lx * unit(gen), yc = g.y0 + ly * unit(gen);
    const Raster<double> b = bump_topography(g, s.island_height, r, xc, yc);
    for (std::size_t n = 0; n < z.size(); ++n) z.data()[n] += b.data()[n];
  }
  return z;
}

/// Still water at free-surface level `level`; cells above it are dry.
inline Raster<ConservedState> lake_at_rest(const Raster<double>& z, double level) {
  Raster<ConservedState> u(z.nx(), z.ny());
  for (std::size_t n = 0; n < z.size(); ++n) u.data()[n] = {std::max(level - z.data()[n], 0.0), 0.0, 0.0};
  return u;
}

/// Still water, h_left west of x_dam and h_right east of it.
inline Raster<ConservedState> dam_break_state(const GridGeometry& g, double x_dam, double h_left,
                                              double h_right) {
  Raster<ConservedState> u(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) u(i, j) = {g.center_x(i) < x_dam ? h_left : h_right, 0.0, 0.0};
  return u;
}

/// Still water, h_in inside the circle of radius r about (xc, yc).
inline Raster<ConservedState> radial_dam_state(const GridGeometry& g, double xc, double yc, double r,
                                               double h_in, double h_out) {
  Raster<ConservedState> u(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double dx = g.center_x(i) - xc, dy = g.center_y(j) - yc;
      u(i, j) = {dx * dx + dy * dy < r * r ? h_in : h_out, 0.0, 0.0};
    }
  return u;
}

inline Raster<ConservedState> uniform_state(const GridGeometry& g, double h, double u, double v) {
  return Raster<ConservedState>(g.nx, g.ny, to_conserved(PrimitiveState{h, u, v}));
}

}  // namespace swof::io
