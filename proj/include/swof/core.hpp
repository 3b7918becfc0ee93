#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "swof/errors.hpp"

namespace swof {

/// Default height below which a cell is considered dry [m].
inline constexpr double kDefaultDryThreshold = 1e-12;

struct PhysicalConstants {
  double g = 9.81;
};

/// Uniform Cartesian grid. Cell (i, j) covers
/// [x0 + i*dx, x0 + (i+1)*dx] x [y0 + j*dy, y0 + (j+1)*dy]; j grows northward.
struct GridGeometry {
  int nx = 1;
  int ny = 1;
  double dx = 1.0;
  double dy = 1.0;
  double x0 = 0.0;
  double y0 = 0.0;

  void validate() const {
    if (nx < 1 || ny < 1) throw ConfigError("grid: nx and ny must be >= 1");
    if (!(dx > 0.0) || !(dy > 0.0)) throw ConfigError("grid: dx and dy must be > 0");
  }
  double cell_area() const { return dx * dy; }
  double center_x(int i) const { return x0 + (i + 0.5) * dx; }
  double center_y(int j) const { return y0 + (j + 0.5) * dy; }
  std::size_t cell_count() const { return static_cast<std::size_t>(nx) * ny; }
};

/// Dense row-major 2D array indexed (i, j) with i the fastest index.
template <class T>
class Raster {
 public:
  Raster() = default;
  Raster(int nx, int ny, T fill = T{})
      : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * ny, fill) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int i, int j) {
    assert(i >= 0 && i < nx_ && j >= 0 && j < ny_);
    return data_[static_cast<std::size_t>(j) * nx_ + i];
  }
  const T& operator()(int i, int j) const {
    assert(i >= 0 && i < nx_ && j >= 0 && j < ny_);
    return data_[static_cast<std::size_t>(j) * nx_ + i];
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Raster&) const = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<T> data_;
};

/// Cell-centred unknowns: water height and unit-width discharges.
struct ConservedState {
  double h = 0.0;   // [m]
  double hu = 0.0;  // [m^2/s]
  double hv = 0.0;  // [m^2/s]

  bool operator==(const ConservedState&) const = default;
};

/// 1D conserved pair (h, q) along one axis.
struct State1D {
  double h = 0.0;
  double q = 0.0;

  bool operator==(const State1D&) const = default;
};

struct PrimitiveState {
  double h = 0.0;
  double u = 0.0;
  double v = 0.0;

  bool operator==(const PrimitiveState&) const = default;
};

/// Characteristic speeds u -+ sqrt(g h) of the 1D system.
struct WaveSpeeds {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

enum class FlowRegime { Subcritical, Supercritical, Critical, Dry };

inline const char* to_string(FlowRegime r) {
  switch (r) {
    case FlowRegime::Subcritical: return "subcritical";
    case FlowRegime::Supercritical: return "supercritical";
    case FlowRegime::Critical: return "critical";
    case FlowRegime::Dry: return "dry";
  }
  return "?";
}

/// Velocities are zero on cells with h <= h_eps.
inline PrimitiveState to_primitive(const ConservedState& s,
                                   double h_eps = kDefaultDryThreshold) {
  if (s.h > h_eps) return {s.h, s.hu / s.h, s.hv / s.h};
  return {s.h, 0.0, 0.0};
}

inline ConservedState to_conserved(const PrimitiveState& p) {
  return {p.h, p.h * p.u, p.h * p.v};
}

inline WaveSpeeds wave_speeds(double h, double u, double g) {
  const double c = std::sqrt(g * h);
  return {u - c, u + c};
}

inline FlowRegime flow_regime(double h, double u, double g) {
  if (h <= 0.0) return FlowRegime::Dry;
  const double c = std::sqrt(g * h);
  const double a = std::abs(u);
  if (a < c) return FlowRegime::Subcritical;
  if (a > c) return FlowRegime::Supercritical;
  return FlowRegime::Critical;
}

/// Sum of h * dx * dy, accumulated row-major.
inline double total_volume(const Raster<double>& h, const GridGeometry& geom) {
  double sum = 0.0;
  for (double v : h.data()) sum += v;
  return sum * geom.dx * geom.dy;
}

inline double total_volume(const Raster<ConservedState>& u, const GridGeometry& geom) {
  double sum = 0.0;
  for (const auto& s : u.data()) sum += s.h;
  return sum * geom.dx * geom.dy;
}

}  // namespace swof
