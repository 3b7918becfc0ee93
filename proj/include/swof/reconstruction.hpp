#pragma once

#include <algorithm>

#include "swof/core.hpp"

namespace swof {

/// Values of a reconstructed quantity on the two faces of one cell:
/// `left` at i-1/2 (seen from inside cell i), `right` at i+1/2.
struct InterfacePair {
  double left = 0.0;
  double right = 0.0;
};

inline double minmod(double x, double y) {
  if (x >= 0.0 && y >= 0.0) return std::min(x, y);
  if (x <= 0.0 && y <= 0.0) return std::max(x, y);
  return 0.0;
}

/// Limited slope of s at cell i from its two neighbours.
inline double muscl_slope(double s_prev, double s_i, double s_next, double dx) {
  return minmod((s_i - s_prev) / dx, (s_next - s_i) / dx);
}

inline InterfacePair reconstruct_scalar(double s_i, double slope, double dx) {
  const double half = 0.5 * dx * slope;
  return {s_i - half, s_i + half};
}

/// Velocity reconstruction weighted by the opposite-face heights so that the
/// face discharges average back to h_i u_i. Dry cells keep u_i on both faces.
inline InterfacePair reconstruct_velocity(double u_i, double slope, double h_i,
                                          double h_left_face, double h_right_face,
                                          double dx, double h_eps = kDefaultDryThreshold) {
  if (h_i <= h_eps) return {u_i, u_i};
  const double half = 0.5 * dx * slope;
  return {u_i - (h_right_face / h_i) * half, u_i + (h_left_face / h_i) * half};
}

struct HydrostaticFaceStates {
  double h_left = 0.0;   // h_{i+1/2 L}
  double h_right = 0.0;  // h_{i+1/2 R}
  State1D u_left;   // (h_L, h_L u_-)
  State1D u_right;  // (h_R, h_R u_+)
};

/// Hydrostatic reconstruction at one interface. `minus` values come from the
/// cell below the interface, `plus` values from the cell above.
inline HydrostaticFaceStates hydrostatic_reconstruct(double h_minus, double z_minus,
                                                     double h_plus, double z_plus,
                                                     double u_minus, double u_plus) {
  const double z_max = std::max(z_minus, z_plus);
  HydrostaticFaceStates out;
  out.h_left = std::max(h_minus + (z_minus - z_max), 0.0);
  out.h_right = std::max(h_plus + (z_plus - z_max), 0.0);
  out.u_left = {out.h_left, out.h_left * u_minus};
  out.u_right = {out.h_right, out.h_right * u_plus};
  return out;
}

/// Face values of one cell along one axis, as needed by the interface fluxes.
/// `n` is the velocity component normal to the faces, `t` the transverse one.
struct CellFaces {
  double h_lo = 0.0, h_hi = 0.0;
  double z_lo = 0.0, z_hi = 0.0;
  double un_lo = 0.0, un_hi = 0.0;
  double ut_lo = 0.0, ut_hi = 0.0;
};

/// Primitive values and topography of one cell on a 1D stencil line.
struct StencilCell {
  double h = 0.0;
  double un = 0.0;
  double ut = 0.0;
  double z = 0.0;
};

/// MUSCL reconstruction of h, h+z, u_n and u_t at cell `c` from its
/// neighbours along one axis; z on the faces is deduced as (h+z) - h.
/// With `second_order == false` every face takes the cell value.
inline CellFaces reconstruct_cell(const StencilCell& prev, const StencilCell& c,
                                  const StencilCell& next, double dx, bool second_order,
                                  double h_eps) {
  CellFaces f;
  if (!second_order) {
    f.h_lo = f.h_hi = c.h;
    f.z_lo = f.z_hi = c.z;
    f.un_lo = f.un_hi = c.un;
    f.ut_lo = f.ut_hi = c.ut;
    return f;
  }
  const InterfacePair h = reconstruct_scalar(c.h, muscl_slope(prev.h, c.h, next.h, dx), dx);
  const double eta_prev = prev.h + prev.z;
  const double eta = c.h + c.z;
  const double eta_next = next.h + next.z;
  const InterfacePair eta_f = reconstruct_scalar(eta, muscl_slope(eta_prev, eta, eta_next, dx), dx);
  const InterfacePair un = reconstruct_velocity(
      c.un, muscl_slope(prev.un, c.un, next.un, dx), c.h, h.left, h.right, dx, h_eps);
  const InterfacePair ut = reconstruct_velocity(
      c.ut, muscl_slope(prev.ut, c.ut, next.ut, dx), c.h, h.left, h.right, dx, h_eps);
  f.h_lo = h.left;
  f.h_hi = h.right;
  f.z_lo = eta_f.left - h.left;
  f.z_hi = eta_f.right - h.right;
  f.un_lo = un.left;
  f.un_hi = un.right;
  f.ut_lo = ut.left;
  f.ut_hi = ut.right;
  return f;
}

}  // namespace swof
