#pragma once

#include <cmath>
#include <string>

#include "swof/errors.hpp"

namespace swof::analytic {

struct PointState {
  double h = 0.0;
  double u = 0.0;
};

/// Dam break on a flat frictionless bed: depth h_left for x < x_dam and
/// h_right (>= 0) beyond, released at t = 0.
struct DamBreak {
  double h_left = 1.0;
  double h_right = 0.0;
  double x_dam = 0.0;
  double g = 9.81;

  void validate() const {
    if (!(h_left > 0.0)) throw ConfigError("dam break: h_left must be > 0");
    if (h_right < 0.0 || h_right >= h_left)
      throw ConfigError("dam break: need 0 <= h_right < h_left");
  }
};

/// Wave celerity c_m = sqrt(g h_m) of the middle state of the wet dam break,
/// from the root of
///   -8 c_R^2 c_m^2 (c_L - c_m)^2 + (c_m^2 - c_R^2)^2 (c_m^2 + c_R^2) = 0
/// in (c_R, c_L), by Newton iteration.
inline double stoker_middle_celerity(const DamBreak& d) {
  d.validate();
  const double cl = std::sqrt(d.g * d.h_left);
  const double cr = std::sqrt(d.g * d.h_right);
  if (cr == 0.0) return 0.0;
  auto f = [&](double c) {
    const double a = c * c - cr * cr;
    return -8.0 * cr * cr * c * c * (cl - c) * (cl - c) + a * a * (c * c + cr * cr);
  };
  auto df = [&](double c) {
    const double a = c * c - cr * cr;
    return -16.0 * cr * cr * c * (cl - c) * (cl - c) + 16.0 * cr * cr * c * c * (cl - c) +
           4.0 * c * a * (c * c + cr * cr) + 2.0 * c * a * a;
  };
  // f(c_R) < 0 < f(c_L); the physical root is the only one in between.
  double lo = cr;
  double hi = cl;
  double c = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double fc = f(c);
    if (fc < 0.0) lo = c;
    else hi = c;
    const double d1 = df(c);
    double next = d1 != 0.0 ? c - fc / d1 : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // keep Newton bracketed
    if (std::abs(next - c) <= 1e-15 * cl) return next;
    c = next;
  }
  return c;
}

/// Exact solution at (x, t): Ritter's rarefaction when h_right = 0, Stoker's
/// rarefaction + shock otherwise.
inline PointState dam_break(const DamBreak& d, double x, double t) {
  d.validate();
  if (t <= 0.0) return {x < d.x_dam ? d.h_left : d.h_right, 0.0};
  const double cl = std::sqrt(d.g * d.h_left);
  const double xi = (x - d.x_dam) / t;
  const double x_a = -cl;
  auto fan = [&] {
    const double c = (2.0 * cl - xi) / 3.0;
    return PointState{c * c / d.g, 2.0 * (xi + cl) / 3.0};
  };
  if (xi <= x_a) return {d.h_left, 0.0};
  if (d.h_right == 0.0) {
    if (xi < 2.0 * cl) return fan();
    return {0.0, 0.0};
  }
  const double cr = std::sqrt(d.g * d.h_right);
  const double cm = stoker_middle_celerity(d);
  const double x_b = 2.0 * cl - 3.0 * cm;
  const double x_c = 2.0 * cm * cm * (cl - cm) / (cm * cm - cr * cr);
  if (xi <= x_b) return fan();
  if (xi <= x_c) return {cm * cm / d.g, 2.0 * (cl - cm)};
  return {d.h_right, 0.0};
}

}  // namespace swof::analytic
