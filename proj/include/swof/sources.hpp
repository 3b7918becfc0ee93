#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <variant>

#include "swof/core.hpp"

namespace swof {

// Friction laws. Manning/Strickler scale with h^(4/3), Darcy-Weisbach/Chezy
// with h.
struct Manning {
  double n = 0.0;  // [s m^(-1/3)]
};
struct Strickler {
  double k = 0.0;  // [m^(1/3)/s]
};
struct DarcyWeisbach {
  double f = 0.0;  // dimensionless
};
struct Chezy {
  double c = 0.0;  // [m^(1/2)/s]
};

using FrictionLaw = std::variant<Manning, Strickler, DarcyWeisbach, Chezy>;

enum class FrictionFamily { PowerFourThirds, PowerOne };

struct FrictionCoefficient {
  double cf = 0.0;
  FrictionFamily family = FrictionFamily::PowerOne;

  double exponent() const { return family == FrictionFamily::PowerFourThirds ? 4.0 / 3.0 : 1.0; }
};

class NonPositiveCoefficient : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

inline FrictionCoefficient friction_coefficient(const FrictionLaw& law, double g) {
  return std::visit(
      [g](const auto& l) -> FrictionCoefficient {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, Manning>) {
          if (!(l.n > 0.0)) throw NonPositiveCoefficient("Manning coefficient must be > 0");
          return {l.n * l.n, FrictionFamily::PowerFourThirds};
        } else if constexpr (std::is_same_v<L, Strickler>) {
          if (!(l.k > 0.0)) throw NonPositiveCoefficient("Strickler coefficient must be > 0");
          return {1.0 / (l.k * l.k), FrictionFamily::PowerFourThirds};
        } else if constexpr (std::is_same_v<L, DarcyWeisbach>) {
          if (!(l.f > 0.0)) throw NonPositiveCoefficient("Darcy-Weisbach coefficient must be > 0");
          return {l.f / (8.0 * g), FrictionFamily::PowerOne};
        } else {
          if (!(l.c > 0.0)) throw NonPositiveCoefficient("Chezy coefficient must be > 0");
          return {1.0 / (l.c * l.c), FrictionFamily::PowerOne};
        }
      },
      law);
}

/// Semi-implicit friction factor 1 + dt g C_f |u^n| / (h^{n+1})^e, where
/// |u^n| = |q^n| / h^n and e is the family exponent.
inline double friction_denominator(double h_new, double h_old, double q_old_magnitude,
                                   const FrictionCoefficient& fc, double dt, double g,
                                   double h_eps) {
  if (h_old <= h_eps || fc.cf == 0.0) return 1.0;
  const double speed = q_old_magnitude / h_old;
  const double depth = fc.family == FrictionFamily::PowerOne ? h_new : std::pow(h_new, 4.0 / 3.0);
  return 1.0 + dt * g * fc.cf * speed / depth;
}

/// One discharge component after the semi-implicit friction update.
/// `q_old_magnitude` is |q^n| (the vector magnitude in 2D). Dry cells lose
/// their momentum.
inline double friction_semi_implicit(double h_star, double q_star, double h_old,
                                     double q_old_magnitude, const FrictionCoefficient& fc,
                                     double dt, double g, double h_eps = kDefaultDryThreshold) {
  if (h_star <= h_eps) return 0.0;
  return q_star / friction_denominator(h_star, h_old, q_old_magnitude, fc, dt, g, h_eps);
}

struct GreenAmptParams {
  double ks = 0.0;       // saturated conductivity [m/s]
  double hf = 0.0;       // wetting-front capillary head [m]
  double a = 1.0;        // dimensionless offset
  double theta_i = 0.0;  // initial moisture
  double theta_s = 1.0;  // saturated moisture
  double ic_init = 1e3;  // capacity used while no water has infiltrated yet [m/s]

  void validate() const {
    if (ks < 0.0) throw ConfigError("infiltration: ks must be >= 0");
    if (!(theta_s > theta_i)) throw ConfigError("infiltration: theta_s must exceed theta_i");
    if (theta_i < 0.0 || theta_s > 1.0) throw ConfigError("infiltration: moisture must lie in [0, 1]");
    if (ic_init < 0.0) throw ConfigError("infiltration: ic_init must be >= 0");
  }
};

struct GreenAmptState {
  double v_inf = 0.0;  // infiltrated volume per unit area [m]

  double front_depth(const GreenAmptParams& p) const { return v_inf / (p.theta_s - p.theta_i); }
  bool operator==(const GreenAmptState&) const = default;
};

/// I_C = Ks (A + (hf - h_over) / Z_f), clamped at 0.
inline double infiltration_capacity(const GreenAmptParams& p, double h_over,
                                    const GreenAmptState& s) {
  if (p.ks == 0.0) return 0.0;
  const double zf = s.front_depth(p);
  if (zf <= 0.0) return p.ic_init;
  return std::max(0.0, p.ks * (p.a + (p.hf - h_over) / zf));
}

struct InfiltrationStep {
  double rate = 0.0;  // I [m/s]
  GreenAmptState state;
};

/// I = min(h_over, dt I_C) / dt, and V_inf grows by dt I.
inline InfiltrationStep infiltration_step(const GreenAmptParams& p, double h_over,
                                          const GreenAmptState& s, double dt) {
  const double capacity = infiltration_capacity(p, h_over, s);
  const double depth = std::min(h_over, dt * capacity);
  return {depth / dt, GreenAmptState{s.v_inf + depth}};
}

struct NoRain {};

struct UniformRain {
  double rate = 0.0;  // [m/s]
  double start = 0.0;
  double end = 0.0;
};

struct RasterRain {
  Raster<double> rates;  // [m/s] per cell
  double start = 0.0;
  double end = 0.0;
};

using RainForcing = std::variant<NoRain, UniformRain, RasterRain>;

inline void validate(const RainForcing& forcing) {
  if (const auto* u = std::get_if<UniformRain>(&forcing)) {
    if (u->rate < 0.0) throw ConfigError("rain: rate must be >= 0");
  } else if (const auto* r = std::get_if<RasterRain>(&forcing)) {
    for (double v : r->rates.data())
      if (v < 0.0) throw ConfigError("rain: raster rates must be >= 0");
  }
}

/// Rain intensity at time t on global cell (i, j); active on [start, end).
inline double rain_rate(const RainForcing& forcing, double t, int i, int j) {
  if (const auto* u = std::get_if<UniformRain>(&forcing)) {
    return (t >= u->start && t < u->end) ? u->rate : 0.0;
  }
  if (const auto* r = std::get_if<RasterRain>(&forcing)) {
    if (t < r->start || t >= r->end) return 0.0;
    if (i < 0 || j < 0 || i >= r->rates.nx() || j >= r->rates.ny()) return 0.0;
    return r->rates(i, j);
  }
  return 0.0;
}

}  // namespace swof
