#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "swof/io/dem.hpp"
#include "swof/io/setup.hpp"
#include "swof/solver.hpp"

namespace swof::io {

inline constexpr const char* kGaugeSchema = "# schema: swof.gauges/1";
inline constexpr const char* kGaugeSummarySchema = "# schema: swof.gauge_summary/1";
inline constexpr const char* kSnapshotSchema = "# schema: swof.snapshots/1";
inline constexpr const char* kFieldSchema = "# schema: swof.field/1";
inline constexpr const char* kAuditSchema = "# schema: swof.audit/1";

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

/// One row per gauge and sample: gauge,x,y,t,h,u,v.
inline void write_gauges_csv(std::ostream& out, const std::vector<GaugeRecord>& records) {
  out << kGaugeSchema << "\n"
      << "gauge,x,y,t,h,u,v\n";
  for (const auto& r : records)
    for (const auto& s : r.series)
      out << r.gauge.id << ',' << format_number(r.gauge.x) << ',' << format_number(r.gauge.y) << ','
          << format_number(s.t) << ',' << format_number(s.h) << ',' << format_number(s.u) << ','
          << format_number(s.v) << '\n';
}

/// Maximum water level and arrival time per gauge; arrival is empty when
/// the threshold was never exceeded.
inline void write_gauge_summary(std::ostream& out, const std::vector<GaugeRecord>& records) {
  out << kGaugeSummarySchema << "\n"
      << "gauge,x,y,i,j,max_level,arrival_time\n";
  for (const auto& r : records) {
    out << r.gauge.id << ',' << format_number(r.gauge.x) << ',' << format_number(r.gauge.y) << ',' << r.i
        << ',' << r.j << ',' << format_number(r.max_level) << ',';
    if (r.arrival_time) out << format_number(*r.arrival_time);
    out << '\n';
  }
}

/// Writes one ASCII raster per field and scheduled time, plus an index.
class SnapshotWriter {
 public:
  SnapshotWriter(std::filesystem::path dir, const Scenario& sc, bool csv)
      : dir_(std::move(dir)), geom_(sc.geom), z_(sc.z), h_eps_(sc.scheme.h_eps), csv_(csv) {
    std::filesystem::create_directories(dir_);
    index_ = open_output(dir_ / "index.csv");
    index_ << kSnapshotSchema << "\n"
           << "index,t,h,u,v\n";
  }

  void operator()(double t, const Raster<ConservedState>& u) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "%04d", count_++);
    Raster<double> h(geom_.nx, geom_.ny), vx(geom_.nx, geom_.ny), vy(geom_.nx, geom_.ny);
    for (std::size_t n = 0; n < u.size(); ++n) {
      const PrimitiveState p = to_primitive(u.data()[n], h_eps_);
      h.data()[n] = p.h;
      vx.data()[n] = p.u;
      vy.data()[n] = p.v;
    }
    const std::string hs = std::string("h_") + stem + ".asc", us = std::string("u_") + stem + ".asc",
                      vs = std::string("v_") + stem + ".asc";
    write_ascii_grid(dir_ / hs, geom_, h);
    write_ascii_grid(dir_ / us, geom_, vx);
    write_ascii_grid(dir_ / vs, geom_, vy);
    index_ << stem << ',' << format_number(t) << ',' << hs << ',' << us << ',' << vs << '\n';
    if (csv_) {
      std::ofstream f = open_output(dir_ / (std::string("field_") + stem + ".csv"));
      f << kFieldSchema << "\n"
        << "x,y,h,u,v,z\n";
      for (int j = 0; j < geom_.ny; ++j)
        for (int i = 0; i < geom_.nx; ++i)
          f << format_number(geom_.center_x(i)) << ',' << format_number(geom_.center_y(j)) << ','
            << format_number(h(i, j)) << ',' << format_number(vx(i, j)) << ',' << format_number(vy(i, j))
            << ',' << format_number(z_(i, j)) << '\n';
    }
    index_.flush();
  }

  int count() const { return count_; }

 private:
  std::filesystem::path dir_;
  GridGeometry geom_;
  Raster<double> z_;
  double h_eps_;
  bool csv_;
  std::ofstream index_;
  int count_ = 0;
};

/// Volume budget of a finished run as `key = value` lines.
inline void write_audit(std::ostream& out, const SimulationReport& r, int workers) {
  const double residual = r.budget_residual();
  const double scale = std::max({std::abs(r.initial_volume), std::abs(r.final_volume), r.rain_volume});
  out << kAuditSchema << "\n"
      << "workers = " << workers << "\n"
      << "layout = " << r.px << "x" << r.py << "\n"
      << "steps = " << r.steps << "\n"
      << "t_final = " << format_number(r.t_final) << "\n"
      << "initial_volume = " << format_number(r.initial_volume) << "\n"
      << "final_volume = " << format_number(r.final_volume) << "\n"
      << "rain_volume = " << format_number(r.rain_volume) << "\n"
      << "infiltrated_volume = " << format_number(r.infiltrated_volume) << "\n"
      << "outflow_volume = " << format_number(r.outflow_volume) << "\n"
      << "budget_residual = " << format_number(residual) << "\n"
      << "relative_residual = " << format_number(scale > 0 ? std::abs(residual) / scale : 0.0) << "\n"
      << "min_stage_h = " << format_number(r.min_stage_h) << "\n"
      << "rejected_steps = " << r.rejected_steps << "\n";
}

}  // namespace swof::io
