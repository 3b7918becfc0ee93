#pragma once

#include <optional>

#include "swof/core.hpp"
#include "swof/skeleton/apply.hpp"
#include "swof/skeleton/comm.hpp"
#include "swof/skeleton/dmatrix.hpp"
#include "swof/skeleton/topology.hpp"

namespace swof::skel {

/// Steepest-descent code of one cell: 1..8 for the lowest neighbour
/// (E, SE, S, SW, W, NW, N, NE) that is positive and below the cell, 0 when
/// there is none. The first neighbour wins a tie.
inline int flow_direction_at(const Neighborhood<double>& nb) {
  const double here = nb.center();
  const auto n = nb.neighbors8();
  int code = 0;
  double lowest = here;
  for (int k = 0; k < 8; ++k) {
    if (n[k] > 0.0 && n[k] < lowest) {
      lowest = n[k];
      code = k + 1;
    }
  }
  return code;
}

/// Block-local form; ghost cells outside the domain must hold 0.
inline void flow_direction(Worker& w, DMatrix<double>& dem, DMatrix<int>& out) {
  apply(w, dem, out, flow_direction_at);
}

/// Whole-raster form on `workers` threads.
inline Raster<int> flow_direction(const Raster<double>& dem, int workers,
                                  const WorkerOptions& opts = {}) {
  const ProcessTopology topo = decompose(workers, dem.nx(), dem.ny(), 1);
  Raster<int> result;
  run_spmd(topo, opts, [&](Worker& w) {
    DMatrix<double> z = scatter(w, dem, 1, 0.0);
    DMatrix<int> dir(w, 0);
    flow_direction(w, z, dir);
    if (auto r = gather(w, dir)) result = std::move(*r);
  });
  return result;
}

}  // namespace swof::skel
