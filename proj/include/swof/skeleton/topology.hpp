#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swof/errors.hpp"

namespace swof::skel {

class MoreWorkersThanCells : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Direction of a neighbouring block. Values index the neighbour table.
enum class Direction { West = 0, East = 1, South = 2, North = 3 };

inline constexpr std::array<Direction, 4> kDirections{Direction::West, Direction::East,
                                                     Direction::South, Direction::North};

inline Direction opposite(Direction d) {
  switch (d) {
    case Direction::West: return Direction::East;
    case Direction::East: return Direction::West;
    case Direction::South: return Direction::North;
    case Direction::North: return Direction::South;
  }
  return d;
}

/// Interior cells [x0, x0 + nx) x [y0, y0 + ny) of one block, in global indices.
struct BlockExtent {
  int x0 = 0;
  int y0 = 0;
  int nx = 0;
  int ny = 0;

  bool contains(int i, int j) const { return i >= x0 && i < x0 + nx && j >= y0 && j < y0 + ny; }
  bool operator==(const BlockExtent&) const = default;
};

/// Workers arranged on a px x py Cartesian grid; rank = cy * px + cx.
class ProcessTopology {
 public:
  ProcessTopology() = default;
  ProcessTopology(int px, int py, int nx, int ny, int ghost_width, bool periodic_x,
                  bool periodic_y)
      : px_(px), py_(py), nx_(nx), ny_(ny), ghost_(ghost_width),
        periodic_x_(periodic_x), periodic_y_(periodic_y) {}

  int size() const { return px_ * py_; }
  int px() const { return px_; }
  int py() const { return py_; }
  int global_nx() const { return nx_; }
  int global_ny() const { return ny_; }
  int ghost_width() const { return ghost_; }
  bool periodic_x() const { return periodic_x_; }
  bool periodic_y() const { return periodic_y_; }

  std::array<int, 2> coords(int rank) const { return {rank % px_, rank / px_}; }
  int rank_of(int cx, int cy) const { return cy * px_ + cx; }

  /// Neighbour rank, or nullopt on a non-periodic domain edge. On a periodic
  /// axis the neighbour wraps, possibly onto the rank itself.
  std::optional<int> neighbor(int rank, Direction d) const {
    auto [cx, cy] = coords(rank);
    switch (d) {
      case Direction::West: cx -= 1; break;
      case Direction::East: cx += 1; break;
      case Direction::South: cy -= 1; break;
      case Direction::North: cy += 1; break;
    }
    if (cx < 0 || cx >= px_) {
      if (!periodic_x_) return std::nullopt;
      cx = (cx + px_) % px_;
    }
    if (cy < 0 || cy >= py_) {
      if (!periodic_y_) return std::nullopt;
      cy = (cy + py_) % py_;
    }
    return rank_of(cx, cy);
  }

  /// Balanced split: the first n % p blocks along an axis get one extra cell.
  static std::pair<int, int> split(int n, int p, int c) {
    const int base = n / p;
    const int rem = n % p;
    const int start = c * base + std::min(c, rem);
    return {start, base + (c < rem ? 1 : 0)};
  }

  BlockExtent extent(int rank) const {
    const auto [cx, cy] = coords(rank);
    const auto [x0, nx] = split(nx_, px_, cx);
    const auto [y0, ny] = split(ny_, py_, cy);
    return {x0, y0, nx, ny};
  }

  /// Rank owning global cell (i, j).
  int owner(int i, int j) const {
    int cx = 0;
    while (cx + 1 < px_ && split(nx_, px_, cx + 1).first <= i) ++cx;
    int cy = 0;
    while (cy + 1 < py_ && split(ny_, py_, cy + 1).first <= j) ++cy;
    return rank_of(cx, cy);
  }

 private:
  int px_ = 1;
  int py_ = 1;
  int nx_ = 1;
  int ny_ = 1;
  int ghost_ = 1;
  bool periodic_x_ = false;
  bool periodic_y_ = false;
};

/// Picks px * py = workers minimising |px/py - nx/ny| (ties towards the
/// smaller px) among factorisations whose blocks are at least `ghost_width`
/// cells wide on every split axis.
inline ProcessTopology decompose(int workers, int nx, int ny, int ghost_width,
                                 bool periodic_x = false, bool periodic_y = false) {
  if (workers < 1) throw ConfigError("decompose: worker count must be >= 1");
  if (nx < 1 || ny < 1) throw ConfigError("decompose: grid extents must be >= 1");
  if (static_cast<long long>(workers) > static_cast<long long>(nx) * ny) {
    throw MoreWorkersThanCells("decompose: " + std::to_string(workers) + " workers for " +
                               std::to_string(nx) + "x" + std::to_string(ny) + " cells");
  }
  const double target = static_cast<double>(nx) / ny;
  int best_px = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int px = 1; px <= workers; ++px) {
    if (workers % px != 0) continue;
    const int py = workers / px;
    if (px > nx || py > ny) continue;
    // A block that exchanges halos along an axis must hold a full halo strip.
    const bool x_exchanges = px > 1 || periodic_x;
    const bool y_exchanges = py > 1 || periodic_y;
    if (x_exchanges && nx / px < ghost_width) continue;
    if (y_exchanges && ny / py < ghost_width) continue;
    const double err = std::abs(static_cast<double>(px) / py - target);
    if (err < best_err) {
      best_err = err;
      best_px = px;
    }
  }
  if (best_px == 0) {
    throw MoreWorkersThanCells("decompose: no " + std::to_string(workers) +
                               "-worker layout of a " + std::to_string(nx) + "x" +
                               std::to_string(ny) + " grid keeps blocks at least " +
                               std::to_string(ghost_width) + " cells wide");
  }
  return ProcessTopology(best_px, workers / best_px, nx, ny, ghost_width, periodic_x, periodic_y);
}

}  // namespace swof::skel
