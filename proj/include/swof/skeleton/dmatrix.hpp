#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "swof/core.hpp"
#include "swof/padded_grid.hpp"
#include "swof/skeleton/comm.hpp"
#include "swof/skeleton/topology.hpp"

namespace swof::skel {

/// Type-erased handle used by apply_list to track halo freshness.
class HaloField {
 public:
  virtual ~HaloField() = default;
  virtual void exchange(Worker& w) = 0;

  bool halo_current() const { return halo_current_; }
  void invalidate_halo() { halo_current_ = false; }

 protected:
  bool halo_current_ = false;
};

/// Interior cell index of a block, in local coordinates.
struct CellIndex {
  int i = 0;
  int j = 0;
};

/// Row-major traversal of a block interior.
class InteriorRange {
 public:
  class iterator {
   public:
    using value_type = CellIndex;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(int i, int j, int nx) : c_{i, j}, nx_(nx) {}
    CellIndex operator*() const { return c_; }
    iterator& operator++() {
      if (++c_.i == nx_) {
        c_.i = 0;
        ++c_.j;
      }
      return *this;
    }
    iterator operator++(int) {
      iterator t = *this;
      ++*this;
      return t;
    }
    bool operator==(const iterator& o) const { return c_.i == o.c_.i && c_.j == o.c_.j; }

   private:
    CellIndex c_;
    int nx_ = 1;
  };

  InteriorRange(int nx, int ny) : nx_(nx), ny_(ny) {}
  iterator begin() const { return nx_ > 0 && ny_ > 0 ? iterator(0, 0, nx_) : end(); }
  iterator end() const { return iterator(0, ny_, nx_); }

 private:
  int nx_;
  int ny_;
};

/// The local block of a distributed 2D matrix: the worker's interior cells
/// plus a halo frame of `ghost` cells. Local index (0, 0) is the block's
/// first interior cell; global index = local + block origin.
template <class T>
class DMatrix : public HaloField {
  static_assert(std::is_trivially_copyable_v<T>, "DMatrix elements are sent as raw bytes");

 public:
  /// Fills the ghost layers of one physical (neighbour-less) side.
  using BoundaryFiller = std::function<void(PaddedGrid<T>&, Direction)>;

  DMatrix(const Worker& w, int ghost, T fill = T{})
      : extent_(w.extent()), grid_(extent_.nx, extent_.ny, ghost, fill) {
    for (Direction d : kDirections) physical_[static_cast<int>(d)] = !w.neighbor(d).has_value();
    grid_.set_checked(w.options().halo_check);
  }

  int nx() const { return extent_.nx; }
  int ny() const { return extent_.ny; }
  int ghost() const { return grid_.ghost(); }
  const BlockExtent& extent() const { return extent_; }
  int global_i(int i) const { return extent_.x0 + i; }
  int global_j(int j) const { return extent_.y0 + j; }

  T& operator()(int i, int j) { return grid_(i, j); }
  const T& operator()(int i, int j) const { return grid_(i, j); }

  PaddedGrid<T>& local() { return grid_; }
  const PaddedGrid<T>& local() const { return grid_; }

  InteriorRange interior() const { return {nx(), ny()}; }

  /// True when the block side lies on the physical domain boundary.
  bool is_physical(Direction d) const { return physical_[static_cast<int>(d)]; }

  void set_boundary_filler(BoundaryFiller f) { filler_ = std::move(f); }
  const BoundaryFiller& boundary_filler() const { return filler_; }

  void exchange(Worker& w) override;

  void mark_halo_current() { halo_current_ = true; }

 private:
  BlockExtent extent_;
  PaddedGrid<T> grid_;
  std::array<bool, 4> physical_{};
  BoundaryFiller filler_;
};

namespace detail {

/// Strip of `width` layers beside side `d`: inside the interior when
/// `ghost_side` is false, in the halo otherwise. West/east strips span the
/// interior rows; south/north strips span the widened columns.
template <class T>
std::vector<T> pack_strip(const PaddedGrid<T>& g, Direction d, bool ghost_side) {
  const int w = g.ghost();
  std::vector<T> out;
  switch (d) {
    case Direction::West:
    case Direction::East: {
      const int i0 = d == Direction::West ? (ghost_side ? -w : 0) : (ghost_side ? g.nx() : g.nx() - w);
      out.reserve(static_cast<std::size_t>(w) * g.ny());
      for (int j = 0; j < g.ny(); ++j)
        for (int i = i0; i < i0 + w; ++i) out.push_back(g(i, j));
      break;
    }
    case Direction::South:
    case Direction::North: {
      const int j0 = d == Direction::South ? (ghost_side ? -w : 0) : (ghost_side ? g.ny() : g.ny() - w);
      out.reserve(static_cast<std::size_t>(w) * (g.nx() + 2 * w));
      for (int j = j0; j < j0 + w; ++j)
        for (int i = -w; i < g.nx() + w; ++i) out.push_back(g(i, j));
      break;
    }
  }
  return out;
}

template <class T>
void unpack_ghost_strip(PaddedGrid<T>& g, Direction d, const std::vector<T>& data) {
  const int w = g.ghost();
  std::size_t k = 0;
  auto take = [&]() -> const T& {
    if (k >= data.size()) throw ProtocolError("halo strip shorter than the receiving frame");
    return data[k++];
  };
  switch (d) {
    case Direction::West:
    case Direction::East: {
      const int i0 = d == Direction::West ? -w : g.nx();
      for (int j = 0; j < g.ny(); ++j)
        for (int i = i0; i < i0 + w; ++i) g(i, j) = take();
      break;
    }
    case Direction::South:
    case Direction::North: {
      const int j0 = d == Direction::South ? -w : g.ny();
      for (int j = j0; j < j0 + w; ++j)
        for (int i = -w; i < g.nx() + w; ++i) g(i, j) = take();
      break;
    }
  }
  if (k != data.size()) throw ProtocolError("halo strip longer than the receiving frame");
}

}  // namespace detail

/// Completes the halo frame of `m`: west/east strips first, then
/// south/north strips over the widened extent so corner cells arrive
/// without diagonal messages. Physical sides are handed to the matrix's
/// boundary filler after each phase. All sends of a phase are posted before
/// its receives.
template <class T>
void halo_exchange(Worker& w, DMatrix<T>& m) {
  const std::uint64_t seq = w.next_sequence();
  w.stats().halo_exchanges += 1;
  PaddedGrid<T>& g = m.local();
  if ((w.neighbor(Direction::West) && g.nx() < g.ghost()) ||
      (w.neighbor(Direction::South) && g.ny() < g.ghost())) {
    throw ProtocolError("halo_exchange: block narrower than its halo width " +
                        std::to_string(g.ghost()));
  }
  if (g.ghost() > 0) {
    const std::array<std::array<Direction, 2>, 2> phases{
        {{Direction::West, Direction::East}, {Direction::South, Direction::North}}};
    for (const auto& phase : phases) {
      for (Direction d : phase) {
        if (auto n = w.neighbor(d)) {
          const auto strip = detail::pack_strip(g, d, false);
          // Tagged with the side of the receiver's frame it fills.
          w.send(*n, make_tag(seq, channel::kHaloBase + static_cast<unsigned>(opposite(d))),
                 to_bytes(strip.data(), strip.size()));
        }
      }
      for (Direction d : phase) {
        if (auto n = w.neighbor(d)) {
          const auto data = from_bytes<T>(
              w.recv(*n, make_tag(seq, channel::kHaloBase + static_cast<unsigned>(d))));
          detail::unpack_ghost_strip(g, d, data);
        }
      }
      if (m.boundary_filler()) {
        for (Direction d : phase)
          if (m.is_physical(d)) m.boundary_filler()(g, d);
      }
    }
  }
  m.mark_halo_current();
}

template <class T>
void DMatrix<T>::exchange(Worker& w) {
  halo_exchange(w, *this);
}

/// Builds the local block of a distributed matrix from a global raster
/// readable by every worker.
template <class T>
DMatrix<T> scatter(const Worker& w, const Raster<T>& global, int ghost, T fill = T{}) {
  const auto& topo = w.topology();
  if (global.nx() != topo.global_nx() || global.ny() != topo.global_ny())
    throw ConfigError("scatter: raster size does not match the topology");
  DMatrix<T> m(w, ghost, fill);
  const BlockExtent e = m.extent();
  for (int j = 0; j < e.ny; ++j)
    for (int i = 0; i < e.nx; ++i) m(i, j) = global(e.x0 + i, e.y0 + j);
  return m;
}

/// Collects all interiors on the root worker, row-major. Other workers get
/// nullopt.
template <class T>
std::optional<Raster<T>> gather(Worker& w, const DMatrix<T>& m) {
  const std::uint64_t seq = w.next_sequence();
  const auto& topo = w.topology();
  auto interior = [](const DMatrix<T>& a) {
    std::vector<T> v;
    v.reserve(static_cast<std::size_t>(a.nx()) * a.ny());
    for (int j = 0; j < a.ny(); ++j)
      for (int i = 0; i < a.nx(); ++i) v.push_back(a(i, j));
    return v;
  };
  if (!w.is_root()) {
    const auto v = interior(m);
    w.send(0, make_tag(seq, channel::kGather), to_bytes(v.data(), v.size()));
    return std::nullopt;
  }
  Raster<T> out(topo.global_nx(), topo.global_ny());
  auto place = [&](int rank, const std::vector<T>& v) {
    const BlockExtent e = topo.extent(rank);
    if (v.size() != static_cast<std::size_t>(e.nx) * e.ny)
      throw ProtocolError("gather: block " + std::to_string(rank) + " has the wrong size");
    std::size_t k = 0;
    for (int j = 0; j < e.ny; ++j)
      for (int i = 0; i < e.nx; ++i) out(e.x0 + i, e.y0 + j) = v[k++];
  };
  place(0, interior(m));
  for (int r = 1; r < w.size(); ++r)
    place(r, from_bytes<T>(w.recv(r, make_tag(seq, channel::kGather))));
  return out;
}

}  // namespace swof::skel
