#pragma once

#include <array>
#include <cstdlib>
#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "swof/skeleton/comm.hpp"
#include "swof/skeleton/dmatrix.hpp"

namespace swof::skel {

/// Read-only view of a cell and the part of its halo frame within `radius`.
/// Offsets are (di, dj) with j growing northward.
template <class T>
class Neighborhood {
 public:
  Neighborhood(const DMatrix<T>& m, int i, int j) : m_(&m), i_(i), j_(j) {}

  const T& operator()(int di, int dj) const {
    if (m_->local().checked() && (std::abs(di) > m_->ghost() || std::abs(dj) > m_->ghost())) {
      throw ProtocolError("stencil offset (" + std::to_string(di) + ", " + std::to_string(dj) +
                          ") exceeds halo width " + std::to_string(m_->ghost()));
    }
    return (*m_)(i_ + di, j_ + dj);
  }
  const T& center() const { return (*m_)(i_, j_); }

  /// The eight neighbours in the order E, SE, S, SW, W, NW, N, NE.
  std::array<T, 8> neighbors8() const {
    const auto& c = *this;
    return {c(1, 0), c(1, -1), c(0, -1), c(-1, -1), c(-1, 0), c(-1, 1), c(0, 1), c(1, 1)};
  }

  int i() const { return i_; }
  int j() const { return j_; }
  int global_i() const { return m_->global_i(i_); }
  int global_j() const { return m_->global_j(j_); }

 private:
  const DMatrix<T>* m_;
  int i_;
  int j_;
};

/// out(i, j) = f(neighbourhood of in at (i, j)) over the block interior.
/// The input halo is refreshed first unless it is already current.
template <class In, class Out, class F>
void apply(Worker& w, DMatrix<In>& in, DMatrix<Out>& out, F&& f) {
  if (in.nx() != out.nx() || in.ny() != out.ny())
    throw ProtocolError("apply: input and output blocks differ in size");
  if (!in.halo_current()) halo_exchange(w, in);
  for (int j = 0; j < in.ny(); ++j)
    for (int i = 0; i < in.nx(); ++i) out(i, j) = f(Neighborhood<In>(in, i, j));
  out.invalidate_halo();
}

/// One local computation in an apply_list chain. Fields read through a
/// stencil need a current halo; point reads do not. Every written field has
/// its halo marked stale.
struct Step {
  std::string name;
  std::vector<HaloField*> stencil_reads;
  std::vector<HaloField*> point_reads;
  std::vector<HaloField*> writes;
  std::function<void()> body;
};

/// Runs the steps in order. A stencil-read field is exchanged only when it
/// was written since its last exchange.
inline void apply_list(Worker& w, const std::vector<Step>& steps) {
  for (const Step& s : steps) {
    for (HaloField* f : s.stencil_reads)
      if (!f->halo_current()) f->exchange(w);
    s.body();
    for (HaloField* f : s.writes) f->invalidate_halo();
  }
}

inline void apply_list(Worker& w, std::initializer_list<Step> steps) {
  apply_list(w, std::vector<Step>(steps));
}

}  // namespace swof::skel
