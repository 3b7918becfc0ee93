#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "swof/errors.hpp"

namespace swof {

/// Rectangular block of nx x ny interior cells surrounded by a frame of
/// `ghost` cells on every side. Indices run over [-ghost, n + ghost).
template <class T>
class PaddedGrid {
 public:
  PaddedGrid() = default;
  PaddedGrid(int nx, int ny, int ghost, T fill = T{})
      : nx_(nx), ny_(ny), ghost_(ghost), stride_(nx + 2 * ghost),
        data_(static_cast<std::size_t>(nx + 2 * ghost) * (ny + 2 * ghost), fill) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int ghost() const { return ghost_; }

  bool contains(int i, int j) const {
    return i >= -ghost_ && i < nx_ + ghost_ && j >= -ghost_ && j < ny_ + ghost_;
  }

  T& operator()(int i, int j) {
    if (checked_) check(i, j);
    return data_[index(i, j)];
  }
  const T& operator()(int i, int j) const {
    if (checked_) check(i, j);
    return data_[index(i, j)];
  }

  T& at(int i, int j) {
    check(i, j);
    return data_[index(i, j)];
  }
  const T& at(int i, int j) const {
    check(i, j);
    return data_[index(i, j)];
  }

  /// Enables bounds checking on operator().
  void set_checked(bool on) { checked_ = on; }
  bool checked() const { return checked_; }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j + ghost_) * stride_ + static_cast<std::size_t>(i + ghost_);
  }
  void check(int i, int j) const {
    if (!contains(i, j)) {
      throw ProtocolError("grid access (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") outside block " + std::to_string(nx_) + "x" + std::to_string(ny_) +
                          " with halo " + std::to_string(ghost_));
    }
  }

  int nx_ = 0;
  int ny_ = 0;
  int ghost_ = 0;
  int stride_ = 0;
  bool checked_ = false;
  std::vector<T> data_;
};

}  // namespace swof
