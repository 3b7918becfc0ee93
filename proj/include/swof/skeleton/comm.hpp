#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "swof/errors.hpp"
#include "swof/skeleton/topology.hpp"

namespace swof::skel {

/// Raised in workers blocked on a receive when another worker failed.
class Aborted : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

using Bytes = std::vector<std::byte>;

struct Message {
  int source = 0;
  std::uint64_t tag = 0;
  Bytes payload;
};

/// Tags carry a collective sequence number in the high bits and a channel
/// (halo direction, reduction, gather) in the low byte.
inline std::uint64_t make_tag(std::uint64_t sequence, unsigned channel) {
  return (sequence << 8) | (channel & 0xffu);
}
inline std::uint64_t tag_sequence(std::uint64_t tag) { return tag >> 8; }

namespace channel {
inline constexpr unsigned kHaloBase = 0;  // + Direction of the receiving ghost side
inline constexpr unsigned kReduceUp = 8;
inline constexpr unsigned kReduceDown = 9;
inline constexpr unsigned kGather = 10;
inline constexpr unsigned kUser = 16;
}  // namespace channel

/// One unbounded mailbox per worker. Sends never block, so posting all
/// sends before any receive cannot deadlock.
class MessageHub {
 public:
  explicit MessageHub(int size) {
    boxes_.reserve(size);
    for (int r = 0; r < size; ++r) boxes_.push_back(std::make_unique<Mailbox>());
  }

  int size() const { return static_cast<int>(boxes_.size()); }

  void send(int dest, Message m) {
    Mailbox& box = *boxes_.at(dest);
    {
      std::lock_guard lock(box.mutex);
      box.queue.push_back(std::move(m));
    }
    box.cv.notify_all();
  }

  /// Blocks until the message (source, tag) is in `self`'s mailbox. A
  /// pending message from `source` with an older sequence number means the
  /// two sides disagree on the collective order, which is fatal.
  Bytes recv(int self, int source, std::uint64_t tag) {
    Mailbox& box = *boxes_.at(self);
    std::unique_lock lock(box.mutex);
    for (;;) {
      if (aborted_.load()) throw Aborted("worker " + std::to_string(self) + ": run aborted");
      for (auto it = box.queue.begin(); it != box.queue.end(); ++it) {
        if (it->source != source) continue;
        if (it->tag == tag) {
          Bytes payload = std::move(it->payload);
          box.queue.erase(it);
          return payload;
        }
        if (tag_sequence(it->tag) < tag_sequence(tag)) {
          throw ProtocolError("worker " + std::to_string(self) + ": stale message from " +
                              std::to_string(source) + " (tag " + std::to_string(it->tag) +
                              ", expected " + std::to_string(tag) + ")");
        }
      }
      box.cv.wait(lock);
    }
  }

  void abort() {
    aborted_.store(true);
    for (auto& box : boxes_) {
      std::lock_guard lock(box->mutex);
      box->cv.notify_all();
    }
  }

  std::size_t pending() const {
    std::size_t n = 0;
    for (const auto& box : boxes_) {
      std::lock_guard lock(box->mutex);
      n += box->queue.size();
    }
    return n;
  }

 private:
  struct Mailbox {
    mutable std::mutex mutex;
    std::condition_variable cv;
    std::deque<Message> queue;
  };
  std::vector<std::unique_ptr<Mailbox>> boxes_;
  std::atomic<bool> aborted_{false};
};

struct WorkerOptions {
  /// Bounds-check every block access against the halo frame.
  bool halo_check = false;
};

struct WorkerStats {
  std::size_t halo_exchanges = 0;
  std::size_t messages_sent = 0;
  std::size_t bytes_sent = 0;
};

/// One SPMD participant: owns a rank, a block of the domain and a view of
/// the message hub. User code running on a worker never touches the hub.
class Worker {
 public:
  Worker(int rank, const ProcessTopology& topo, MessageHub& hub, WorkerOptions opts = {})
      : rank_(rank), topo_(&topo), hub_(&hub), opts_(opts) {}

  int rank() const { return rank_; }
  int size() const { return topo_->size(); }
  bool is_root() const { return rank_ == 0; }
  const ProcessTopology& topology() const { return *topo_; }
  BlockExtent extent() const { return topo_->extent(rank_); }
  std::optional<int> neighbor(Direction d) const { return topo_->neighbor(rank_, d); }
  const WorkerOptions& options() const { return opts_; }
  WorkerStats& stats() { return stats_; }
  const WorkerStats& stats() const { return stats_; }

  /// Sequence number of the next collective operation. Every worker issues
  /// collectives in the same order, so equal numbers denote the same call.
  std::uint64_t next_sequence() { return ++sequence_; }

  void send(int dest, std::uint64_t tag, Bytes payload) {
    stats_.messages_sent += 1;
    stats_.bytes_sent += payload.size();
    hub_->send(dest, Message{rank_, tag, std::move(payload)});
  }
  Bytes recv(int source, std::uint64_t tag) { return hub_->recv(rank_, source, tag); }

 private:
  int rank_;
  const ProcessTopology* topo_;
  MessageHub* hub_;
  WorkerOptions opts_;
  WorkerStats stats_;
  std::uint64_t sequence_ = 0;
};

template <class T>
Bytes to_bytes(const T* data, std::size_t count) {
  static_assert(std::is_trivially_copyable_v<T>);
  Bytes out(count * sizeof(T));
  if (count) std::memcpy(out.data(), data, out.size());
  return out;
}

template <class T>
std::vector<T> from_bytes(const Bytes& bytes) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::vector<T> out(bytes.size() / sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), bytes.data(), out.size() * sizeof(T));
  return out;
}

/// Folds one value per worker in rank order on the root and broadcasts the
/// result, so every worker sees the same bits for any associative `op`.
template <class T, class Op>
T all_reduce(Worker& w, const T& value, Op op) {
  const std::uint64_t seq = w.next_sequence();
  if (w.size() == 1) return value;
  if (w.is_root()) {
    T acc = value;
    for (int r = 1; r < w.size(); ++r) {
      const auto v = from_bytes<T>(w.recv(r, make_tag(seq, channel::kReduceUp)));
      if (v.size() != 1) throw ProtocolError("all_reduce: malformed contribution");
      acc = op(acc, v.front());
    }
    for (int r = 1; r < w.size(); ++r) w.send(r, make_tag(seq, channel::kReduceDown), to_bytes(&acc, 1));
    return acc;
  }
  w.send(0, make_tag(seq, channel::kReduceUp), to_bytes(&value, 1));
  const auto v = from_bytes<T>(w.recv(0, make_tag(seq, channel::kReduceDown)));
  if (v.size() != 1) throw ProtocolError("all_reduce: malformed result");
  return v.front();
}

inline double reduce_min(Worker& w, double local) {
  return all_reduce(w, local, [](double a, double b) { return b < a ? b : a; });
}

inline double reduce_max(Worker& w, double local) {
  return all_reduce(w, local, [](double a, double b) { return b > a ? b : a; });
}

inline void barrier(Worker& w) { all_reduce(w, 0, [](int a, int) { return a; }); }

/// Runs `body(Worker&)` on every rank of `topo`, each on its own thread
/// (inline for a single worker). The first failure aborts the others and is
/// rethrown once all workers have stopped.
template <class Body>
void run_spmd(const ProcessTopology& topo, const WorkerOptions& opts, Body&& body) {
  MessageHub hub(topo.size());
  std::mutex error_mutex;
  std::exception_ptr primary;
  std::exception_ptr secondary;

  auto run_rank = [&](int rank) {
    try {
      Worker w(rank, topo, hub, opts);
      body(w);
    } catch (const Aborted&) {
      std::lock_guard lock(error_mutex);
      if (!secondary) secondary = std::current_exception();
    } catch (...) {
      {
        std::lock_guard lock(error_mutex);
        if (!primary) primary = std::current_exception();
      }
      hub.abort();
    }
  };

  if (topo.size() == 1) {
    run_rank(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(topo.size());
    for (int r = 0; r < topo.size(); ++r) threads.emplace_back(run_rank, r);
  }
  if (primary) std::rethrow_exception(primary);
  if (secondary) std::rethrow_exception(secondary);
  if (hub.pending() != 0) {
    throw ProtocolError("run finished with " + std::to_string(hub.pending()) +
                        " unconsumed messages");
  }
}

}  // namespace swof::skel
