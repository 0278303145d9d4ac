#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "types.hpp"

namespace ommhp {

/// Partition of (0, horizon] into right-closed intervals of length delta,
/// indexed from 1. When horizon is not a multiple of delta the final interval
/// is truncated at the horizon.
class IntervalGrid {
 public:
  IntervalGrid() = default;

  IntervalGrid(double delta, double horizon) : delta_(delta), horizon_(horizon) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw ValidationError("horizon must be positive");
    }
    if (delta > horizon) throw ValidationError("delta must not exceed the horizon");
    const double ratio = horizon / delta;
    const double nearest = std::round(ratio);
    count_ = std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)
                 ? static_cast<std::size_t>(nearest)
                 : static_cast<std::size_t>(std::ceil(ratio));
    count_ = std::max<std::size_t>(count_, 1);
  }

  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] double delta() const noexcept { return delta_; }
  [[nodiscard]] double horizon() const noexcept { return horizon_; }

  /// Right endpoint of interval tau (tau in [0, count]; end(0) = 0).
  [[nodiscard]] double end(std::size_t tau) const {
    if (tau >= count_) return horizon_;
    return static_cast<double>(tau) * delta_;
  }
  [[nodiscard]] double start(std::size_t tau) const { return tau == 0 ? 0.0 : end(tau - 1); }
  [[nodiscard]] double length(std::size_t tau) const { return end(tau) - start(tau); }

  /// Interval containing t: the tau with start(tau) < t <= end(tau). Time 0
  /// belongs to the first interval.
  [[nodiscard]] std::size_t interval_of(double t) const {
    if (t <= 0.0) return 1;
    auto tau = static_cast<std::size_t>(std::ceil(t / delta_));
    tau = std::clamp<std::size_t>(tau, 1, count_);
    while (tau < count_ && t > end(tau)) ++tau;
    while (tau > 1 && t <= end(tau - 1)) --tau;
    return tau;
  }

 private:
  double delta_ = 1.0;
  double horizon_ = 1.0;
  std::size_t count_ = 1;
};

/// x(tau - 1, p): events of type p in interval tau.
struct IntervalCounts {
  IntervalGrid grid;
  Grid<std::size_t> counts;

  [[nodiscard]] std::size_t num_intervals() const noexcept { return grid.count(); }
  [[nodiscard]] std::size_t num_types() const noexcept { return counts.cols(); }
  [[nodiscard]] double delta() const noexcept { return grid.delta(); }

  [[nodiscard]] std::size_t total() const {
    std::size_t sum = 0;
    for (std::size_t c : counts.values()) sum += c;
    return sum;
  }
};

inline IntervalCounts bin_counts(const EventSequence& seq, std::size_t num_types, double delta,
                                 double horizon) {
  IntervalCounts out{IntervalGrid(delta, horizon), {}};
  out.counts = Grid<std::size_t>(out.grid.count(), num_types, 0);
  for (const Event& e : seq.events) {
    if (e.time > horizon) throw ValidationError("event beyond the horizon");
    if (e.type >= num_types) throw IndexError("event type out of range");
    ++out.counts(out.grid.interval_of(e.time) - 1, e.type);
  }
  return out;
}

inline IntervalCounts bin_counts(const EventSequence& seq, std::size_t num_types, double delta) {
  return bin_counts(seq, num_types, delta, seq.horizon);
}

/// Events of every sequence in (start, end] for interval `index`.
struct IntervalBatch {
  std::size_t index = 0;
  double start = 0.0;
  double end = 0.0;
  std::vector<std::vector<Event>> events;

  [[nodiscard]] double length() const noexcept { return end - start; }

  /// Per-sequence counts, sequences x types.
  [[nodiscard]] Grid<std::size_t> counts(std::size_t num_types) const {
    Grid<std::size_t> out(events.size(), num_types, 0);
    for (std::size_t n = 0; n < events.size(); ++n) {
      for (const Event& e : events[n]) {
        if (e.type >= num_types) throw IndexError("event type out of range");
        ++out(n, e.type);
      }
    }
    return out;
  }
};

/// Ordered producer of interval batches over sequences sharing one horizon.
/// The sequences must outlive the stream.
class IntervalStream {
 public:
  IntervalStream(std::span<const EventSequence> sequences, double delta)
      : sequences_(sequences), cursor_(sequences.size(), 0) {
    if (sequences.empty()) throw ValidationError("no sequences");
    const double horizon = sequences.front().horizon;
    for (const EventSequence& s : sequences) {
      if (s.horizon != horizon) throw ValidationError("sequences have mixed horizons");
      if (!s.events.empty() && s.events.back().time > horizon) {
        throw ValidationError("event beyond the horizon");
      }
    }
    grid_ = IntervalGrid(delta, horizon);
  }

  [[nodiscard]] const IntervalGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] bool done() const noexcept { return next_ > grid_.count(); }
  [[nodiscard]] std::size_t next_index() const noexcept { return next_; }

  IntervalBatch next() {
    if (done()) throw SequencingError("interval stream exhausted");
    IntervalBatch batch;
    batch.index = next_;
    batch.start = grid_.start(next_);
    batch.end = grid_.end(next_);
    batch.events.resize(sequences_.size());
    for (std::size_t n = 0; n < sequences_.size(); ++n) {
      const auto& events = sequences_[n].events;
      std::size_t& i = cursor_[n];
      while (i < events.size() && grid_.interval_of(events[i].time) == next_) {
        batch.events[n].push_back(events[i]);
        ++i;
      }
      if (i < events.size() && grid_.interval_of(events[i].time) < next_) {
        throw ValidationError("events are not sorted by time");
      }
    }
    ++next_;
    return batch;
  }

 private:
  std::span<const EventSequence> sequences_;
  IntervalGrid grid_;
  std::vector<std::size_t> cursor_;
  std::size_t next_ = 1;
};

inline IntervalStream stream_intervals(std::span<const EventSequence> sequences, double delta) {
  return IntervalStream(sequences, delta);
}

inline std::vector<IntervalBatch> collect_batches(std::span<const EventSequence> sequences,
                                                  double delta) {
  IntervalStream stream(sequences, delta);
  std::vector<IntervalBatch> out;
  out.reserve(stream.grid().count());
  while (!stream.done()) out.push_back(stream.next());
  return out;
}

}  // namespace ommhp
