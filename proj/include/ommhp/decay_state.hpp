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

/// Amplitude-free exponential sums at one instant t, over events strictly
/// before t:
///   kernel(q, p) = sum_{l: type q, t_l < t} exp(-b_qp (t - t_l))
///   lag(q, p)    = sum_{l: type q, t_l < t} (t - t_l) exp(-b_qp (t - t_l))
/// The first gives the excitation a_qp * kernel(q, p); the second is the
/// (negated) derivative of kernel with respect to b_qp.
struct KernelSums {
  Grid<double> kernel;
  Grid<double> lag;
};

/// Running exponential sums for one (sequence, cluster) pair. The sums do not
/// carry the amplitudes, so they stay valid when a or mu change; they must be
/// rebuilt when the decays change.
class DecayState {
 public:
  DecayState() = default;

  explicit DecayState(const ClusterParams& cluster)
      : kernel_(cluster.num_types(), cluster.num_types(), 0.0),
        lag_(cluster.num_types(), cluster.num_types(), 0.0),
        decays_(cluster.decays()),
        boundary_(cluster.num_types(), 0) {}

  /// State after absorbing `history` (sorted) and decaying to `time`.
  static DecayState from_history(const ClusterParams& cluster, std::span<const Event> history,
                                 double time) {
    DecayState state(cluster);
    state.absorb(history, time);
    return state;
  }

  [[nodiscard]] std::size_t num_types() const noexcept { return boundary_.size(); }
  [[nodiscard]] double last_update_time() const noexcept { return last_; }
  [[nodiscard]] const Grid<double>& kernel_sums() const noexcept { return kernel_; }
  [[nodiscard]] const Grid<double>& lag_sums() const noexcept { return lag_; }
  [[nodiscard]] const Grid<double>& decays() const noexcept { return decays_; }

  [[nodiscard]] bool built_for(const ClusterParams& cluster) const {
    return cluster.num_types() == num_types() && cluster.decays() == decays_;
  }

  /// Strict-past sums at t >= last_update_time(); the state is unchanged.
  [[nodiscard]] KernelSums sums_at(double t) const {
    if (t < last_) throw ValidationError("cannot evaluate decay state in the past");
    const double dt = t - last_;
    KernelSums out{kernel_, lag_};
    const std::size_t p = num_types();
    for (std::size_t q = 0; q < p; ++q) {
      for (std::size_t r = 0; r < p; ++r) {
        if (dt == 0.0) {
          // events at exactly t are not in the strict past of t
          out.kernel(q, r) -= static_cast<double>(boundary_[q]);
          if (out.kernel(q, r) < 0.0) out.kernel(q, r) = 0.0;
        } else {
          const double f = std::exp(-decays_(q, r) * dt);
          out.lag(q, r) = (lag_(q, r) + dt * kernel_(q, r)) * f;
          out.kernel(q, r) = kernel_(q, r) * f;
        }
      }
    }
    return out;
  }

  /// Adds `events`, which must be sorted and lie in (last_update_time, to_time],
  /// then decays the sums to `to_time`. A fresh state also accepts events at
  /// its start time.
  void absorb(std::span<const Event> events, double to_time) {
    if (to_time < last_) throw ValidationError("decay state cannot move backwards in time");
    const double window_start = last_;
    double previous = last_;
    for (const Event& e : events) {
      const bool before_window = fresh_ ? e.time < window_start : e.time <= window_start;
      if (before_window || e.time > to_time) {
        throw ValidationError("event outside the decay-state window");
      }
      if (e.time < previous) throw ValidationError("events are not sorted by time");
      if (e.type >= num_types()) throw IndexError("event type out of range");
      previous = e.time;
      decay_to(e.time);
      for (std::size_t r = 0; r < num_types(); ++r) kernel_(e.type, r) += 1.0;
      ++boundary_[e.type];
    }
    decay_to(to_time);
    fresh_ = false;
  }

 private:
  void decay_to(double t) {
    const double dt = t - last_;
    if (dt <= 0.0) return;
    const std::size_t p = num_types();
    for (std::size_t q = 0; q < p; ++q) {
      for (std::size_t r = 0; r < p; ++r) {
        const double f = std::exp(-decays_(q, r) * dt);
        lag_(q, r) = (lag_(q, r) + dt * kernel_(q, r)) * f;
        kernel_(q, r) *= f;
      }
    }
    std::fill(boundary_.begin(), boundary_.end(), 0);
    last_ = t;
  }

  Grid<double> kernel_;
  Grid<double> lag_;
  Grid<double> decays_;
  std::vector<std::size_t> boundary_;  // events of each type at exactly last_
  double last_ = 0.0;
  bool fresh_ = true;
};

/// lambda_p = mu_p + sum_q a_qp * kernel(q, p).
[[nodiscard]] inline std::vector<double> intensities_from_sums(const ClusterParams& cluster,
                                                               const KernelSums& sums) {
  const std::size_t p = cluster.num_types();
  std::vector<double> out(cluster.base_rates);
  for (std::size_t q = 0; q < p; ++q) {
    for (std::size_t r = 0; r < p; ++r) out[r] += cluster.amplitude(q, r) * sums.kernel(q, r);
  }
  return out;
}

struct AdvanceResult {
  std::vector<double> intensities;
  KernelSums sums;
};

/// Absorbs `new_events` and returns the per-type intensities at `to_time`
/// (strict past: events at `to_time` do not contribute).
inline AdvanceResult advance_decay_state(DecayState& state, const ClusterParams& cluster,
                                         std::span<const Event> new_events, double to_time) {
  if (!state.built_for(cluster)) {
    throw ValidationError("decay state was built for different decay rates");
  }
  state.absorb(new_events, to_time);
  AdvanceResult out;
  out.sums = state.sums_at(to_time);
  out.intensities = intensities_from_sums(cluster, out.sums);
  return out;
}

}  // namespace ommhp
