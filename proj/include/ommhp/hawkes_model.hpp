#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "decay_state.hpp"
#include "discretizer.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "types.hpp"

namespace ommhp {

/// log(sum_i exp(x_i)); -inf for an empty or all -inf input.
[[nodiscard]] inline double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - m);
  return m + std::log(sum);
}

/// exp(x_i) / sum_j exp(x_j) in place, shifted by the maximum only: equal
/// inputs give exactly equal outputs however large their magnitude. Throws
/// NumericError when no entry is finite.
inline void softmax_in_place(std::span<double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) throw NumericError("softmax of non-finite values");
  double sum = 0.0;
  for (double& v : x) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : x) v /= sum;
}

/// Conditional intensity of `target_type` at time t given `history`:
///   mu_p + sum_{i: t_i < t} a_{p_i p} exp(-b_{p_i p} (t - t_i)).
/// Only events strictly before t contribute.
[[nodiscard]] inline double intensity(const ClusterParams& cluster, std::span<const Event> history,
                                      std::size_t target_type, double t) {
  if (target_type >= cluster.num_types()) {
    throw IndexError("target type " + std::to_string(target_type) + " out of range");
  }
  if (!(t >= 0.0)) throw ValidationError("intensity time must be nonnegative");
  double value = cluster.base_rates[target_type];
  for (const Event& e : history) {
    if (!(e.time < t)) continue;
    if (e.type >= cluster.num_types()) throw IndexError("event type out of range");
    const KernelParams& k = cluster.kernels(e.type, target_type);
    value += k.amplitude * std::exp(-k.decay * (t - e.time));
  }
  return value;
}

[[nodiscard]] inline std::vector<double> intensities(const ClusterParams& cluster,
                                                     std::span<const Event> history, double t) {
  std::vector<double> out(cluster.num_types());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = intensity(cluster, history, p, t);
  return out;
}

/// Exact log-likelihood on [0, horizon]:
///   sum_i log lambda_{p_i}(t_i) - sum_p int_0^T lambda_p(s) ds
/// with the compensator in closed form for exponential kernels.
[[nodiscard]] inline double hp_log_likelihood_continuous(const EventSequence& seq,
                                                         const ClusterParams& cluster) {
  const std::size_t p = cluster.num_types();
  seq.validate(p);
  const auto& events = seq.events;
  const double horizon = seq.horizon;

  Grid<double> sums(p, p, 0.0);
  double now = 0.0;
  double log_terms = 0.0;
  std::size_t i = 0;
  while (i < events.size()) {
    const double t = events[i].time;
    const double dt = t - now;
    if (dt > 0.0) {
      for (std::size_t q = 0; q < p; ++q) {
        for (std::size_t r = 0; r < p; ++r) sums(q, r) *= std::exp(-cluster.decay(q, r) * dt);
      }
      now = t;
    }
    std::size_t j = i;
    while (j < events.size() && events[j].time == t) ++j;
    for (std::size_t k = i; k < j; ++k) {
      const std::size_t target = events[k].type;
      double lambda = cluster.base_rates[target];
      for (std::size_t q = 0; q < p; ++q) lambda += cluster.amplitude(q, target) * sums(q, target);
      if (!(lambda > 0.0)) throw NumericError("non-positive intensity at an event time");
      log_terms += std::log(lambda);
    }
    for (std::size_t k = i; k < j; ++k) {
      for (std::size_t r = 0; r < p; ++r) sums(events[k].type, r) += 1.0;
    }
    i = j;
  }

  double compensator = 0.0;
  for (double mu : cluster.base_rates) compensator += mu * horizon;
  for (const Event& e : events) {
    for (std::size_t r = 0; r < p; ++r) {
      const KernelParams& k = cluster.kernels(e.type, r);
      compensator += k.amplitude / k.decay * -std::expm1(-k.decay * (horizon - e.time));
    }
  }
  return log_terms - compensator;
}

/// Intensities at the right endpoint of every interval, rows = intervals.
/// The history for interval tau is the events of intervals 1..tau-1; events
/// inside interval tau are counted in x but do not excite lambda(tau * delta).
[[nodiscard]] inline Grid<double> discretized_intensities(const EventSequence& seq,
                                                          const ClusterParams& cluster,
                                                          const IntervalGrid& grid) {
  const std::size_t p = cluster.num_types();
  seq.validate(p);
  Grid<double> out(grid.count(), p);
  DecayState state(cluster);
  std::size_t next = 0;
  std::vector<Event> batch;
  for (std::size_t tau = 1; tau <= grid.count(); ++tau) {
    const auto lambda = intensities_from_sums(cluster, state.sums_at(grid.end(tau)));
    std::copy(lambda.begin(), lambda.end(), out.row(tau - 1).begin());
    batch.clear();
    while (next < seq.events.size() && grid.interval_of(seq.events[next].time) == tau) {
      batch.push_back(seq.events[next++]);
    }
    state.absorb(batch, grid.end(tau));
  }
  return out;
}

/// log HP^delta = sum_tau sum_p [x log lambda - len_tau * lambda], where len_tau
/// is delta except for a truncated final interval.
[[nodiscard]] inline double hp_log_likelihood_discretized(const IntervalCounts& counts,
                                                          const Grid<double>& interval_intensities) {
  if (interval_intensities.rows() != counts.num_intervals() ||
      interval_intensities.cols() != counts.num_types()) {
    throw ValidationError("counts and intensities have different dimensions");
  }
  double total = 0.0;
  for (std::size_t tau = 1; tau <= counts.num_intervals(); ++tau) {
    const double len = counts.grid.length(tau);
    for (std::size_t p = 0; p < counts.num_types(); ++p) {
      const double lambda = interval_intensities(tau - 1, p);
      if (!(lambda > 0.0)) throw NumericError("non-positive interval intensity");
      const auto x = static_cast<double>(counts.counts(tau - 1, p));
      total += (x > 0.0 ? x * std::log(lambda) : 0.0) - len * lambda;
    }
  }
  return total;
}

[[nodiscard]] inline double hp_log_likelihood_discretized(const EventSequence& seq,
                                                          const ClusterParams& cluster,
                                                          double delta) {
  const IntervalCounts counts = bin_counts(seq, cluster.num_types(), delta);
  return hp_log_likelihood_discretized(counts, discretized_intensities(seq, cluster, counts.grid));
}

/// log sum_k pi_k exp(ll_k).
[[nodiscard]] inline double mixture_log_likelihood(std::span<const double> cluster_log_likelihoods,
                                                   std::span<const double> prior) {
  if (cluster_log_likelihoods.size() != prior.size()) {
    throw ValidationError("one log-likelihood per cluster expected");
  }
  std::vector<double> terms(prior.size());
  for (std::size_t k = 0; k < prior.size(); ++k) {
    terms[k] = prior[k] > 0.0 ? std::log(prior[k]) + cluster_log_likelihoods[k]
                              : -std::numeric_limits<double>::infinity();
  }
  return log_sum_exp(terms);
}

/// log P^delta(s; Theta) for one sequence.
[[nodiscard]] inline double mixture_log_likelihood_discretized(const EventSequence& seq,
                                                               const MixtureModel& model,
                                                               double delta) {
  model.validate();
  std::vector<double> ll(model.num_clusters());
  for (std::size_t k = 0; k < ll.size(); ++k) {
    ll[k] = hp_log_likelihood_discretized(seq, model.clusters[k], delta);
  }
  return mixture_log_likelihood(ll, model.prior);
}

}  // namespace ommhp
