#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace ommhp {

struct Event {
  double time = 0.0;
  std::size_t type = 0;

  bool operator==(const Event&) const = default;
};

/// Time-ordered events observed on [0, horizon].
struct EventSequence {
  std::vector<Event> events;
  double horizon = 0.0;

  bool operator==(const EventSequence&) const = default;

  void validate(std::size_t num_types) const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw ValidationError("sequence horizon must be positive and finite");
    }
    double previous = 0.0;
    for (const Event& e : events) {
      if (!(e.time >= 0.0) || !std::isfinite(e.time)) {
        throw ValidationError("event time must be finite and nonnegative");
      }
      if (e.time < previous) throw ValidationError("events are not sorted by time");
      if (e.time > horizon) throw ValidationError("event time exceeds the horizon");
      if (e.type >= num_types) {
        throw IndexError("event type " + std::to_string(e.type) + " out of range");
      }
      previous = e.time;
    }
  }
};

/// Exponential impact function a * exp(-b * dt).
struct KernelParams {
  double amplitude = 0.0;
  double decay = 1.0;

  bool operator==(const KernelParams&) const = default;
};

/// Hawkes parameters of one cluster. kernels(source, target) describes how an
/// event of type `source` excites type `target`.
struct ClusterParams {
  std::vector<double> base_rates;
  Grid<KernelParams> kernels;

  ClusterParams() = default;
  ClusterParams(std::vector<double> mu, Grid<KernelParams> k)
      : base_rates(std::move(mu)), kernels(std::move(k)) {}

  /// Builds a cluster from a base-rate vector, an amplitude matrix and one
  /// decay shared by every (source, target) pair.
  static ClusterParams with_shared_decay(std::vector<double> mu,
                                         std::initializer_list<std::initializer_list<double>> a,
                                         double decay) {
    const std::size_t p = mu.size();
    Grid<KernelParams> k(p, p);
    if (a.size() != p) throw ValidationError("amplitude matrix has wrong row count");
    std::size_t r = 0;
    for (const auto& row : a) {
      if (row.size() != p) throw ValidationError("amplitude matrix has wrong column count");
      std::size_t c = 0;
      for (double v : row) k(r, c++) = {v, decay};
      ++r;
    }
    return {std::move(mu), std::move(k)};
  }

  static ClusterParams uniform(std::size_t num_types, double mu, double amplitude, double decay) {
    return {std::vector<double>(num_types, mu),
            Grid<KernelParams>(num_types, num_types, {amplitude, decay})};
  }

  [[nodiscard]] std::size_t num_types() const noexcept { return base_rates.size(); }

  [[nodiscard]] double amplitude(std::size_t source, std::size_t target) const {
    return kernels(source, target).amplitude;
  }
  [[nodiscard]] double decay(std::size_t source, std::size_t target) const {
    return kernels(source, target).decay;
  }

  [[nodiscard]] Grid<double> decays() const {
    Grid<double> out(num_types(), num_types());
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = kernels.values()[i].decay;
    return out;
  }

  bool operator==(const ClusterParams&) const = default;

  void validate() const {
    const std::size_t p = num_types();
    if (p == 0) throw ValidationError("cluster has no event types");
    if (kernels.rows() != p || kernels.cols() != p) {
      throw ValidationError("kernel grid must be P x P");
    }
    for (double m : base_rates) {
      if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("base rates must be positive");
    }
    for (const KernelParams& k : kernels.values()) {
      if (!(k.amplitude >= 0.0) || !std::isfinite(k.amplitude)) {
        throw ValidationError("amplitudes must be nonnegative");
      }
      if (!(k.decay > 0.0) || !std::isfinite(k.decay)) {
        throw ValidationError("decays must be positive");
      }
    }
  }
};

struct MixtureModel {
  std::vector<ClusterParams> clusters;
  std::vector<double> prior;

  [[nodiscard]] std::size_t num_clusters() const noexcept { return clusters.size(); }
  [[nodiscard]] std::size_t num_types() const noexcept {
    return clusters.empty() ? 0 : clusters.front().num_types();
  }

  bool operator==(const MixtureModel&) const = default;

  void validate() const {
    if (clusters.empty()) throw ValidationError("mixture has no clusters");
    if (prior.size() != clusters.size()) throw ValidationError("prior length must equal K");
    for (const ClusterParams& c : clusters) {
      c.validate();
      if (c.num_types() != num_types()) throw ValidationError("clusters disagree on P");
    }
    double total = 0.0;
    for (double w : prior) {
      if (!(w >= 0.0)) throw ValidationError("prior entries must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("prior must sum to one");
  }
};

/// Sequences with optional ids and ground-truth labels.
struct LabeledDataset {
  std::vector<std::string> ids;
  std::vector<EventSequence> sequences;
  std::vector<std::size_t> labels;

  bool operator==(const LabeledDataset&) const = default;
};

}  // namespace ommhp
