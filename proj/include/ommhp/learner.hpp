#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "decay_state.hpp"
#include "discretizer.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "hawkes_model.hpp"
#include "metrics.hpp"
#include "random.hpp"
#include "types.hpp"

namespace ommhp {

enum class MStepStrategy { sgd, em };
enum class DecayMode { fixed, learned };

/// Diagonal scaling of SGD steps. `fisher` divides the steps of mu_p and of
/// the kernels targeting p by I_p = sum_n w_n * len / lambda_{n,p}, the
/// expected information of the interval about mu_p. Raw gradients scale with
/// the number of sequences and the interval length, so a fixed schedule is
/// only stable for one data size without it.
enum class Preconditioner { none, fisher };

/// eta_t = scale / (t + offset)^power; the default is 1 / sqrt(t + 1).
struct StepSchedule {
  double scale = 1.0;
  double offset = 1.0;
  double power = 0.5;

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("step scale must be positive");
    if (!(offset >= 0.0) || !std::isfinite(offset)) {
      throw ValidationError("step offset must be nonnegative");
    }
    if (!(power >= 0.0) || !std::isfinite(power)) {
      throw ValidationError("step power must be nonnegative");
    }
  }

  [[nodiscard]] double rate(std::size_t t) const {
    return scale / std::pow(static_cast<double>(t) + offset, power);
  }

  bool operator==(const StepSchedule&) const = default;
};

struct ParameterBounds {
  double min_base_rate = 1e-6;
  double min_decay = 1e-3;
};

struct EmOptions {
  std::size_t iterations = 10;
  double window = 0.0;  // trailing buffer length; 0 keeps the whole history
};

struct LearnerConfig {
  std::size_t num_clusters = 2;
  std::size_t num_types = 2;
  double delta = 25.0;
  StepSchedule schedule;
  MStepStrategy m_step = MStepStrategy::sgd;
  DecayMode decay_mode = DecayMode::fixed;
  double initial_decay = 1.0;
  Preconditioner preconditioner = Preconditioner::fisher;
  ParameterBounds bounds;
  EmOptions em;
  std::uint64_t seed = 0;
  double alpha_jitter = 1e-3;
  double rate_jitter = 0.2;
  std::size_t snapshot_every = 0;  // responsibilities snapshot cadence; 0 = never

  void validate() const {
    if (num_clusters == 0) throw ValidationError("K must be at least 1");
    if (num_types == 0) throw ValidationError("P must be at least 1");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be positive");
    schedule.validate();
    if (!(initial_decay > 0.0)) throw ValidationError("initial decay must be positive");
    if (!(bounds.min_base_rate > 0.0) || !(bounds.min_decay > 0.0)) {
      throw ValidationError("parameter bounds must be positive");
    }
    if (em.iterations == 0) throw ValidationError("EM needs at least one iteration");
    if (!(em.window >= 0.0)) throw ValidationError("EM window must be nonnegative");
    if (!(alpha_jitter >= 0.0 && alpha_jitter < 1.0)) {
      throw ValidationError("alpha jitter must be in [0, 1)");
    }
    if (!(rate_jitter >= 0.0 && rate_jitter < 1.0)) {
      throw ValidationError("rate jitter must be in [0, 1)");
    }
  }
};

/// One observed unit (a sequence, or an edge) under one component during one
/// interval: its counts, the component's intensities at the interval end and
/// the kernel sums behind them, with the unit's responsibility weight.
struct UnitInterval {
  std::span<const std::size_t> counts;
  std::span<const double> intensity;
  const KernelSums* sums = nullptr;
  double weight = 0.0;
};

/// sum_p [x_p log lambda_p - len * lambda_p].
[[nodiscard]] inline double interval_log_term(std::span<const std::size_t> counts,
                                              std::span<const double> intensity, double length) {
  double out = 0.0;
  for (std::size_t p = 0; p < counts.size(); ++p) {
    const double lambda = intensity[p];
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw NumericError("non-positive or non-finite intensity for type " + std::to_string(p));
    }
    const auto x = static_cast<double>(counts[p]);
    out += (x > 0.0 ? x * std::log(lambda) : 0.0) - length * lambda;
  }
  return out;
}

/// Responsibility-weighted interval objective sum_n w_n * interval_log_term.
[[nodiscard]] inline double expected_interval_objective(double length,
                                                        std::span<const UnitInterval> units) {
  double out = 0.0;
  for (const UnitInterval& u : units) {
    if (u.weight == 0.0) continue;
    out += u.weight * interval_log_term(u.counts, u.intensity, length);
  }
  return out;
}

/// Gradient of expected_interval_objective for one component. With
/// r = x / lambda - len, G the kernel sums and H the lag sums:
///   d/d mu_p   = sum_n w_n r_p
///   d/d a_qp   = sum_n w_n r_p G_qp
///   d/d b_qp   = sum_n w_n r_p (-a_qp H_qp)
/// `information` holds sum_n w_n len / lambda_p for the fisher scaling.
struct ClusterGradient {
  std::vector<double> base_rates;
  Grid<double> amplitudes;
  Grid<double> decays;
  std::vector<double> information;
};

[[nodiscard]] inline ClusterGradient cluster_gradient(const ClusterParams& cluster, double length,
                                                      std::span<const UnitInterval> units) {
  const std::size_t p = cluster.num_types();
  ClusterGradient g{std::vector<double>(p, 0.0), Grid<double>(p, p, 0.0), Grid<double>(p, p, 0.0),
                    std::vector<double>(p, 0.0)};
  for (const UnitInterval& u : units) {
    if (u.weight == 0.0) continue;
    for (std::size_t r = 0; r < p; ++r) {
      const double lambda = u.intensity[r];
      if (!(lambda > 0.0)) throw NumericError("non-positive intensity in gradient");
      const double residual = static_cast<double>(u.counts[r]) / lambda - length;
      g.base_rates[r] += u.weight * residual;
      g.information[r] += u.weight * length / lambda;
      for (std::size_t q = 0; q < p; ++q) {
        g.amplitudes(q, r) += u.weight * residual * u.sums->kernel(q, r);
        g.decays(q, r) -= u.weight * residual * cluster.amplitude(q, r) * u.sums->lag(q, r);
      }
    }
  }
  return g;
}

struct StepOptions {
  Preconditioner preconditioner = Preconditioner::fisher;
  DecayMode decay_mode = DecayMode::fixed;
  ParameterBounds bounds;
};

/// One projected ascent step of size eta.
inline void apply_gradient_step(ClusterParams& cluster, const ClusterGradient& g, double eta,
                                const StepOptions& options) {
  const std::size_t p = cluster.num_types();
  auto check = [](double v, const char* block, std::size_t q, std::size_t r) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite gradient for ") + block + "(" + std::to_string(q) +
                         "," + std::to_string(r) + "): " + std::to_string(v));
    }
  };
  for (std::size_t r = 0; r < p; ++r) {
    check(g.base_rates[r], "mu", r, r);
    for (std::size_t q = 0; q < p; ++q) {
      check(g.amplitudes(q, r), "a", q, r);
      check(g.decays(q, r), "b", q, r);
    }
  }
  for (std::size_t r = 0; r < p; ++r) {
    double step = eta;
    if (options.preconditioner == Preconditioner::fisher) {
      if (g.information[r] == 0.0) continue;  // no weight on this target type
      step /= g.information[r];
    }
    double& mu = cluster.base_rates[r];
    mu = std::max(mu + step * g.base_rates[r], options.bounds.min_base_rate);
    for (std::size_t q = 0; q < p; ++q) {
      KernelParams& k = cluster.kernels(q, r);
      k.amplitude = std::max(k.amplitude + step * g.amplitudes(q, r), 0.0);
      if (options.decay_mode == DecayMode::learned) {
        k.decay = std::max(k.decay + step * g.decays(q, r), options.bounds.min_decay);
      }
    }
  }
}

/// Responsibility-weighted branching-structure EM for one cluster with the
/// decays held fixed, on the window (start, end] of every history. Events
/// before the window are ignored, so each window is treated as a fresh
/// sequence. No-op when the weights sum to zero.
inline void m_step_em(ClusterParams& cluster, std::span<const std::vector<Event>> histories,
                      std::span<const double> weights, double start, double end,
                      std::size_t iterations = 1, const ParameterBounds& bounds = {}) {
  if (histories.size() != weights.size()) throw ValidationError("one weight per history expected");
  if (!(end > start)) return;
  const std::size_t p = cluster.num_types();
  const double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total_weight > 0.0)) return;

  for (std::size_t it = 0; it < iterations; ++it) {
    std::vector<double> mu_num(p, 0.0);
    Grid<double> a_num(p, p, 0.0);
    Grid<double> a_den(p, p, 0.0);
    Grid<double> sums(p, p, 0.0);
    for (std::size_t n = 0; n < histories.size(); ++n) {
      const double w = weights[n];
      if (w == 0.0) continue;
      const auto& h = histories[n];
      auto first = start > 0.0
                       ? std::upper_bound(h.begin(), h.end(), start,
                                          [](double s, const Event& e) { return s < e.time; })
                       : h.begin();
      auto last = std::upper_bound(first, h.end(), end,
                                   [](double s, const Event& e) { return s < e.time; });
      sums.fill(0.0);
      double now = start;
      for (auto i = first; i != last;) {
        const double t = i->time;
        if (t > now) {
          for (std::size_t q = 0; q < p; ++q) {
            for (std::size_t r = 0; r < p; ++r) sums(q, r) *= std::exp(-cluster.decay(q, r) * (t - now));
          }
          now = t;
        }
        auto j = i;
        while (j != last && j->time == t) ++j;
        for (auto k = i; k != j; ++k) {
          const std::size_t r = k->type;
          double lambda = cluster.base_rates[r];
          for (std::size_t q = 0; q < p; ++q) lambda += cluster.amplitude(q, r) * sums(q, r);
          if (!(lambda > 0.0)) throw NumericError("non-positive intensity in EM step");
          mu_num[r] += w * cluster.base_rates[r] / lambda;
          for (std::size_t q = 0; q < p; ++q) {
            a_num(q, r) += w * cluster.amplitude(q, r) * sums(q, r) / lambda;
          }
        }
        for (auto k = i; k != j; ++k) {
          for (std::size_t r = 0; r < p; ++r) sums(k->type, r) += 1.0;
          for (std::size_t r = 0; r < p; ++r) {
            const double b = cluster.decay(k->type, r);
            a_den(k->type, r) += w * -std::expm1(-b * (end - t)) / b;
          }
        }
        i = j;
      }
    }
    for (std::size_t r = 0; r < p; ++r) {
      cluster.base_rates[r] =
          std::max(mu_num[r] / (total_weight * (end - start)), bounds.min_base_rate);
      for (std::size_t q = 0; q < p; ++q) {
        if (a_den(q, r) > 0.0) cluster.kernels(q, r).amplitude = a_num(q, r) / a_den(q, r);
      }
    }
  }
}

/// log R += terms (K x N); alpha_n = softmax(log pi + log R(., n)); pi = mean alpha.
inline void e_step_update(Grid<double>& alpha, Grid<double>& log_evidence, std::vector<double>& prior,
                          const Grid<double>& terms) {
  const std::size_t k_count = log_evidence.rows();
  const std::size_t n_count = log_evidence.cols();
  if (terms.rows() != k_count || terms.cols() != n_count || alpha.rows() != n_count ||
      alpha.cols() != k_count || prior.size() != k_count) {
    throw ValidationError("E-step dimensions disagree");
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    log_evidence.values()[i] += terms.values()[i];
    if (!std::isfinite(log_evidence.values()[i])) throw NumericError("non-finite log evidence");
  }
  std::vector<double> logits(k_count);
  for (std::size_t n = 0; n < n_count; ++n) {
    for (std::size_t k = 0; k < k_count; ++k) {
      logits[k] = prior[k] > 0.0 ? std::log(prior[k]) + log_evidence(k, n)
                                 : -std::numeric_limits<double>::infinity();
    }
    softmax_in_place(logits);
    for (std::size_t k = 0; k < k_count; ++k) alpha(n, k) = logits[k];
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    double s = 0.0;
    for (std::size_t n = 0; n < n_count; ++n) s += alpha(n, k);
    prior[k] = s / static_cast<double>(n_count);
  }
}

/// sum_n sum_k alpha_nk (log R(k, n) + log pi_k - log alpha_nk), with 0 log 0 = 0.
[[nodiscard]] inline double elbo(const Grid<double>& alpha, const Grid<double>& log_evidence,
                                 std::span<const double> prior) {
  double out = 0.0;
  for (std::size_t n = 0; n < alpha.rows(); ++n) {
    for (std::size_t k = 0; k < alpha.cols(); ++k) {
      const double a = alpha(n, k);
      if (a == 0.0) continue;
      out += a * (log_evidence(k, n) + std::log(prior[k]) - std::log(a));
    }
  }
  return out;
}

/// argmax_k alpha_nk, lowest index on ties.
[[nodiscard]] inline std::vector<std::size_t> hard_assignments(const Grid<double>& alpha) {
  std::vector<std::size_t> out(alpha.rows(), 0);
  for (std::size_t n = 0; n < alpha.rows(); ++n) {
    for (std::size_t k = 1; k < alpha.cols(); ++k) {
      if (alpha(n, k) > alpha(n, out[n])) out[n] = k;
    }
  }
  return out;
}

/// Starting parameters from the first interval. Cluster k takes the per-type
/// rates of the sequence at quantile (k + 0.5) / K of first-interval activity,
/// each scaled by an independent factor in [1 - jitter, 1 + jitter]. Types the
/// chosen sequence did not emit fall back to the pooled rate, then to half an
/// event per interval. a = 0.1 b / P and b = the configured initial decay.
[[nodiscard]] inline MixtureModel initial_model(const LearnerConfig& config,
                                                const IntervalBatch& first, Rng& rng) {
  const std::size_t k_count = config.num_clusters;
  const std::size_t p = config.num_types;
  const std::size_t n_count = first.events.size();
  if (n_count == 0) throw ValidationError("no sequences");
  const double len = first.length();
  const Grid<std::size_t> counts = first.counts(p);

  std::vector<std::size_t> totals(n_count, 0);
  std::vector<double> pooled(p, 0.0);
  for (std::size_t n = 0; n < n_count; ++n) {
    for (std::size_t r = 0; r < p; ++r) {
      totals[n] += counts(n, r);
      pooled[r] += static_cast<double>(counts(n, r)) / (len * static_cast<double>(n_count));
    }
  }
  std::vector<std::size_t> order(n_count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return totals[x] < totals[y]; });

  MixtureModel model;
  model.prior.assign(k_count, 1.0 / static_cast<double>(k_count));
  const double b = config.initial_decay;
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto pos = static_cast<std::size_t>((static_cast<double>(k) + 0.5) /
                                              static_cast<double>(k_count) *
                                              static_cast<double>(n_count));
    const std::size_t n = order[std::min(pos, n_count - 1)];
    ClusterParams c = ClusterParams::uniform(p, 0.0, 0.1 * b / static_cast<double>(p), b);
    for (std::size_t r = 0; r < p; ++r) {
      double rate = static_cast<double>(counts(n, r)) / len;
      if (rate == 0.0) rate = pooled[r];
      if (rate == 0.0) rate = 0.5 / len;
      const double factor = 1.0 + config.rate_jitter * (2.0 * rng.uniform() - 1.0);
      c.base_rates[r] = std::max(rate * factor, config.bounds.min_base_rate);
    }
    model.clusters.push_back(std::move(c));
  }
  return model;
}

/// Uniform responsibilities with multiplicative jitter, renormalized.
[[nodiscard]] inline Grid<double> initial_responsibilities(std::size_t num_sequences,
                                                           std::size_t num_clusters, double jitter,
                                                           Rng& rng) {
  Grid<double> alpha(num_sequences, num_clusters, 0.0);
  for (std::size_t n = 0; n < num_sequences; ++n) {
    double s = 0.0;
    for (std::size_t k = 0; k < num_clusters; ++k) {
      alpha(n, k) = 1.0 + jitter * (2.0 * rng.uniform() - 1.0);
      s += alpha(n, k);
    }
    for (std::size_t k = 0; k < num_clusters; ++k) alpha(n, k) /= s;
  }
  return alpha;
}

/// What the learner saw of one interval: per-sequence counts, and for every
/// (sequence, cluster) pair the kernel sums and intensities at the interval
/// end under the parameters of the previous interval.
struct IntervalObservation {
  std::size_t index = 0;
  double length = 0.0;
  Grid<std::size_t> counts;               // N x P
  Grid<KernelSums> sums;                  // N x K
  Grid<std::vector<double>> intensities;  // N x K, length P
  Grid<double> log_terms;                 // K x N

  [[nodiscard]] std::vector<UnitInterval> units(std::size_t cluster,
                                                std::span<const double> weights) const {
    std::vector<UnitInterval> out(counts.rows());
    for (std::size_t n = 0; n < out.size(); ++n) {
      out[n] = {counts.row(n), intensities(n, cluster), &sums(n, cluster), weights[n]};
    }
    return out;
  }
};

struct LearnerState {
  MixtureModel model;
  Grid<double> alpha;         // N x K responsibilities
  Grid<double> log_evidence;  // K x N, log R^t(k, n)
  Grid<DecayState> decay_states;  // N x K
  std::size_t interval_index = 0;
  StepSchedule schedule;
  MStepStrategy m_step = MStepStrategy::sgd;
};

/// The online learner, one interval at a time. For interval t: intensities under
/// Theta(t-1); E-step updates log R, alpha and pi; the SGD M-step ascends the
/// interval objective weighted by alpha(t-1); the EM M-step refits the buffer
/// with alpha(t).
class OnlineLearner {
 public:
  /// Parameters and responsibilities are initialized from the first batch.
  OnlineLearner(LearnerConfig config, std::size_t num_sequences)
      : config_(std::move(config)), num_sequences_(num_sequences) {
    config_.validate();
    if (num_sequences == 0) throw ValidationError("no sequences");
  }

  /// Explicit starting point; log R starts at zero.
  OnlineLearner(LearnerConfig config, MixtureModel initial, Grid<double> initial_alpha)
      : config_(std::move(config)), num_sequences_(initial_alpha.rows()) {
    config_.validate();
    initial.validate();
    if (num_sequences_ == 0) throw ValidationError("no sequences");
    if (initial.num_clusters() != config_.num_clusters || initial.num_types() != config_.num_types ||
        initial_alpha.cols() != config_.num_clusters) {
      throw ValidationError("initial model does not match the configuration");
    }
    start(std::move(initial), std::move(initial_alpha));
  }

  [[nodiscard]] const LearnerConfig& config() const noexcept { return config_; }
  [[nodiscard]] const LearnerState& state() const noexcept { return state_; }
  [[nodiscard]] bool initialized() const noexcept { return initialized_; }
  [[nodiscard]] const IntervalObservation& last_observation() const noexcept { return last_; }
  [[nodiscard]] double elbo() const {
    return ommhp::elbo(state_.alpha, state_.log_evidence, state_.model.prior);
  }
  [[nodiscard]] std::vector<std::size_t> assignments() const {
    return hard_assignments(state_.alpha);
  }

  void step(const IntervalBatch& batch) {
    if (!initialized_) {
      if (batch.index != 1) throw SequencingError("the first batch must be interval 1");
      if (batch.events.size() != num_sequences_) throw ValidationError("batch has wrong sequence count");
      Rng rng(substream_seed(config_.seed, 0));
      MixtureModel model = initial_model(config_, batch, rng);
      Grid<double> alpha = initial_responsibilities(num_sequences_, config_.num_clusters,
                                                    config_.alpha_jitter, rng);
      start(std::move(model), std::move(alpha));
    }
    if (batch.index != state_.interval_index + 1) {
      throw SequencingError("expected interval " + std::to_string(state_.interval_index + 1) +
                            ", got " + std::to_string(batch.index));
    }
    if (batch.events.size() != num_sequences_) throw ValidationError("batch has wrong sequence count");

    observe(batch);
    const Grid<double> previous_alpha = state_.alpha;
    e_step_update(state_.alpha, state_.log_evidence, state_.model.prior, last_.log_terms);

    for (std::size_t n = 0; n < num_sequences_; ++n) {
      const auto& events = batch.events[n];
      history_[n].insert(history_[n].end(), events.begin(), events.end());
      for (std::size_t k = 0; k < config_.num_clusters; ++k) {
        state_.decay_states(n, k).absorb(events, batch.end);
      }
    }

    if (config_.m_step == MStepStrategy::sgd) {
      m_step_sgd(previous_alpha, state_.schedule.rate(batch.index));
    } else {
      m_step_em(batch.end);
    }
    state_.interval_index = batch.index;
  }

 private:
  void start(MixtureModel model, Grid<double> alpha) {
    const std::size_t k_count = config_.num_clusters;
    state_.model = std::move(model);
    state_.alpha = std::move(alpha);
    state_.log_evidence = Grid<double>(k_count, num_sequences_, 0.0);
    state_.decay_states = Grid<DecayState>(num_sequences_, k_count);
    for (std::size_t n = 0; n < num_sequences_; ++n) {
      for (std::size_t k = 0; k < k_count; ++k) {
        state_.decay_states(n, k) = DecayState(state_.model.clusters[k]);
      }
    }
    state_.interval_index = 0;
    state_.schedule = config_.schedule;
    state_.m_step = config_.m_step;
    history_.assign(num_sequences_, {});
    initialized_ = true;
  }

  void observe(const IntervalBatch& batch) {
    const std::size_t k_count = config_.num_clusters;
    last_.index = batch.index;
    last_.length = batch.length();
    last_.counts = batch.counts(config_.num_types);
    last_.sums = Grid<KernelSums>(num_sequences_, k_count);
    last_.intensities = Grid<std::vector<double>>(num_sequences_, k_count);
    last_.log_terms = Grid<double>(k_count, num_sequences_, 0.0);
    for (std::size_t n = 0; n < num_sequences_; ++n) {
      for (std::size_t k = 0; k < k_count; ++k) {
        const ClusterParams& cluster = state_.model.clusters[k];
        DecayState& ds = state_.decay_states(n, k);
        if (!ds.built_for(cluster)) ds = DecayState::from_history(cluster, history_[n], batch.start);
        last_.sums(n, k) = ds.sums_at(batch.end);
        last_.intensities(n, k) = intensities_from_sums(cluster, last_.sums(n, k));
        last_.log_terms(k, n) =
            interval_log_term(last_.counts.row(n), last_.intensities(n, k), last_.length);
      }
    }
  }

  void m_step_sgd(const Grid<double>& weights_alpha, double eta) {
    const StepOptions options{config_.preconditioner, config_.decay_mode, config_.bounds};
    std::vector<double> weights(num_sequences_);
    for (std::size_t k = 0; k < config_.num_clusters; ++k) {
      for (std::size_t n = 0; n < num_sequences_; ++n) weights[n] = weights_alpha(n, k);
      ClusterParams& cluster = state_.model.clusters[k];
      const auto units = last_.units(k, weights);
      apply_gradient_step(cluster, cluster_gradient(cluster, last_.length, units), eta, options);
    }
  }

  void m_step_em(double now) {
    const double begin = config_.em.window > 0.0 ? std::max(0.0, now - config_.em.window) : 0.0;
    std::vector<double> weights(num_sequences_);
    for (std::size_t k = 0; k < config_.num_clusters; ++k) {
      for (std::size_t n = 0; n < num_sequences_; ++n) weights[n] = state_.alpha(n, k);
      ommhp::m_step_em(state_.model.clusters[k], history_, weights, begin, now,
                       config_.em.iterations, config_.bounds);
    }
  }

  LearnerConfig config_;
  std::size_t num_sequences_ = 0;
  bool initialized_ = false;
  LearnerState state_;
  IntervalObservation last_;
  std::vector<std::vector<Event>> history_;
};

struct TrajectoryRecord {
  std::size_t interval = 0;
  double elbo = 0.0;
  std::vector<double> prior;
  std::vector<double> relerr_mu;  // per true cluster, after alignment
  std::vector<double> relerr_a;
  std::optional<Grid<double>> alpha;
};

struct FitTrajectory {
  std::vector<TrajectoryRecord> records;
};

struct FitResult {
  FitTrajectory trajectory;
  LearnerState state;
  std::vector<std::size_t> assignments;
};

namespace detail {

/// Rethrows the active library exception with the interval index prepended,
/// keeping its category.
[[noreturn]] inline void rethrow_at_interval(std::size_t interval) {
  const std::string prefix = "interval " + std::to_string(interval) + ": ";
  try {
    throw;
  } catch (const SequencingError& e) {
    throw SequencingError(prefix + e.what());
  } catch (const IndexError& e) {
    throw IndexError(prefix + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const ResourceError& e) {
    throw ResourceError(prefix + e.what());
  }
}

}  // namespace detail

/// Runs the learner over every interval of `sequences`. When `truth` is given
/// (one entry per cluster) each record carries aligned relative errors.
[[nodiscard]] inline FitResult fit_online(std::span<const EventSequence> sequences,
                                          const LearnerConfig& config,
                                          std::span<const ClusterParams> truth = {}) {
  config.validate();
  if (sequences.empty()) throw ValidationError("no sequences");
  if (!truth.empty() && truth.size() != config.num_clusters) {
    throw ValidationError("ground truth must have one entry per cluster");
  }
  for (const EventSequence& s : sequences) s.validate(config.num_types);

  IntervalStream stream(sequences, config.delta);
  OnlineLearner learner(config, sequences.size());
  FitResult out;
  out.trajectory.records.reserve(stream.grid().count());
  while (!stream.done()) {
    const std::size_t t = stream.next_index();
    try {
      learner.step(stream.next());
    } catch (const Error&) {
      detail::rethrow_at_interval(t);
    }
    TrajectoryRecord rec;
    rec.interval = t;
    rec.elbo = learner.elbo();
    rec.prior = learner.state().model.prior;
    if (!truth.empty()) {
      const auto& clusters = learner.state().model.clusters;
      const auto perm = align_clusters(clusters, truth);
      for (std::size_t i = 0; i < truth.size(); ++i) {
        const BlockErrors e = relative_param_error(clusters[perm[i]], truth[i]);
        rec.relerr_mu.push_back(e.base_rates);
        rec.relerr_a.push_back(e.amplitudes);
      }
    }
    if (config.snapshot_every > 0 && t % config.snapshot_every == 0) {
      rec.alpha = learner.state().alpha;
    }
    out.trajectory.records.push_back(std::move(rec));
  }
  out.state = learner.state();
  out.assignments = learner.assignments();
  return out;
}

}  // namespace ommhp
