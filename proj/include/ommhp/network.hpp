#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "decay_state.hpp"
#include "discretizer.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "hawkes_model.hpp"
#include "learner.hpp"
#include "random.hpp"
#include "types.hpp"

namespace ommhp {

/// Directed edge source -> target.
struct Edge {
  std::size_t source = 0;
  std::size_t target = 0;

  auto operator<=>(const Edge&) const = default;
};

/// Events on the edges of a network; sequences[e] belongs to edges[e].
struct NetworkEventLog {
  std::size_t num_nodes = 0;
  std::vector<Edge> edges;
  std::vector<EventSequence> sequences;
  double horizon = 0.0;

  [[nodiscard]] std::size_t num_edges() const noexcept { return edges.size(); }

  void validate(std::size_t num_types) const {
    if (sequences.size() != edges.size()) throw ValidationError("one sequence per edge expected");
    std::set<Edge> seen;
    for (const Edge& e : edges) {
      if (e.source >= num_nodes || e.target >= num_nodes) throw IndexError("edge node out of range");
      if (!seen.insert(e).second) throw ValidationError("duplicate edge");
    }
    for (const EventSequence& s : sequences) {
      if (s.horizon != horizon) throw ValidationError("edge sequences have mixed horizons");
      s.validate(num_types);
    }
  }
};

/// Hawkes parameters per community pair; params(k1, k2) drives edges from a
/// node in community k1 to a node in community k2.
struct PairClusterModel {
  Grid<ClusterParams> params;
  Grid<double> prior;

  [[nodiscard]] std::size_t num_clusters() const noexcept { return params.rows(); }
  [[nodiscard]] std::size_t num_types() const noexcept {
    return params.empty() ? 0 : params.values().front().num_types();
  }

  void validate() const {
    const std::size_t k = num_clusters();
    if (k == 0 || params.cols() != k) throw ValidationError("pair model must be K x K");
    if (prior.rows() != k || prior.cols() != k) throw ValidationError("pair prior must be K x K");
    double total = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      params.values()[i].validate();
      if (params.values()[i].num_types() != num_types()) {
        throw ValidationError("pair blocks disagree on P");
      }
      if (!(prior.values()[i] >= 0.0)) throw ValidationError("prior entries must be nonnegative");
      total += prior.values()[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("pair prior must sum to one");
  }
};

/// mu_{k1,k2,p} + sum_{t_l < t} a_{k1,k2,p_l,p} exp(-b_{k1,k2,p_l,p} (t - t_l)).
[[nodiscard]] inline double network_intensity(const PairClusterModel& model,
                                              std::span<const Event> edge_history, std::size_t k1,
                                              std::size_t k2, std::size_t target_type, double t) {
  if (k1 >= model.num_clusters() || k2 >= model.num_clusters()) {
    throw IndexError("community index out of range");
  }
  return intensity(model.params(k1, k2), edge_history, target_type, t);
}

/// Identity grouping: every node has its own latent community variable.
[[nodiscard]] inline std::vector<std::size_t> untied_groups(std::size_t num_nodes) {
  std::vector<std::size_t> g(num_nodes);
  std::iota(g.begin(), g.end(), 0);
  return g;
}

[[nodiscard]] inline std::size_t group_count(std::span<const std::size_t> groups) {
  return groups.empty() ? 0 : *std::max_element(groups.begin(), groups.end()) + 1;
}

/// q(z_i = k1, z_j = k2) for an edge. Nodes sharing a group share one latent
/// variable, so an edge inside a group only has diagonal mass.
[[nodiscard]] inline Grid<double> pair_weights(const Grid<double>& alpha,
                                               std::span<const std::size_t> groups, const Edge& e) {
  const std::size_t k = alpha.cols();
  const std::size_t gi = groups[e.source];
  const std::size_t gj = groups[e.target];
  Grid<double> w(k, k, 0.0);
  for (std::size_t k1 = 0; k1 < k; ++k1) {
    if (gi == gj) {
      w(k1, k1) = alpha(gi, k1);
    } else {
      for (std::size_t k2 = 0; k2 < k; ++k2) w(k1, k2) = alpha(gi, k1) * alpha(gj, k2);
    }
  }
  return w;
}

/// Edge-sum ELBO:
///   sum_e sum_{k1,k2} w_e(k1,k2) (log R_e(k1,k2) + log pi_{k1,k2}) + entropy
/// where the entropy of an edge is that of its (one or two) latent variables.
[[nodiscard]] inline double network_elbo(const Grid<double>& alpha,
                                         std::span<const std::size_t> groups,
                                         std::span<const Edge> edges,
                                         std::span<const Grid<double>> log_evidence,
                                         const Grid<double>& prior) {
  if (log_evidence.size() != edges.size()) throw ValidationError("one accumulator per edge expected");
  auto entropy = [&](std::size_t g) {
    double h = 0.0;
    for (std::size_t k = 0; k < alpha.cols(); ++k) {
      if (alpha(g, k) > 0.0) h -= alpha(g, k) * std::log(alpha(g, k));
    }
    return h;
  };
  double out = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Grid<double> w = pair_weights(alpha, groups, edges[e]);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w.values()[i] == 0.0) continue;
      out += w.values()[i] * (log_evidence[e].values()[i] + std::log(prior.values()[i]));
    }
    const std::size_t gi = groups[edges[e].source];
    const std::size_t gj = groups[edges[e].target];
    out += gi == gj ? entropy(gi) : entropy(gi) + entropy(gj);
  }
  return out;
}

/// Coordinate ascent on the group responsibilities (ascending group index,
/// `sweeps` passes), then pi_{k1,k2} = sum_e w_e(k1,k2) / |A|. Each group
/// update is the exact maximizer of network_elbo over that row:
///   alpha_g propto exp(s_g / c_g)
/// with s_g the expected log evidence plus log prior over incident edges and
/// c_g the number of entropy terms the group appears in.
inline void network_e_step(Grid<double>& alpha, std::span<const std::size_t> groups,
                           std::span<const Edge> edges, std::span<const Grid<double>> log_evidence,
                           Grid<double>& prior, std::size_t sweeps = 1) {
  const std::size_t k = alpha.cols();
  const std::size_t num_groups = alpha.rows();
  if (log_evidence.size() != edges.size()) throw ValidationError("one accumulator per edge expected");
  if (edges.empty()) return;

  std::vector<std::vector<std::size_t>> incident(num_groups);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t gi = groups[edges[e].source];
    const std::size_t gj = groups[edges[e].target];
    incident[gi].push_back(e);
    if (gj != gi) incident[gj].push_back(e);
  }
  auto log_prior = [&](std::size_t k1, std::size_t k2) {
    return prior(k1, k2) > 0.0 ? std::log(prior(k1, k2)) : -std::numeric_limits<double>::infinity();
  };

  std::vector<double> s(k);
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t g = 0; g < num_groups; ++g) {
      if (incident[g].empty()) continue;
      std::fill(s.begin(), s.end(), 0.0);
      double c = 0.0;
      for (std::size_t e : incident[g]) {
        const Grid<double>& lr = log_evidence[e];
        const std::size_t gi = groups[edges[e].source];
        const std::size_t gj = groups[edges[e].target];
        if (gi == gj) {
          for (std::size_t k1 = 0; k1 < k; ++k1) s[k1] += lr(k1, k1) + log_prior(k1, k1);
          c += 1.0;
          continue;
        }
        if (gi == g) {
          for (std::size_t k1 = 0; k1 < k; ++k1) {
            for (std::size_t k2 = 0; k2 < k; ++k2) {
              const double w = alpha(gj, k2);
              if (w != 0.0) s[k1] += w * (lr(k1, k2) + log_prior(k1, k2));
            }
          }
        } else {
          for (std::size_t k2 = 0; k2 < k; ++k2) {
            for (std::size_t k1 = 0; k1 < k; ++k1) {
              const double w = alpha(gi, k1);
              if (w != 0.0) s[k2] += w * (lr(k1, k2) + log_prior(k1, k2));
            }
          }
        }
        c += 1.0;
      }
      for (double& v : s) {
        v /= c;
        if (std::isnan(v)) throw NumericError("non-finite network accumulator");
      }
      softmax_in_place(s);
      for (std::size_t k1 = 0; k1 < k; ++k1) alpha(g, k1) = s[k1];
    }
  }

  prior.fill(0.0);
  for (const Edge& e : edges) {
    const Grid<double> w = pair_weights(alpha, groups, e);
    for (std::size_t i = 0; i < w.size(); ++i) prior.values()[i] += w.values()[i];
  }
  for (double& v : prior.values()) v /= static_cast<double>(edges.size());
}

/// Sequence data embedded as a network: sequence n becomes the edge
/// (n, N + n) between a node and its duplicate, and the pair shares one
/// latent group, so the network learner reproduces the sequence learner.
struct ReducedNetwork {
  NetworkEventLog log;
  std::vector<std::size_t> groups;
};

[[nodiscard]] inline ReducedNetwork bipartite_reduction(std::span<const EventSequence> sequences) {
  ReducedNetwork out;
  const std::size_t n = sequences.size();
  out.log.num_nodes = 2 * n;
  out.log.horizon = n == 0 ? 0.0 : sequences.front().horizon;
  out.groups.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.log.edges.push_back({i, n + i});
    out.log.sequences.push_back(sequences[i]);
    out.groups[i] = i;
    out.groups[n + i] = i;
  }
  return out;
}

/// Pair model whose diagonal blocks are the given clusters and whose prior
/// is pi on the diagonal; off-diagonal blocks copy the first cluster.
[[nodiscard]] inline PairClusterModel diagonal_pair_model(const MixtureModel& mixture) {
  const std::size_t k = mixture.num_clusters();
  PairClusterModel out{Grid<ClusterParams>(k, k, mixture.clusters.front()), Grid<double>(k, k, 0.0)};
  for (std::size_t i = 0; i < k; ++i) {
    out.params(i, i) = mixture.clusters[i];
    out.prior(i, i) = mixture.prior[i];
  }
  return out;
}

struct NetworkConfig {
  LearnerConfig learner;
  std::size_t sweeps = 1;

  void validate() const {
    learner.validate();
    if (learner.m_step != MStepStrategy::sgd) {
      throw ValidationError("the network learner supports only the SGD M-step");
    }
    if (sweeps == 0) throw ValidationError("at least one coordinate sweep is required");
  }
};

/// Online learner over edges. Same interval protocol as OnlineLearner, with
/// units = edges and components = community pairs.
class NetworkLearner {
 public:
  NetworkLearner(NetworkConfig config, std::size_t num_nodes, std::vector<Edge> edges,
                 std::vector<std::size_t> groups = {})
      : config_(std::move(config)), num_nodes_(num_nodes), edges_(std::move(edges)),
        groups_(groups.empty() ? untied_groups(num_nodes) : std::move(groups)) {
    config_.validate();
    check_structure();
  }

  NetworkLearner(NetworkConfig config, std::size_t num_nodes, std::vector<Edge> edges,
                 std::vector<std::size_t> groups, PairClusterModel initial, Grid<double> initial_alpha)
      : NetworkLearner(std::move(config), num_nodes, std::move(edges), std::move(groups)) {
    initial.validate();
    if (initial.num_clusters() != config_.learner.num_clusters ||
        initial.num_types() != config_.learner.num_types ||
        initial_alpha.rows() != group_count(groups_) ||
        initial_alpha.cols() != config_.learner.num_clusters) {
      throw ValidationError("initial network model does not match the configuration");
    }
    start(std::move(initial), std::move(initial_alpha));
  }

  [[nodiscard]] const PairClusterModel& model() const noexcept { return model_; }
  [[nodiscard]] const Grid<double>& alpha() const noexcept { return alpha_; }
  [[nodiscard]] const std::vector<Grid<double>>& log_evidence() const noexcept { return log_r_; }
  [[nodiscard]] const std::vector<std::size_t>& groups() const noexcept { return groups_; }
  [[nodiscard]] std::size_t interval_index() const noexcept { return interval_; }
  [[nodiscard]] bool initialized() const noexcept { return initialized_; }

  [[nodiscard]] double elbo() const {
    return network_elbo(alpha_, groups_, edges_, log_r_, model_.prior);
  }

  /// Hard community per node (lowest index on ties).
  [[nodiscard]] std::vector<std::size_t> assignments() const {
    const auto per_group = hard_assignments(alpha_);
    std::vector<std::size_t> out(num_nodes_);
    for (std::size_t i = 0; i < num_nodes_; ++i) out[i] = per_group[groups_[i]];
    return out;
  }

  void step(const IntervalBatch& batch) {
    const LearnerConfig& lc = config_.learner;
    if (!initialized_) {
      if (batch.index != 1) throw SequencingError("the first batch must be interval 1");
      check_batch(batch);
      initialize(batch);
    }
    if (batch.index != interval_ + 1) {
      throw SequencingError("expected interval " + std::to_string(interval_ + 1) + ", got " +
                            std::to_string(batch.index));
    }
    check_batch(batch);

    const std::size_t k = lc.num_clusters;
    const std::size_t pairs = k * k;
    const double len = batch.length();
    const Grid<std::size_t> counts = batch.counts(lc.num_types);
    Grid<KernelSums> sums(edges_.size(), pairs);
    Grid<std::vector<double>> lambda(edges_.size(), pairs);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      for (std::size_t c = 0; c < pairs; ++c) {
        const ClusterParams& block = model_.params.values()[c];
        DecayState& ds = decay_(e, c);
        if (!ds.built_for(block)) ds = DecayState::from_history(block, history_[e], batch.start);
        sums(e, c) = ds.sums_at(batch.end);
        lambda(e, c) = intensities_from_sums(block, sums(e, c));
        log_r_[e].values()[c] += interval_log_term(counts.row(e), lambda(e, c), len);
        if (!std::isfinite(log_r_[e].values()[c])) throw NumericError("non-finite log evidence");
      }
    }

    std::vector<Grid<double>> previous(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) previous[e] = pair_weights(alpha_, groups_, edges_[e]);
    network_e_step(alpha_, groups_, edges_, log_r_, model_.prior, config_.sweeps);

    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto& events = batch.events[e];
      history_[e].insert(history_[e].end(), events.begin(), events.end());
      for (std::size_t c = 0; c < pairs; ++c) decay_(e, c).absorb(events, batch.end);
    }

    const StepOptions options{lc.preconditioner, lc.decay_mode, lc.bounds};
    const double eta = lc.schedule.rate(batch.index);
    std::vector<UnitInterval> units(edges_.size());
    for (std::size_t c = 0; c < pairs; ++c) {
      for (std::size_t e = 0; e < edges_.size(); ++e) {
        units[e] = {counts.row(e), lambda(e, c), &sums(e, c), previous[e].values()[c]};
      }
      ClusterParams& block = model_.params.values()[c];
      apply_gradient_step(block, cluster_gradient(block, len, units), eta, options);
    }
    interval_ = batch.index;
  }

 private:
  void check_structure() const {
    if (groups_.size() != num_nodes_) throw ValidationError("one group per node expected");
    std::set<Edge> seen;
    for (const Edge& e : edges_) {
      if (e.source >= num_nodes_ || e.target >= num_nodes_) throw IndexError("edge node out of range");
      if (!seen.insert(e).second) throw ValidationError("duplicate edge");
    }
  }

  void check_batch(const IntervalBatch& batch) const {
    if (batch.events.size() != edges_.size()) throw ValidationError("batch has wrong edge count");
  }

  /// Block (k1, k2) starts from the rates of the edge at quantile
  /// (k1 K + k2 + 0.5) / K^2 of first-interval activity, as in initial_model.
  void initialize(const IntervalBatch& first) {
    const LearnerConfig& lc = config_.learner;
    const std::size_t k = lc.num_clusters;
    LearnerConfig pairs_config = lc;
    pairs_config.num_clusters = k * k;
    Rng rng(substream_seed(lc.seed, 0));
    MixtureModel flat = edges_.empty()
                            ? MixtureModel{std::vector<ClusterParams>(
                                               k * k, ClusterParams::uniform(lc.num_types, 1.0, 0.0,
                                                                             lc.initial_decay)),
                                           std::vector<double>(k * k, 1.0 / double(k * k))}
                            : initial_model(pairs_config, first, rng);
    PairClusterModel model{Grid<ClusterParams>(k, k), Grid<double>(k, k, 1.0 / double(k * k))};
    for (std::size_t c = 0; c < k * k; ++c) model.params.values()[c] = flat.clusters[c];
    start(std::move(model),
          initial_responsibilities(group_count(groups_), k, lc.alpha_jitter, rng));
  }

  void start(PairClusterModel model, Grid<double> alpha) {
    const std::size_t pairs = model.params.size();
    model_ = std::move(model);
    alpha_ = std::move(alpha);
    log_r_.assign(edges_.size(), Grid<double>(model_.num_clusters(), model_.num_clusters(), 0.0));
    decay_ = Grid<DecayState>(edges_.size(), pairs);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      for (std::size_t c = 0; c < pairs; ++c) decay_(e, c) = DecayState(model_.params.values()[c]);
    }
    history_.assign(edges_.size(), {});
    interval_ = 0;
    initialized_ = true;
  }

  NetworkConfig config_;
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> groups_;
  bool initialized_ = false;
  PairClusterModel model_;
  Grid<double> alpha_;
  std::vector<Grid<double>> log_r_;
  Grid<DecayState> decay_;  // edges x K^2
  std::vector<std::vector<Event>> history_;
  std::size_t interval_ = 0;
};

struct NetworkTrajectoryRecord {
  std::size_t interval = 0;
  double elbo = 0.0;
  std::vector<double> prior;  // row-major K x K
};

struct NetworkFitResult {
  std::vector<NetworkTrajectoryRecord> records;
  PairClusterModel model;
  Grid<double> alpha;
  std::vector<std::size_t> assignments;  // per node
};

[[nodiscard]] inline NetworkFitResult fit_network(const NetworkEventLog& log,
                                                  const NetworkConfig& config,
                                                  std::vector<std::size_t> groups = {}) {
  config.validate();
  log.validate(config.learner.num_types);
  if (log.edges.empty()) throw ValidationError("no sequences");
  IntervalStream stream(log.sequences, config.learner.delta);
  NetworkLearner learner(config, log.num_nodes, log.edges, std::move(groups));
  NetworkFitResult out;
  while (!stream.done()) {
    const std::size_t t = stream.next_index();
    try {
      learner.step(stream.next());
    } catch (const Error&) {
      detail::rethrow_at_interval(t);
    }
    out.records.push_back({t, learner.elbo(), learner.model().prior.values()});
  }
  out.model = learner.model();
  out.alpha = learner.alpha();
  out.assignments = learner.assignments();
  return out;
}

}  // namespace ommhp
