#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "random.hpp"
#include "types.hpp"

namespace ommhp {

struct StationarityReport {
  double spectral_radius = 0.0;
  bool stable = true;
};

/// Spectral radius of the branching matrix [a_qp / b_qp]; the process is
/// stationary when it is below one.
[[nodiscard]] inline StationarityReport stationarity_check(const ClusterParams& cluster) {
  cluster.validate();
  const auto p = static_cast<Eigen::Index>(cluster.num_types());
  Eigen::MatrixXd branching(p, p);
  for (Eigen::Index q = 0; q < p; ++q) {
    for (Eigen::Index r = 0; r < p; ++r) {
      const KernelParams& k = cluster.kernels(static_cast<std::size_t>(q), static_cast<std::size_t>(r));
      branching(q, r) = k.amplitude / k.decay;
    }
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(branching, false);
  const double radius = solver.eigenvalues().cwiseAbs().maxCoeff();
  return {radius, radius < 1.0};
}

struct SimulationOptions {
  std::size_t max_events = 10'000'000;
};

/// One sample path on [0, horizon] by Ogata thinning. Between events the
/// intensity of an exponential-kernel process only decays, so the total
/// intensity just after the latest point bounds it until the next point.
[[nodiscard]] inline EventSequence simulate_hawkes(const ClusterParams& cluster, double horizon,
                                                   std::uint64_t seed,
                                                   const SimulationOptions& options = {}) {
  cluster.validate();
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("horizon must be positive");
  }
  const std::size_t p = cluster.num_types();
  Rng rng(seed);
  EventSequence seq;
  seq.horizon = horizon;

  Grid<double> excitation(p, p, 0.0);  // a_qp-weighted exponential sums
  std::vector<double> lambda(p);
  double t = 0.0;
  for (;;) {
    double bound = 0.0;
    for (std::size_t r = 0; r < p; ++r) {
      bound += cluster.base_rates[r];
      for (std::size_t q = 0; q < p; ++q) bound += excitation(q, r);
    }
    const double wait = rng.exponential(bound);
    t += wait;
    if (t > horizon) break;

    double total = 0.0;
    for (std::size_t r = 0; r < p; ++r) {
      lambda[r] = cluster.base_rates[r];
      for (std::size_t q = 0; q < p; ++q) {
        excitation(q, r) *= std::exp(-cluster.decay(q, r) * wait);
        lambda[r] += excitation(q, r);
      }
      total += lambda[r];
    }

    const double u = rng.uniform() * bound;
    if (u >= total) continue;
    // u is uniform on [0, total) given acceptance; reuse it to pick the type
    std::size_t type = 0;
    double cumulative = lambda[0];
    while (type + 1 < p && u >= cumulative) cumulative += lambda[++type];

    if (seq.events.size() >= options.max_events) {
      throw ResourceError("simulation exceeded " + std::to_string(options.max_events) +
                          " events; parameters are likely explosive");
    }
    seq.events.push_back({t, type});
    for (std::size_t r = 0; r < p; ++r) excitation(type, r) += cluster.amplitude(type, r);
  }
  return seq;
}

struct MixtureScenario {
  std::vector<ClusterParams> clusters;
  std::size_t sequences_per_cluster = 10;
  double horizon = 1000.0;
  std::uint64_t seed = 0;
};

/// n sequences per cluster, cluster-major: sequence k * n + i comes from
/// cluster k and is driven by RNG substream k * n + i of the scenario seed.
[[nodiscard]] inline LabeledDataset simulate_mixture(const MixtureScenario& scenario,
                                                     const SimulationOptions& options = {}) {
  if (scenario.clusters.empty()) throw ValidationError("scenario has no clusters");
  if (scenario.sequences_per_cluster == 0) {
    throw ValidationError("sequences_per_cluster must be at least 1");
  }
  if (!(scenario.horizon > 0.0)) throw ValidationError("horizon must be positive");
  const std::size_t n = scenario.sequences_per_cluster;
  LabeledDataset out;
  for (std::size_t k = 0; k < scenario.clusters.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t index = k * n + i;
      out.ids.push_back("s" + std::to_string(index));
      out.sequences.push_back(simulate_hawkes(scenario.clusters[k], scenario.horizon,
                                              substream_seed(scenario.seed, index), options));
      out.labels.push_back(k);
    }
  }
  return out;
}

}  // namespace ommhp
