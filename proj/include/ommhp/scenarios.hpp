#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "simulator.hpp"
#include "types.hpp"

namespace ommhp {

/// Shared decay of the synthetic benchmark processes.
inline constexpr double kSyntheticDecay = 3.1;

/// The three bivariate ground-truth processes of the synthetic benchmark.
[[nodiscard]] inline std::vector<ClusterParams> synthetic_processes(
    double decay = kSyntheticDecay) {
  return {
      ClusterParams::with_shared_decay({0.3, 0.2}, {{0.2, 0.1}, {0.1, 0.2}}, decay),
      ClusterParams::with_shared_decay({2.8, 1.6}, {{0.6, 0.2}, {0.2, 0.6}}, decay),
      ClusterParams::with_shared_decay({1.4, 0.8}, {{0.4, 0.0}, {0.0, 0.6}}, decay),
  };
}

/// Two-process mixture (first two processes).
[[nodiscard]] inline MixtureScenario d1_scenario(std::uint64_t seed, std::size_t n = 10,
                                                 double horizon = 1000.0) {
  auto processes = synthetic_processes();
  processes.pop_back();
  return {std::move(processes), n, horizon, seed};
}

/// Three-process mixture.
[[nodiscard]] inline MixtureScenario d2_scenario(std::uint64_t seed, std::size_t n = 10,
                                                 double horizon = 1000.0) {
  return {synthetic_processes(), n, horizon, seed};
}

/// Ground-truth clusters for scaling runs over (K, P). For P = 2 and K <= 3
/// these are the synthetic processes; otherwise a stable family with the same
/// rate scales.
[[nodiscard]] inline std::vector<ClusterParams> scaling_clusters(std::size_t num_clusters,
                                                                 std::size_t num_types,
                                                                 double decay = kSyntheticDecay) {
  if (num_clusters == 0 || num_types == 0) throw ValidationError("K and P must be positive");
  if (num_types == 2 && num_clusters <= 3) {
    auto processes = synthetic_processes(decay);
    processes.resize(num_clusters);
    return processes;
  }
  static constexpr double kScales[] = {0.3, 2.8, 1.4};
  std::vector<ClusterParams> out;
  for (std::size_t k = 0; k < num_clusters; ++k) {
    const double scale = k < 3 ? kScales[k] : 0.5 * static_cast<double>(k + 1);
    ClusterParams c = ClusterParams::uniform(num_types, scale, 0.0, decay);
    for (std::size_t p = 0; p < num_types; ++p) {
      c.base_rates[p] = scale * (1.0 - 0.25 * static_cast<double>(p) / static_cast<double>(num_types));
      for (std::size_t q = 0; q < num_types; ++q) {
        c.kernels(q, p).amplitude =
            q == p ? 0.2 + 0.2 * static_cast<double>(k % 3)
                   : 0.1 / static_cast<double>(num_types - 1);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace ommhp
