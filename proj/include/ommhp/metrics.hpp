#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "types.hpp"

namespace ommhp {

namespace detail {

inline double pairs(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace detail

/// Adjusted Rand index from the pair-counting contingency table. When the
/// expected and maximum index coincide (both partitions trivial) the formula
/// is 0/0; the result is then 1 for equivalent partitions and 0 otherwise.
template <typename LabelsA, typename LabelsB>
[[nodiscard]] double adjusted_rand_index(const LabelsA& a, const LabelsB& b) {
  const auto n = static_cast<std::size_t>(std::size(a));
  if (n != static_cast<std::size_t>(std::size(b))) {
    throw ValidationError("partitions have different lengths");
  }
  if (n < 2) throw ValidationError("adjusted Rand index needs at least two elements");

  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> joint;
  std::map<std::int64_t, std::size_t> rows;
  std::map<std::int64_t, std::size_t> cols;
  auto ia = std::begin(a);
  auto ib = std::begin(b);
  for (; ia != std::end(a); ++ia, ++ib) {
    const auto la = static_cast<std::int64_t>(*ia);
    const auto lb = static_cast<std::int64_t>(*ib);
    ++joint[{la, lb}];
    ++rows[la];
    ++cols[lb];
  }

  double index = 0.0;
  for (const auto& [key, count] : joint) index += detail::pairs(static_cast<double>(count));
  double row_sum = 0.0;
  for (const auto& [key, count] : rows) row_sum += detail::pairs(static_cast<double>(count));
  double col_sum = 0.0;
  for (const auto& [key, count] : cols) col_sum += detail::pairs(static_cast<double>(count));

  const double expected = row_sum * col_sum / detail::pairs(static_cast<double>(n));
  const double maximum = 0.5 * (row_sum + col_sum);
  if (maximum == expected) return index == row_sum && index == col_sum ? 1.0 : 0.0;
  return (index - expected) / (maximum - expected);
}

struct BlockErrors {
  double base_rates = 0.0;
  double amplitudes = 0.0;
  std::optional<double> decays;
};

/// Relative l2 error of the base rates and relative Frobenius error of the
/// amplitude (and optionally decay) matrices.
[[nodiscard]] inline BlockErrors relative_param_error(const ClusterParams& estimate,
                                                      const ClusterParams& truth,
                                                      bool include_decays = false) {
  const std::size_t p = truth.num_types();
  if (estimate.num_types() != p || estimate.kernels.rows() != p || truth.kernels.rows() != p) {
    throw ValidationError("parameter dimensions differ");
  }
  auto ratio = [](double diff2, double norm2, const char* block) {
    if (!(norm2 > 0.0)) {
      throw ValidationError(std::string("true ") + block + " block has zero norm");
    }
    return std::sqrt(diff2 / norm2);
  };

  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    diff += std::pow(estimate.base_rates[i] - truth.base_rates[i], 2);
    norm += truth.base_rates[i] * truth.base_rates[i];
  }
  BlockErrors out;
  out.base_rates = ratio(diff, norm, "base-rate");

  diff = norm = 0.0;
  double diff_b = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < truth.kernels.size(); ++i) {
    const KernelParams& e = estimate.kernels.values()[i];
    const KernelParams& t = truth.kernels.values()[i];
    diff += std::pow(e.amplitude - t.amplitude, 2);
    norm += t.amplitude * t.amplitude;
    diff_b += std::pow(e.decay - t.decay, 2);
    norm_b += t.decay * t.decay;
  }
  out.amplitudes = ratio(diff, norm, "amplitude");
  if (include_decays) out.decays = ratio(diff_b, norm_b, "decay");
  return out;
}

/// Minimum-cost perfect matching on a square cost matrix: result[row] = col.
/// Exhaustive search up to 8 x 8 (ties resolve to the lexicographically first
/// permutation); Hungarian algorithm beyond that.
[[nodiscard]] inline std::vector<std::size_t> min_cost_assignment(const Grid<double>& cost) {
  const std::size_t n = cost.rows();
  if (cost.cols() != n) throw ValidationError("assignment cost matrix must be square");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  if (n <= 8) {
    std::vector<std::size_t> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i) c += cost(i, perm[i]);
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }

  // Hungarian algorithm with potentials, 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) perm[match[j] - 1] = j - 1;
  return perm;
}

/// Permutation mapping each true cluster i to the estimated cluster result[i]
/// that minimises the summed relative base-rate and amplitude errors.
[[nodiscard]] inline std::vector<std::size_t> align_clusters(std::span<const ClusterParams> estimated,
                                                             std::span<const ClusterParams> truth) {
  if (estimated.size() != truth.size()) throw ValidationError("cluster counts differ");
  Grid<double> cost(truth.size(), truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = 0; j < estimated.size(); ++j) {
      const BlockErrors e = relative_param_error(estimated[j], truth[i]);
      cost(i, j) = e.base_rates + e.amplitudes;
    }
  }
  return min_cost_assignment(cost);
}

/// Permutation mapping each true label i to the estimated label result[i]
/// that maximises agreement. Labels must be below `num_clusters`.
[[nodiscard]] inline std::vector<std::size_t> align_clusters(std::span<const std::size_t> assignments,
                                                             std::span<const std::size_t> truth,
                                                             std::size_t num_clusters) {
  if (assignments.size() != truth.size()) throw ValidationError("label lengths differ");
  Grid<double> cost(num_clusters, num_clusters, 0.0);
  for (std::size_t n = 0; n < truth.size(); ++n) {
    if (truth[n] >= num_clusters || assignments[n] >= num_clusters) {
      throw IndexError("label out of range");
    }
    cost(truth[n], assignments[n]) -= 1.0;
  }
  return min_cost_assignment(cost);
}

}  // namespace ommhp
