#pragma once

// Small random instances shared by the test files.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <ommhp/random.hpp>
#include <ommhp/simulator.hpp>
#include <ommhp/types.hpp>

namespace testing_support {

inline double uniform(ommhp::Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

/// Random cluster with branching matrix row sums below `max_branching`.
inline ommhp::ClusterParams random_cluster(ommhp::Rng& rng, std::size_t p, double max_branching = 0.7,
                                           bool shared_decay = false) {
  ommhp::ClusterParams c = ommhp::ClusterParams::uniform(p, 1.0, 0.0, 1.0);
  const double shared = uniform(rng, 0.5, 3.0);
  for (std::size_t r = 0; r < p; ++r) c.base_rates[r] = uniform(rng, 0.1, 1.5);
  for (std::size_t q = 0; q < p; ++q) {
    for (std::size_t r = 0; r < p; ++r) {
      const double b = shared_decay ? shared : uniform(rng, 0.5, 3.0);
      const double ratio = uniform(rng, 0.0, max_branching / static_cast<double>(p));
      c.kernels(q, r) = {ratio * b, b};
    }
  }
  return c;
}

/// Sorted uniform events, possibly with repeated times.
inline ommhp::EventSequence random_sequence(ommhp::Rng& rng, std::size_t p, std::size_t count,
                                            double horizon, bool ties = false) {
  ommhp::EventSequence s;
  s.horizon = horizon;
  for (std::size_t i = 0; i < count; ++i) {
    double t = uniform(rng, 0.0, horizon);
    if (ties && i > 0 && rng.uniform() < 0.2) t = s.events[rng.next() % s.events.size()].time;
    s.events.push_back({t, static_cast<std::size_t>(rng.next() % p)});
  }
  std::stable_sort(s.events.begin(), s.events.end(),
                   [](const ommhp::Event& a, const ommhp::Event& b) { return a.time < b.time; });
  return s;
}

}  // namespace testing_support
