#pragma once

// Relative errors of the full-batch labeled MLE (tests/support/mle_oracle.hpp)
// on the two-process synthetic mixture, n = 10 per cluster, T = 1000, b = 3.1,
// simulated with d1_scenario(seed). Regenerated values must match to 1e-5
// relative (oracle_test checks this); the acceptance suite uses them as
// thresholds (x 3).

#include <array>
#include <cstdint>

namespace fixtures {

struct OracleErrors {
  double mu;
  double a;
};

struct OracleRow {
  std::uint64_t seed;
  std::array<OracleErrors, 2> clusters;  // indexed by true label
};

inline constexpr std::array<OracleRow, 10> kD1Oracle{{
    {1, {{{2.317714e-02, 1.893300e-01}, {9.131025e-03, 3.196436e-02}}}},
    {2, {{{7.054798e-03, 8.943680e-02}, {3.474050e-03, 4.493878e-02}}}},
    {3, {{{2.031688e-02, 4.356230e-02}, {1.178714e-02, 3.990486e-02}}}},
    {4, {{{5.813274e-03, 2.014576e-01}, {1.748529e-02, 4.121175e-02}}}},
    {5, {{{1.104272e-02, 1.506285e-01}, {1.091131e-02, 6.723213e-02}}}},
    {6, {{{2.168145e-02, 1.490769e-01}, {8.473470e-03, 5.925120e-02}}}},
    {7, {{{2.368606e-02, 1.006214e-01}, {2.811453e-03, 5.259936e-02}}}},
    {8, {{{2.893749e-02, 3.302793e-01}, {1.264490e-02, 4.513565e-02}}}},
    {9, {{{2.505303e-02, 2.231285e-01}, {9.091204e-03, 1.890714e-02}}}},
    {10, {{{1.001144e-02, 2.289401e-01}, {1.745927e-02, 6.063409e-02}}}},
}};

}  // namespace fixtures
