#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <ommhp/hawkes_model.hpp>

#include "support/instances.hpp"

using namespace ommhp;
using testing_support::random_cluster;
using testing_support::random_sequence;

namespace {

// Trapezoid integral of the intensity between events, where it is smooth.
double compensator_by_quadrature(const EventSequence& s, const ClusterParams& c) {
  std::vector<double> knots{0.0};
  for (const Event& e : s.events) knots.push_back(e.time);
  knots.push_back(s.horizon);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double lo = knots[i];
    const double hi = knots[i + 1];
    if (hi <= lo) continue;
    constexpr int kSteps = 2000;
    const double h = (hi - lo) / kSteps;
    for (std::size_t p = 0; p < c.num_types(); ++p) {
      // evaluate just inside (lo, hi] so the event at lo is already history
      auto f = [&](double t) { return intensity(c, s.events, p, t); };
      double sum = 0.5 * (f(lo + 1e-12 * (hi - lo)) + f(hi));
      for (int k = 1; k < kSteps; ++k) sum += f(lo + k * h);
      total += sum * h;
    }
  }
  return total;
}

}  // namespace

TEST(Intensity, NoHistoryIsBaseRate) {
  const auto c = ClusterParams::with_shared_decay({0.3, 0.2}, {{0.2, 0.1}, {0.1, 0.2}}, 3.1);
  EXPECT_DOUBLE_EQ(intensity(c, {}, 0, 5.0), 0.3);
  EXPECT_DOUBLE_EQ(intensity(c, {}, 1, 5.0), 0.2);
}

TEST(Intensity, HandComputedExcitation) {
  const auto c = ClusterParams::with_shared_decay({0.3, 0.2}, {{0.2, 0.1}, {0.1, 0.2}}, 3.1);
  const std::vector<Event> h{{1.0, 0}, {2.0, 1}};
  EXPECT_NEAR(intensity(c, h, 0, 3.0), 0.3 + 0.2 * std::exp(-6.2) + 0.1 * std::exp(-3.1), 1e-15);
  EXPECT_NEAR(intensity(c, h, 1, 3.0), 0.2 + 0.1 * std::exp(-6.2) + 0.2 * std::exp(-3.1), 1e-15);
}

TEST(Intensity, OnlyStrictPastCounts) {
  const auto c = ClusterParams::uniform(1, 0.5, 1.0, 1.0);
  const std::vector<Event> h{{1.0, 0}, {2.0, 0}};
  EXPECT_NEAR(intensity(c, h, 0, 2.0), 0.5 + std::exp(-1.0), 1e-15);
}

TEST(Intensity, RejectsBadTargetType) {
  const auto c = ClusterParams::uniform(2, 0.5, 0.1, 1.0);
  EXPECT_THROW((void)intensity(c, {}, 2, 1.0), IndexError);
}

TEST(ContinuousLikelihood, PoissonClosedForm) {
  const auto c = ClusterParams::uniform(1, 0.7, 0.0, 1.0);
  EventSequence s{{{1.0, 0}, {2.5, 0}, {4.0, 0}}, 10.0};
  EXPECT_NEAR(hp_log_likelihood_continuous(s, c), 3.0 * std::log(0.7) - 7.0, 1e-12);
}

TEST(ContinuousLikelihood, MatchesQuadratureOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t p = 1 + trial % 2;
    const auto c = random_cluster(rng, p);
    const auto s = random_sequence(rng, p, 12, 20.0);
    double log_terms = 0.0;
    for (const Event& e : s.events) log_terms += std::log(intensity(c, s.events, e.type, e.time));
    const double expected = log_terms - compensator_by_quadrature(s, c);
    EXPECT_NEAR(hp_log_likelihood_continuous(s, c), expected, 1e-5 * std::abs(expected)) << trial;
  }
}

TEST(ContinuousLikelihood, SimultaneousEventsDoNotExciteEachOther) {
  const auto c = ClusterParams::uniform(1, 0.5, 1.0, 2.0);
  EventSequence s{{{1.0, 0}, {1.0, 0}}, 3.0};
  const double comp = 0.5 * 3.0 + 2.0 * (1.0 / 2.0) * (1.0 - std::exp(-4.0));
  EXPECT_NEAR(hp_log_likelihood_continuous(s, c), 2.0 * std::log(0.5) - comp, 1e-12);
}

TEST(DiscretizedLikelihood, MatchesDirectEvaluation) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t p = 1 + trial % 2;
    const auto c = random_cluster(rng, p);
    const auto s = random_sequence(rng, p, 30, 20.0, trial % 3 == 0);
    const double delta = trial % 2 == 0 ? 2.0 : 3.0;  // 3 leaves a truncated last interval
    const IntervalGrid grid(delta, s.horizon);
    double expected = 0.0;
    for (std::size_t tau = 1; tau <= grid.count(); ++tau) {
      std::vector<Event> history;
      std::vector<double> x(p, 0.0);
      for (const Event& e : s.events) {
        if (e.time <= grid.start(tau)) history.push_back(e);
        else if (e.time <= grid.end(tau)) x[e.type] += 1.0;
      }
      for (std::size_t r = 0; r < p; ++r) {
        const double lambda = intensity(c, history, r, grid.end(tau));
        expected += x[r] * std::log(lambda) - grid.length(tau) * lambda;
      }
    }
    EXPECT_NEAR(hp_log_likelihood_discretized(s, c, delta), expected, 1e-9 * std::abs(expected))
        << trial;
  }
}

TEST(DiscretizedLikelihood, TruncatedFinalIntervalUsesItsLength) {
  const auto c = ClusterParams::uniform(1, 0.5, 0.0, 1.0);
  EventSequence s{{}, 10.0};
  EXPECT_EQ(IntervalGrid(3.0, 10.0).count(), 4u);
  EXPECT_NEAR(hp_log_likelihood_discretized(s, c, 3.0), -5.0, 1e-12);
}

TEST(DiscretizedLikelihood, ApproachesContinuousAsDeltaShrinks) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto c = random_cluster(rng, 2, 0.6, true);
    const auto s = simulate_hawkes(c, 100.0, 100 + trial);
    const double cont = hp_log_likelihood_continuous(s, c);
    const double coarse = std::abs(hp_log_likelihood_discretized(s, c, 5.0) - cont);
    const double fine = std::abs(hp_log_likelihood_discretized(s, c, 0.01) - cont);
    EXPECT_LT(fine, coarse) << trial;
    EXPECT_LT(fine, 0.05 * std::abs(cont)) << trial;
  }
}

TEST(MixtureLikelihood, SingleClusterIsClusterLikelihood) {
  const std::vector<double> ll{-12.5};
  const std::vector<double> prior{1.0};
  EXPECT_DOUBLE_EQ(mixture_log_likelihood(ll, prior), -12.5);
}

TEST(MixtureLikelihood, StableForLargeNegativeValues) {
  const std::vector<double> ll{-10000.0, -10002.0};
  const std::vector<double> prior{0.5, 0.5};
  const double expected = -10000.0 + std::log(0.5 * (1.0 + std::exp(-2.0)));
  EXPECT_NEAR(mixture_log_likelihood(ll, prior), expected, 1e-9);
}

TEST(MixtureLikelihood, ZeroPriorComponentIsIgnored) {
  const std::vector<double> ll{-3.0, 100.0};
  const std::vector<double> prior{1.0, 0.0};
  EXPECT_DOUBLE_EQ(mixture_log_likelihood(ll, prior), -3.0);
}

TEST(MixtureLikelihood, DiscretizedMixtureCombinesClusters) {
  Rng rng(9);
  const MixtureModel m{{random_cluster(rng, 2), random_cluster(rng, 2)}, {0.3, 0.7}};
  const auto s = random_sequence(rng, 2, 25, 30.0);
  const double l0 = hp_log_likelihood_discretized(s, m.clusters[0], 2.0);
  const double l1 = hp_log_likelihood_discretized(s, m.clusters[1], 2.0);
  EXPECT_NEAR(mixture_log_likelihood_discretized(s, m, 2.0),
              std::log(0.3 * std::exp(l0) + 0.7 * std::exp(l1)), 1e-9);
}

TEST(LogSumExp, EmptyAndInfinite) {
  EXPECT_EQ(log_sum_exp({}), -std::numeric_limits<double>::infinity());
  const std::vector<double> x{-std::numeric_limits<double>::infinity(), 0.0};
  EXPECT_DOUBLE_EQ(log_sum_exp(x), 0.0);
}

TEST(Intensity, SingleEventExample) {
  const auto c = ClusterParams::uniform(1, 0.3, 0.2, 3.1);
  EXPECT_NEAR(intensity(c, std::vector<Event>{{0.0, 0}}, 0, 1.0), 0.3 + 0.2 * std::exp(-3.1), 1e-15);
  EXPECT_NEAR(intensity(c, std::vector<Event>{{0.0, 0}}, 0, 1.0), 0.309010, 1e-6);
}

TEST(ContinuousLikelihood, ConstantRateExamples) {
  const auto c = ClusterParams::uniform(1, 0.5, 0.0, 1.0);
  EXPECT_NEAR(hp_log_likelihood_continuous(EventSequence{{}, 10.0}, c), -5.0, 1e-12);
  EXPECT_NEAR(hp_log_likelihood_continuous(EventSequence{{{2.0, 0}}, 10.0}, c), -5.693147, 1e-6);
}

TEST(DiscretizedLikelihood, SingleIntervalExamples) {
  const auto c = ClusterParams::uniform(1, 0.5, 0.0, 1.0);
  EXPECT_NEAR(hp_log_likelihood_discretized(EventSequence{{}, 25.0}, c, 25.0), -12.5, 1e-12);
  EXPECT_NEAR(hp_log_likelihood_discretized(EventSequence{{{0.2, 0}, {0.7, 0}}, 1.0}, c, 1.0),
              -1.886294, 1e-6);
}

TEST(MixtureLikelihood, IdenticalClustersGiveClusterValue) {
  Rng rng(2);
  const auto c = random_cluster(rng, 2);
  const MixtureModel m{{c, c}, {0.5, 0.5}};
  const auto s = random_sequence(rng, 2, 20, 20.0);
  EXPECT_NEAR(mixture_log_likelihood_discretized(s, m, 2.0), hp_log_likelihood_discretized(s, c, 2.0),
              1e-10);
}

TEST(Softmax, ExactForEqualInputsAtAnyScale) {
  std::vector<double> x{-1e6, -1e6};
  softmax_in_place(x);
  EXPECT_EQ(x[0], 0.5);
  EXPECT_EQ(x[1], 0.5);
  std::vector<double> y{-10.0, -12.0};
  softmax_in_place(y);
  EXPECT_NEAR(y[0], 0.880797, 1e-6);
  std::vector<double> z{-std::numeric_limits<double>::infinity()};
  EXPECT_THROW(softmax_in_place(z), NumericError);
}
