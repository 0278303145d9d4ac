#include <gtest/gtest.h>

#include <vector>

#include <ommhp/discretizer.hpp>

#include "support/instances.hpp"

using namespace ommhp;

TEST(IntervalGrid, EvenPartition) {
  const IntervalGrid g(25.0, 1000.0);
  EXPECT_EQ(g.count(), 40u);
  EXPECT_DOUBLE_EQ(g.start(1), 0.0);
  EXPECT_DOUBLE_EQ(g.end(40), 1000.0);
  EXPECT_DOUBLE_EQ(g.length(17), 25.0);
}

TEST(IntervalGrid, RoundingNoiseDoesNotAddAnInterval) {
  const IntervalGrid g(0.1, 1.0);
  EXPECT_EQ(g.count(), 10u);
  EXPECT_DOUBLE_EQ(g.end(10), 1.0);
}

TEST(IntervalGrid, TruncatedLastInterval) {
  const IntervalGrid g(3.0, 10.0);
  EXPECT_EQ(g.count(), 4u);
  EXPECT_DOUBLE_EQ(g.length(4), 1.0);
  EXPECT_DOUBLE_EQ(g.end(4), 10.0);
}

TEST(IntervalGrid, RightClosedMembership) {
  const IntervalGrid g(2.0, 10.0);
  EXPECT_EQ(g.interval_of(0.0), 1u);
  EXPECT_EQ(g.interval_of(2.0), 1u);
  EXPECT_EQ(g.interval_of(2.0000001), 2u);
  EXPECT_EQ(g.interval_of(10.0), 5u);
}

TEST(IntervalGrid, RejectsBadArguments) {
  EXPECT_THROW(IntervalGrid(0.0, 10.0), ValidationError);
  EXPECT_THROW(IntervalGrid(-1.0, 10.0), ValidationError);
  EXPECT_THROW(IntervalGrid(20.0, 10.0), ValidationError);
  EXPECT_THROW(IntervalGrid(1.0, 0.0), ValidationError);
}

TEST(BinCounts, MatchesBruteForce) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = testing_support::random_sequence(rng, 3, 60, 17.0, true);
    const auto x = bin_counts(s, 3, 2.5);
    EXPECT_EQ(x.total(), s.events.size());
    for (std::size_t tau = 1; tau <= x.num_intervals(); ++tau) {
      for (std::size_t p = 0; p < 3; ++p) {
        std::size_t n = 0;
        for (const Event& e : s.events) {
          const bool inside = tau == 1 ? e.time <= x.grid.end(1)
                                       : e.time > x.grid.start(tau) && e.time <= x.grid.end(tau);
          n += inside && e.type == p;
        }
        EXPECT_EQ(x.counts(tau - 1, p), n);
      }
    }
  }
}

TEST(BinCounts, RejectsBadEvents) {
  EventSequence s{{{1.0, 5}}, 10.0};
  EXPECT_THROW((void)bin_counts(s, 2, 1.0), IndexError);
  EventSequence late{{{11.0, 0}}, 10.0};
  EXPECT_THROW((void)bin_counts(late, 2, 1.0), ValidationError);
}

TEST(IntervalStream, BatchesReassembleTheSequences) {
  Rng rng(13);
  std::vector<EventSequence> seqs;
  for (int i = 0; i < 4; ++i) seqs.push_back(testing_support::random_sequence(rng, 2, 30, 12.0, true));
  const auto batches = collect_batches(seqs, 2.5);
  ASSERT_EQ(batches.size(), 5u);
  std::vector<std::vector<Event>> rebuilt(seqs.size());
  for (std::size_t i = 0; i < batches.size(); ++i) {
    EXPECT_EQ(batches[i].index, i + 1);
    for (std::size_t n = 0; n < seqs.size(); ++n) {
      for (const Event& e : batches[i].events[n]) {
        EXPECT_LE(e.time, batches[i].end);
        if (i > 0) {
          EXPECT_GT(e.time, batches[i].start);
        }
        rebuilt[n].push_back(e);
      }
    }
  }
  for (std::size_t n = 0; n < seqs.size(); ++n) EXPECT_EQ(rebuilt[n], seqs[n].events);
}

TEST(IntervalStream, SequencingAndValidation) {
  std::vector<EventSequence> seqs{{{{1.0, 0}}, 4.0}};
  IntervalStream stream(seqs, 2.0);
  (void)stream.next();
  (void)stream.next();
  EXPECT_TRUE(stream.done());
  EXPECT_THROW((void)stream.next(), SequencingError);

  std::vector<EventSequence> mixed{{{}, 4.0}, {{}, 5.0}};
  EXPECT_THROW(IntervalStream(mixed, 1.0), ValidationError);
  std::vector<EventSequence> none;
  EXPECT_THROW(IntervalStream(none, 1.0), ValidationError);
  std::vector<EventSequence> unsorted{{{{3.0, 0}, {1.0, 0}}, 4.0}};
  EXPECT_THROW((void)collect_batches(unsorted, 1.0), ValidationError);
}

TEST(IntervalBatch, CountsPerSequence) {
  IntervalBatch b{1, 0.0, 1.0, {{{0.5, 0}, {0.6, 1}, {0.7, 1}}, {}}};
  const auto x = b.counts(2);
  EXPECT_EQ(x(0, 0), 1u);
  EXPECT_EQ(x(0, 1), 2u);
  EXPECT_EQ(x(1, 1), 0u);
  EXPECT_THROW((void)b.counts(1), IndexError);
}

TEST(BinCounts, BoundaryExamples) {
  const EventSequence s{{{1.0, 0}, {2.0, 0}, {26.0, 0}}, 50.0};
  const auto x = bin_counts(s, 1, 25.0);
  EXPECT_EQ(x.counts(0, 0), 2u);
  EXPECT_EQ(x.counts(1, 0), 1u);
  const EventSequence edge{{{25.0, 0}}, 50.0};
  EXPECT_EQ(bin_counts(edge, 1, 25.0).counts(0, 0), 1u);
  EXPECT_EQ(bin_counts(EventSequence{{}, 50.0}, 2, 25.0).total(), 0u);
}

TEST(IntervalStream, WholeHorizonIsOneBatch) {
  Rng rng(4);
  std::vector<EventSequence> seqs{testing_support::random_sequence(rng, 2, 10, 8.0)};
  const auto batches = collect_batches(seqs, 8.0);
  ASSERT_EQ(batches.size(), 1u);
  EXPECT_EQ(batches[0].events[0], seqs[0].events);
  std::vector<EventSequence> long_seqs{{{}, 1000.0}};
  EXPECT_EQ(collect_batches(long_seqs, 25.0).size(), 40u);
}

TEST(IntervalStream, CountsAgreeWithBinning) {
  Rng rng(6);
  std::vector<EventSequence> seqs;
  for (int i = 0; i < 3; ++i) seqs.push_back(testing_support::random_sequence(rng, 2, 40, 20.0, true));
  const auto batches = collect_batches(seqs, 3.0);
  for (std::size_t n = 0; n < seqs.size(); ++n) {
    const auto x = bin_counts(seqs[n], 2, 3.0);
    for (std::size_t tau = 0; tau < batches.size(); ++tau) {
      const auto c = batches[tau].counts(2);
      for (std::size_t p = 0; p < 2; ++p) EXPECT_EQ(c(n, p), x.counts(tau, p));
    }
  }
}
