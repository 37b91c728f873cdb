#include <gtest/gtest.h>

#include <algorithm>

#include "camseer/dataset.hpp"
#include "camseer/error.hpp"
#include "fixtures.hpp"

using namespace camseer;
using namespace camseer::dataset;
using fixtures::make_chunk;

namespace {

struct Counts {
  std::size_t positives = 0, negatives = 0;
  std::vector<std::uint32_t> positive_ends;
};

Counts tally(const std::vector<LabeledSegment>& segs) {
  Counts c;
  for (const auto& s : segs) {
    if (s.label) {
      ++c.positives;
      c.positive_ends.push_back(s.end_row);
    } else {
      ++c.negatives;
    }
  }
  return c;
}

}  // namespace

TEST(Segments, WorkedExampleHorizonZero) {
  const std::vector<FeatureMatrix> m{make_chunk(300, 0)};
  const std::vector<MovementInterval> iv{{300, 350}};
  const auto segs = extract_segments(m, iv, 50, 0, 100);
  const auto c = tally(segs);
  EXPECT_EQ(c.positives, 1u);
  ASSERT_EQ(c.positive_ends.size(), 1u);
  EXPECT_EQ(c.positive_ends[0], 299u);
  EXPECT_EQ(c.negatives, 151u);
  std::vector<std::uint32_t> neg_ends;
  for (const auto& s : segs)
    if (!s.label) neg_ends.push_back(s.end_row);
  EXPECT_EQ(neg_ends.front(), 49u);
  EXPECT_EQ(neg_ends.back(), 199u);
  for (const auto& s : segs) EXPECT_EQ(s.start_row() + 49, s.end_row);
}

TEST(Segments, WorkedExampleHorizon25) {
  const std::vector<FeatureMatrix> m{make_chunk(300, 0)};
  const std::vector<MovementInterval> iv{{300, 350}};
  const auto c = tally(extract_segments(m, iv, 50, 25, 100));
  ASSERT_EQ(c.positive_ends.size(), 1u);
  EXPECT_EQ(c.positive_ends[0], 274u);
}

TEST(Segments, ChunkShorterThanWindowYieldsNothing) {
  const std::vector<FeatureMatrix> m{make_chunk(40, 0)};
  const std::vector<MovementInterval> iv{{40, 90}};
  EXPECT_TRUE(extract_segments(m, iv, 50, 0, 100).empty());
}

TEST(Segments, ChunkWithoutOnsetIsAllNegative) {
  const std::vector<FeatureMatrix> m{make_chunk(120, 500)};
  const std::vector<MovementInterval> iv{{400, 500}};  // precedes the chunk
  const auto c = tally(extract_segments(m, iv, 25, 0, 100));
  EXPECT_EQ(c.positives, 0u);
  EXPECT_EQ(c.negatives, 96u);
}

// Hand enumeration of every end row against the labelling rule.
TEST(Segments, GridMatchesEnumeration) {
  for (std::size_t rows : {30u, 100u, 260u, 400u}) {
    for (std::size_t n : {25u, 50u, 100u, 200u}) {
      for (std::size_t h : {0u, 12u, 25u, 50u}) {
        const std::size_t guard = std::max<std::size_t>(100, h);
        const std::vector<FeatureMatrix> m{make_chunk(rows, 1000)};
        const std::vector<MovementInterval> iv{{static_cast<std::int64_t>(1000 + rows), static_cast<std::int64_t>(1000 + rows + 40)}};
        const auto segs = extract_segments(m, iv, n, h, guard);

        std::vector<std::pair<std::uint32_t, int>> expected;
        for (std::size_t e = 0; e < rows; ++e) {
          if (e + 1 < n) continue;
          const std::size_t dist = rows - 1 - e;
          if (dist == h) expected.emplace_back(static_cast<std::uint32_t>(e), 1);
          else if (dist >= guard) expected.emplace_back(static_cast<std::uint32_t>(e), 0);
        }
        std::vector<std::pair<std::uint32_t, int>> got;
        for (const auto& s : segs) got.emplace_back(s.end_row, s.label);
        EXPECT_EQ(got, expected) << rows << " " << n << " " << h;

        const auto c = tally(segs);
        EXPECT_EQ(c.positives, rows >= n + h ? 1u : 0u);
        EXPECT_EQ(c.negatives, rows >= guard + n ? rows - guard - n + 1 : 0u);
        if (c.positives) {
          EXPECT_EQ(c.positive_ends[0], rows - 1 - h);
        }
        for (const auto& s : segs) {
          EXPECT_EQ(s.length, n);
          EXPECT_EQ(s.horizon, h);
          EXPECT_EQ(s.end_offset, 1000 + static_cast<std::int64_t>(s.end_row));
        }
      }
    }
  }
}

TEST(Segments, ConsecutiveWindowsOverlapByNMinusOne) {
  SegmentStore store;
  store.add_recording("r", {make_chunk(500, 0)}, {{500, 540}});
  for (std::size_t n : {25u, 50u, 100u, 200u}) {
    const auto segs = extract_segments(store, n, 0, 100);
    for (std::size_t i = 1; i < segs.size(); ++i) {
      if (segs[i].end_row != segs[i - 1].end_row + 1) continue;
      const auto a = store.window(segs[i - 1]), b = store.window(segs[i]);
      ASSERT_EQ(a.size(), n * 21);
      EXPECT_TRUE(std::equal(a.begin() + 21, a.end(), b.begin(), b.end() - 21));
      EXPECT_NE(a[0], b[0]);
    }
  }
}

TEST(Segments, RowsNeverComeFromMovements) {
  SegmentStore store;
  const std::vector<MovementInterval> iv{{200, 260}, {700, 720}};
  store.add_recording("r", {make_chunk(200, 0, 0), make_chunk(440, 260, 1), make_chunk(280, 720, 2)}, iv);
  const auto segs = extract_segments(store, 50, 12, 100);
  std::size_t positives = 0;
  for (const auto& s : segs) {
    positives += s.label;
    const auto& m = store.matrix(s.matrix);
    for (std::uint32_t r = s.start_row(); r <= s.end_row; ++r)
      for (const auto& i : iv) EXPECT_FALSE(m.global_offsets[r] >= i.start && m.global_offsets[r] < i.end);
  }
  EXPECT_EQ(positives, 2u);
}

TEST(Segments, GuardBelowHorizonIsRejected) {
  const std::vector<FeatureMatrix> m{make_chunk(300, 0)};
  EXPECT_THROW(extract_segments(m, {}, 50, 50, 25), Error);
  EXPECT_THROW(extract_segments(m, {}, 0, 0, 25), Error);
}

TEST(Segments, StationaryChunksComplementIntervals) {
  const std::vector<MovementInterval> iv{{0, 10}, {50, 60}, {90, 100}};
  const auto chunks = stationary_chunks(100, iv);
  EXPECT_EQ(chunks, (std::vector<MovementInterval>{{10, 50}, {60, 90}}));
  EXPECT_EQ(stationary_chunks(30, {}), (std::vector<MovementInterval>{{0, 30}}));
}
