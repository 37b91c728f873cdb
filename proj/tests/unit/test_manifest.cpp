#include <gtest/gtest.h>

#include <algorithm>

#include "camseer/dataset.hpp"
#include "camseer/error.hpp"
#include "camseer/synth.hpp"
#include "fixtures.hpp"

using namespace camseer;
using namespace camseer::dataset;

namespace {

synth::SynthConfig small_synth() {
  synth::SynthConfig c;
  c.duration_s = 150.0;
  c.num_events = 5;
  return c;
}

struct Written {
  fixtures::TempDir dir;
  std::vector<std::filesystem::path> paths;
};

std::unique_ptr<Written> write_corpus(std::size_t n) {
  auto w = std::make_unique<Written>();
  const auto recs = fixtures::synthetic_corpus(n, small_synth(), 100);
  for (const auto& r : recs) {
    w->paths.push_back(w->dir / (r.id + ".csv"));
    save_recording(w->paths.back(), r);
  }
  return w;
}

std::vector<SegmentKey> keys(const SegmentStore& store, const std::vector<LabeledSegment>& v) {
  std::vector<SegmentKey> out;
  for (const auto& s : v) out.push_back(key_of(store, s));
  return out;
}

}  // namespace

TEST(Prepare, BalancedHeldOutSplitsAndCounts) {
  const auto w = write_corpus(6);
  PrepareConfig cfg;
  const auto ds = prepare_dataset(w->paths, cfg);
  EXPECT_EQ(ds.manifest.total_positive, 30u);
  const auto pos = std::count_if(ds.splits.test.begin(), ds.splits.test.end(), [](auto& s) { return s.label == 1; });
  EXPECT_EQ(static_cast<std::size_t>(pos) * 2, ds.splits.test.size());
  EXPECT_EQ(ds.splits.test.size(), 2 * fraction_count(0.15, 30));
  EXPECT_EQ(ds.splits.validation.size(), 2 * fraction_count(0.15, 30 - fraction_count(0.15, 30)));
  EXPECT_GT(ds.manifest.total_negative, 50 * ds.manifest.total_positive);
  for (const auto& r : ds.manifest.recordings) EXPECT_EQ(r.digest.size(), 64u);
}

TEST(Prepare, ManifestJsonRoundTrip) {
  const auto w = write_corpus(4);
  const auto ds = prepare_dataset(w->paths, PrepareConfig{});
  const auto j = ds.manifest.to_json();
  const auto back = DatasetManifest::from_json(j);
  EXPECT_EQ(io::dump(back.to_json()), io::dump(j));
  EXPECT_EQ(back.position_filter.b, ds.manifest.position_filter.b);
  EXPECT_EQ(back.velocity_filter.a, ds.manifest.velocity_filter.a);
  for (std::size_t c = 0; c < kFeatureWidth; ++c) {
    EXPECT_EQ(back.norm_stats[c].mean, ds.manifest.norm_stats[c].mean);
    EXPECT_EQ(back.norm_stats[c].std, ds.manifest.norm_stats[c].std);
  }
  EXPECT_EQ(back.test, ds.manifest.test);
}

TEST(Prepare, ManifestReconstructsSplits) {
  const auto w = write_corpus(4);
  const auto ds = prepare_dataset(w->paths, PrepareConfig{});
  const auto re = load_prepared(DatasetManifest::from_json(ds.manifest.to_json()));
  EXPECT_EQ(keys(*re.store, re.splits.test), keys(*ds.store, ds.splits.test));
  EXPECT_EQ(keys(*re.store, re.splits.validation), keys(*ds.store, ds.splits.validation));
  EXPECT_EQ(keys(*re.store, re.splits.train_pool_neg), keys(*ds.store, ds.splits.train_pool_neg));
  const auto a = ds.store->window(ds.splits.test.front());
  const auto b = re.store->window(re.splits.test.front());
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
}

TEST(Prepare, TamperedRecordingIsRejected) {
  const auto w = write_corpus(3);
  const auto ds = prepare_dataset(w->paths, PrepareConfig{});
  auto text = io::read_text(w->paths[1]);
  text[text.size() - 3] = text[text.size() - 3] == '1' ? '2' : '1';
  io::write_atomic(w->paths[1], text);
  try {
    load_prepared(ds.manifest);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Format);
  }
}

TEST(Prepare, DeterministicForSameSeed) {
  const auto recs = fixtures::synthetic_corpus(3, small_synth(), 5);
  const auto a = prepare_dataset(recs, PrepareConfig{});
  const auto b = prepare_dataset(recs, PrepareConfig{});
  EXPECT_EQ(io::dump(a.manifest.to_json()), io::dump(b.manifest.to_json()));
}

TEST(Prepare, GuardBelowHorizonIsRejected) {
  const auto recs = fixtures::synthetic_corpus(2, small_synth(), 5);
  PrepareConfig cfg;
  cfg.horizon = 50;
  cfg.guard = 25;
  EXPECT_THROW(prepare_dataset(recs, cfg), Error);
}

TEST(Prepare, OtherHorizonKeepsHeldOutChunks) {
  const auto recs = fixtures::synthetic_corpus(5, small_synth(), 7);
  const auto base = prepare_dataset(recs, PrepareConfig{});
  for (std::size_t h : {12u, 25u, 50u}) {
    const auto ds = with_horizon(base, h);
    EXPECT_EQ(ds.splits.test.size(), base.splits.test.size());
    for (std::size_t i = 0; i < ds.splits.test.size(); ++i) {
      const auto& s = ds.splits.test[i];
      EXPECT_EQ(s.horizon, h);
      if (s.label) {
        const auto& m = ds.store->matrix(s.matrix);
        EXPECT_EQ(s.end_row + 1 + h, m.rows());
      }
    }
    EXPECT_EQ(ds.manifest.config.horizon, h);
  }
}

TEST(Prepare, OtherSegmentLength) {
  const auto recs = fixtures::synthetic_corpus(5, small_synth(), 7);
  const auto base = prepare_dataset(recs, PrepareConfig{});
  const auto ds = with_segment_length(base, 25);
  EXPECT_EQ(ds.manifest.config.segment_length, 25u);
  for (const auto& s : ds.segments) EXPECT_EQ(s.length, 25u);
  EXPECT_EQ(ds.manifest.total_positive, base.manifest.total_positive);
  EXPECT_GT(ds.manifest.total_negative, base.manifest.total_negative);
}

TEST(SegmentArchive, RoundTripAndHeader) {
  const auto recs = fixtures::synthetic_corpus(3, small_synth(), 11);
  const auto ds = prepare_dataset(recs, PrepareConfig{});
  const auto bytes = encode_segment_archive(*ds.store, ds.splits.test);
  ASSERT_GE(bytes.size(), 32u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "CSEG");
  EXPECT_EQ(bytes.size(), 32 + ds.splits.test.size() * 50 * 21 * 8);
  const auto a = decode_segment_archive(bytes);
  EXPECT_EQ(a.length, 50u);
  EXPECT_EQ(a.width, 21u);
  EXPECT_EQ(a.count, ds.splits.test.size());
  for (std::size_t i = 0; i < a.count; ++i) {
    const auto w = ds.store->window(ds.splits.test[i]);
    EXPECT_TRUE(std::equal(w.begin(), w.end(), a.values.begin() + static_cast<std::ptrdiff_t>(i * w.size())));
  }
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_segment_archive(bad), Error);
  bad = bytes;
  bad.push_back(0);
  EXPECT_THROW(decode_segment_archive(bad), Error);
  bad = bytes;
  bad.resize(bytes.size() - 8);
  EXPECT_THROW(decode_segment_archive(bad), Error);
}
