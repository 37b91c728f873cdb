#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <unordered_set>

#include "camseer/dataset.hpp"
#include "camseer/error.hpp"

namespace camseer::dataset {

namespace {

std::uint64_t row_key(const LabeledSegment& s) { return (static_cast<std::uint64_t>(s.matrix) << 32) | s.end_row; }

// First k entries of `items` become a uniform random k-subset (partial Fisher-Yates).
template <typename T>
void draw_prefix(std::vector<T>& items, std::size_t k, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
    std::swap(items[i], items[pick(rng)]);
  }
}

}  // namespace

std::size_t fraction_count(double frac, std::size_t count) {
  const double x = frac * static_cast<double>(count);
  return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

std::vector<LabeledSegment> split_segments_by_label(std::span<const LabeledSegment> segments, int label) {
  std::vector<LabeledSegment> out;
  for (const auto& s : segments)
    if (s.label == label) out.push_back(s);
  return out;
}

DatasetSplits split_dataset(std::span<const LabeledSegment> segments, double test_frac, double val_frac,
                            std::uint64_t seed) {
  require(test_frac > 0.0 && test_frac < 1.0 && val_frac > 0.0 && val_frac < 1.0, ErrorKind::InvalidParameter,
          "split fractions must lie in (0, 1)");
  auto pos = split_segments_by_label(segments, 1);
  auto neg = split_segments_by_label(segments, 0);
  require(pos.size() >= 2, ErrorKind::InfeasibleSplit,
          "need at least 2 before-movement segments, found " + std::to_string(pos.size()));
  sort_segments(pos);
  sort_segments(neg);

  std::mt19937_64 rng(seed);
  const std::size_t n_test = fraction_count(test_frac, pos.size());
  const std::size_t n_val = fraction_count(val_frac, pos.size() - n_test);
  require(n_test >= 1 && n_val >= 1 && n_test + n_val <= pos.size(), ErrorKind::InfeasibleSplit,
          "too few before-movement segments for test and validation splits");
  require(neg.size() >= n_test + n_val, ErrorKind::InfeasibleSplit,
          "only " + std::to_string(neg.size()) + " not-before segments to balance " +
              std::to_string(n_test + n_val) + " held-out positives");

  draw_prefix(pos, n_test, rng);
  draw_prefix(neg, n_test, rng);

  DatasetSplits out;
  out.seed = seed;
  out.test.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.test.insert(out.test.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(n_test));

  std::vector<LabeledSegment> pos_rest(pos.begin() + static_cast<std::ptrdiff_t>(n_test), pos.end());
  std::vector<LabeledSegment> neg_rest(neg.begin() + static_cast<std::ptrdiff_t>(n_test), neg.end());
  draw_prefix(pos_rest, n_val, rng);
  draw_prefix(neg_rest, n_val, rng);
  out.validation.assign(pos_rest.begin(), pos_rest.begin() + static_cast<std::ptrdiff_t>(n_val));
  out.validation.insert(out.validation.end(), neg_rest.begin(), neg_rest.begin() + static_cast<std::ptrdiff_t>(n_val));

  out.train_pool_pos.assign(pos_rest.begin() + static_cast<std::ptrdiff_t>(n_val), pos_rest.end());
  out.train_pool_neg.assign(neg_rest.begin() + static_cast<std::ptrdiff_t>(n_val), neg_rest.end());

  sort_segments(out.test);
  sort_segments(out.validation);
  sort_segments(out.train_pool_pos);
  sort_segments(out.train_pool_neg);
  return out;
}

DatasetSplits group_guard_filter(const DatasetSplits& splits, std::size_t min_gap) {
  if (min_gap == 0) return splits;
  std::map<std::uint32_t, std::vector<std::int64_t>> held;
  for (const auto* list : {&splits.test, &splits.validation})
    for (const auto& s : *list) held[s.matrix].push_back(s.end_offset);
  for (auto& [_, ends] : held) std::sort(ends.begin(), ends.end());

  const auto gap = static_cast<std::int64_t>(min_gap);
  auto near_held = [&](const LabeledSegment& s) {
    auto it = held.find(s.matrix);
    if (it == held.end()) return false;
    const auto& ends = it->second;
    auto lo = std::lower_bound(ends.begin(), ends.end(), s.end_offset - gap + 1);
    return lo != ends.end() && *lo < s.end_offset + gap;
  };

  DatasetSplits out = splits;
  std::erase_if(out.train_pool_pos, near_held);
  std::erase_if(out.train_pool_neg, near_held);
  return out;
}

DatasetSplits align_splits(const DatasetSplits& base, std::span<const LabeledSegment> segments) {
  std::map<std::uint32_t, LabeledSegment> pos_by_matrix;
  std::map<std::uint64_t, LabeledSegment> neg_by_row;
  for (const auto& s : segments) {
    if (s.label == 1)
      pos_by_matrix.emplace(s.matrix, s);
    else
      neg_by_row.emplace(row_key(s), s);
  }

  std::unordered_set<std::uint64_t> taken;
  auto remap = [&](const std::vector<LabeledSegment>& held) {
    std::vector<LabeledSegment> pos;
    std::vector<LabeledSegment> neg;
    for (const auto& s : held) {
      if (s.label == 1) {
        if (auto it = pos_by_matrix.find(s.matrix); it != pos_by_matrix.end()) pos.push_back(it->second);
      } else if (auto it = neg_by_row.find(row_key(s)); it != neg_by_row.end()) {
        neg.push_back(it->second);
      }
    }
    const std::size_t keep = std::min(pos.size(), neg.size());
    pos.resize(keep);
    neg.resize(keep);
    pos.insert(pos.end(), neg.begin(), neg.end());
    sort_segments(pos);
    for (const auto& s : pos) taken.insert(row_key(s));
    return pos;
  };

  DatasetSplits out;
  out.seed = base.seed;
  out.test = remap(base.test);
  out.validation = remap(base.validation);
  require(!out.test.empty() && !out.validation.empty(), ErrorKind::InfeasibleSplit,
          "held-out splits have no counterpart at this horizon");

  for (const auto& s : segments) {
    if (taken.contains(row_key(s))) continue;
    (s.label == 1 ? out.train_pool_pos : out.train_pool_neg).push_back(s);
  }
  sort_segments(out.train_pool_pos);
  sort_segments(out.train_pool_neg);
  return out;
}

}  // namespace camseer::dataset
