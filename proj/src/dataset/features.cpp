#include <algorithm>

#include "camseer/dataset.hpp"
#include "camseer/error.hpp"

namespace camseer::dataset {

std::vector<MovementInterval> stationary_chunks(std::int64_t length, std::span<const MovementInterval> intervals) {
  std::vector<MovementInterval> chunks;
  std::int64_t cursor = 0;
  for (const auto& iv : intervals) {
    require(iv.start >= cursor && iv.start < iv.end && iv.end <= length, ErrorKind::ContractViolation,
            "movement intervals must be sorted, disjoint and inside the recording");
    if (iv.start > cursor) chunks.push_back({cursor, iv.start});
    cursor = iv.end;
  }
  if (cursor < length) chunks.push_back({cursor, length});
  return chunks;
}

FeatureBuild build_raw_features(const KinematicRecording& rec, std::span<const MovementInterval> intervals,
                                const PreprocessConfig& cfg) {
  const double fs = 1.0 / rec.dt;
  const auto pos_filter = signal::design_butterworth2(cfg.position_cutoff_hz, fs);
  const auto vel_filter = signal::design_butterworth2(cfg.velocity_cutoff_hz, fs);
  const auto n = static_cast<std::int64_t>(rec.size());

  FeatureBuild out;
  const auto chunks = stationary_chunks(n, intervals);
  for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
    const auto [start, end] = chunks[ci];
    const auto len = static_cast<std::size_t>(end - start);
    if (len < signal::kFiltfiltMinLength) {
      out.skipped.push_back({rec.id, ci, start, end});
      continue;
    }

    FeatureMatrix fm;
    fm.recording_id = rec.id;
    fm.chunk_idx = ci;
    fm.width = kFeatureWidth;
    fm.values.assign(len * kFeatureWidth, 0.0);
    fm.global_offsets.resize(len);
    for (std::size_t r = 0; r < len; ++r) fm.global_offsets[r] = start + static_cast<std::int64_t>(r);
    fm.ends_at_onset = std::any_of(intervals.begin(), intervals.end(),
                                   [end = end](const MovementInterval& iv) { return iv.start == end; });

    auto put_column = [&](std::size_t col, const std::vector<double>& v) {
      for (std::size_t r = 0; r < len; ++r) fm.values[r * kFeatureWidth + col] = v[r];
    };
    auto slice = [&](const signal::Series& s) {
      return signal::Series{std::vector<double>(s.values.begin() + start, s.values.begin() + end), rec.dt};
    };

    for (std::size_t i = 0; i < kNumInstruments; ++i) {
      const auto& inst = rec.instruments[i];
      const std::size_t base = i * kFeaturesPerInstrument;
      for (std::size_t a = 0; a < 3; ++a) {
        const auto pos = signal::filtfilt(pos_filter, slice(inst.position[a]));
        const auto vel = signal::filtfilt(vel_filter, signal::differentiate(pos));
        put_column(base + a, pos.values);
        put_column(base + 3 + a, vel.values);
      }
      put_column(base + 6, slice(inst.gripper_angle).values);
    }
    out.matrices.push_back(std::move(fm));
  }
  return out;
}

ChannelStats fit_channel_stats(std::span<const FeatureMatrix> matrices) {
  std::size_t total = 0;
  for (const auto& m : matrices) total += m.rows();
  require(total >= 2, ErrorKind::TooShortInput, "no stationary samples to fit normalization statistics");
  ChannelStats stats{};
  std::vector<double> column(total);
  for (std::size_t c = 0; c < kFeatureWidth; ++c) {
    std::size_t k = 0;
    for (const auto& m : matrices)
      for (std::size_t r = 0; r < m.rows(); ++r) column[k++] = m.values[r * m.width + c];
    stats[c] = signal::compute_norm_stats(column);
  }
  return stats;
}

void normalize(std::span<FeatureMatrix> matrices, const ChannelStats& stats) {
  for (auto& m : matrices) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double* row = m.values.data() + r * m.width;
      for (std::size_t c = 0; c < kFeatureWidth; ++c)
        row[c] = stats[c].degenerate ? 0.0 : (row[c] - stats[c].mean) / stats[c].std;
    }
  }
}

FeatureBuild build_feature_matrices(const KinematicRecording& rec, std::span<const MovementInterval> intervals,
                                    const std::optional<ChannelStats>& stats, const PreprocessConfig& cfg) {
  auto build = build_raw_features(rec, intervals, cfg);
  if (build.matrices.empty()) {
    if (stats) build.stats = *stats;
    return build;
  }
  build.stats = stats ? *stats : fit_channel_stats(build.matrices);
  normalize(build.matrices, build.stats);
  return build;
}

}  // namespace camseer::dataset
