#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "camseer/io.hpp"
#include "camseer/signal.hpp"

namespace camseer::dataset {

inline constexpr std::size_t kNumInstruments = 3;
inline constexpr std::size_t kFeaturesPerInstrument = 7;
inline constexpr std::size_t kFeatureWidth = kNumInstruments * kFeaturesPerInstrument;

// p_ix, p_iy, p_iz, v_ix, v_iy, v_iz, g_i for i = 1..3.
std::string feature_name(std::size_t column);

struct InstrumentKinematics {
  std::array<signal::Series, 3> position;  // m, camera frame
  signal::Series gripper_angle;             // rad
};

struct KinematicRecording {
  std::string id;
  double dt = 0.02;
  std::vector<double> time;
  std::array<signal::Series, 3> camera_position;
  std::array<InstrumentKinematics, kNumInstruments> instruments;

  std::size_t size() const { return camera_position[0].size(); }
};

// CSV columns: t, cam_x, cam_y, cam_z, p1x, p1y, p1z, g1, p2x, ..., g3.
KinematicRecording load_recording(const std::filesystem::path& path);
std::string recording_to_csv(const KinematicRecording& rec);
void save_recording(const std::filesystem::path& path, const KinematicRecording& rec);

// Half-open sample range [start, end).
struct MovementInterval {
  std::int64_t start = 0;
  std::int64_t end = 0;

  std::int64_t length() const { return end - start; }
  bool operator==(const MovementInterval&) const = default;
};

struct DetectionConfig {
  double v_on = 0.005;   // m/s
  double v_off = 0.002;  // m/s
  double min_duration_s = 0.2;
  double merge_gap_s = 0.2;
  double smoothing_cutoff_hz = 5.0;
};

// Hysteresis thresholding of the smoothed camera speed: a run of samples at or
// above v_off is a movement when it contains a sample at or above v_on. Runs
// closer than merge_gap are merged, then runs shorter than min_duration dropped.
std::vector<MovementInterval> detect_camera_movements(const std::array<signal::Series, 3>& camera_position,
                                                      const DetectionConfig& cfg = {});

struct PreprocessConfig {
  double position_cutoff_hz = 5.0;
  double velocity_cutoff_hz = 8.0;
};

using ChannelStats = std::array<signal::NormStats, kFeatureWidth>;

// One stationary-camera chunk of a recording, T rows x width columns, row-major.
struct FeatureMatrix {
  std::string recording_id;
  std::size_t chunk_idx = 0;
  std::size_t width = kFeatureWidth;
  std::vector<double> values;
  std::vector<std::int64_t> global_offsets;
  // Set when the movement interval that ends this chunk starts at global_offsets.back() + 1.
  bool ends_at_onset = false;

  std::size_t rows() const { return global_offsets.size(); }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * width, width}; }
};

struct SkippedChunk {
  std::string recording_id;
  std::size_t chunk_idx = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;
};

struct FeatureBuild {
  std::vector<FeatureMatrix> matrices;
  ChannelStats stats{};
  std::vector<SkippedChunk> skipped;
};

// Maximal stationary ranges of [0, length) around the (sorted, disjoint) intervals.
std::vector<MovementInterval> stationary_chunks(std::int64_t length, std::span<const MovementInterval> intervals);

// Unnormalized per-chunk features: position filtered, differentiated, velocity
// filtered; gripper angle raw. Chunks shorter than the filter minimum are skipped.
FeatureBuild build_raw_features(const KinematicRecording& rec, std::span<const MovementInterval> intervals,
                                const PreprocessConfig& cfg = {});

// Per-column statistics over every row of every matrix.
ChannelStats fit_channel_stats(std::span<const FeatureMatrix> matrices);
void normalize(std::span<FeatureMatrix> matrices, const ChannelStats& stats);

// Full pipeline for one recording. With no stats given, they are fitted on
// this recording's stationary samples and returned.
FeatureBuild build_feature_matrices(const KinematicRecording& rec, std::span<const MovementInterval> intervals,
                                    const std::optional<ChannelStats>& stats, const PreprocessConfig& cfg = {});

struct LabeledSegment {
  std::uint32_t recording = 0;  // index into the owning store
  std::uint32_t matrix = 0;     // index into the owning store
  std::uint32_t chunk_idx = 0;
  std::uint32_t end_row = 0;    // row within the chunk
  std::int64_t end_offset = 0;  // recording sample index of the last row
  std::uint32_t length = 0;     // N
  std::uint32_t horizon = 0;
  std::uint8_t label = 0;

  std::uint32_t start_row() const { return end_row + 1 - length; }
};

// All feature matrices of a recording set plus the intervals they came from.
class SegmentStore {
 public:
  std::uint32_t add_recording(std::string id, std::vector<FeatureMatrix> matrices,
                              std::vector<MovementInterval> intervals);

  std::size_t num_recordings() const { return recordings_.size(); }
  std::size_t num_matrices() const { return matrices_.size(); }
  std::size_t width() const;

  const std::string& recording_id(std::uint32_t recording) const { return recordings_.at(recording).id; }
  std::span<const std::uint32_t> matrices_of(std::uint32_t recording) const {
    return recordings_.at(recording).matrices;
  }
  std::span<const MovementInterval> intervals_of(std::uint32_t recording) const {
    return recordings_.at(recording).intervals;
  }
  const FeatureMatrix& matrix(std::uint32_t index) const { return matrices_.at(index); }

  // Contiguous N x width window, row-major.
  std::span<const double> window(const LabeledSegment& seg) const;

 private:
  struct Recording {
    std::string id;
    std::vector<std::uint32_t> matrices;
    std::vector<MovementInterval> intervals;
  };
  std::vector<Recording> recordings_;
  std::vector<FeatureMatrix> matrices_;
};

// Candidate windows of one recording's chunks. Label 1: the window ends exactly
// `horizon` rows before the chunk's trailing onset. Label 0: it ends at least
// `guard` rows before that onset, or the chunk has none. Others are dropped.
std::vector<LabeledSegment> extract_segments(std::span<const FeatureMatrix> matrices,
                                             std::span<const MovementInterval> intervals, std::size_t length,
                                             std::size_t horizon, std::size_t guard,
                                             std::uint32_t recording_index = 0, std::uint32_t first_matrix = 0);

std::vector<LabeledSegment> extract_segments(const SegmentStore& store, std::size_t length, std::size_t horizon,
                                             std::size_t guard);

struct DatasetSplits {
  std::vector<LabeledSegment> test;
  std::vector<LabeledSegment> validation;
  std::vector<LabeledSegment> train_pool_pos;
  std::vector<LabeledSegment> train_pool_neg;
  std::uint64_t seed = 0;
};

// ceil(frac * count), robust to representation error in frac.
std::size_t fraction_count(double frac, std::size_t count);

std::vector<LabeledSegment> split_segments_by_label(std::span<const LabeledSegment> segments, int label);

DatasetSplits split_dataset(std::span<const LabeledSegment> segments, double test_frac, double val_frac,
                            std::uint64_t seed);

// Drops train-pool segments whose end lies within min_gap rows of a test or
// validation segment end in the same chunk.
DatasetSplits group_guard_filter(const DatasetSplits& splits, std::size_t min_gap);

// Re-expresses held-out splits for segments cut at another horizon: positives
// map by chunk, negatives by (chunk, end row). Unmappable positives are
// dropped together with one negative so balance is kept.
DatasetSplits align_splits(const DatasetSplits& base, std::span<const LabeledSegment> segments);

// Deterministic ordering used everywhere splits are materialized.
void sort_segments(std::vector<LabeledSegment>& segments);

struct SegmentKey {
  std::string recording_id;
  std::size_t chunk_idx = 0;
  std::int64_t end_offset = 0;
  int label = 0;
  bool operator==(const SegmentKey&) const = default;
};

struct RecordingEntry {
  std::string id;
  std::string path;
  std::string digest;
  std::size_t samples = 0;
};

struct PrepareConfig {
  DetectionConfig detection;
  PreprocessConfig preprocess;
  std::size_t segment_length = 50;
  std::size_t horizon = 0;
  std::size_t guard = 100;
  double test_frac = 0.15;
  double val_frac = 0.15;
  std::uint64_t seed = 1;
  std::size_t group_guard_gap = 0;  // 0 disables group_guard_filter
};

struct DatasetManifest {
  int version = 1;
  std::vector<RecordingEntry> recordings;
  PrepareConfig config;
  double dt = 0.02;
  signal::FilterCoefficients position_filter;
  signal::FilterCoefficients velocity_filter;
  ChannelStats norm_stats{};
  std::vector<SegmentKey> test;
  std::vector<SegmentKey> validation;
  std::size_t train_pool_pos = 0;
  std::size_t train_pool_neg = 0;
  std::size_t total_positive = 0;
  std::size_t total_negative = 0;

  io::json to_json() const;
  static DatasetManifest from_json(const io::json& j);
};

io::json stats_to_json(const ChannelStats& stats);
ChannelStats stats_from_json(const io::json& j);

struct PreparedDataset {
  std::shared_ptr<const SegmentStore> store;
  std::vector<LabeledSegment> segments;
  DatasetSplits splits;
  DatasetManifest manifest;
};

// detection -> features (stats fitted on all stationary samples of the set)
// -> segments -> splits. `paths` only feeds provenance and may be empty.
PreparedDataset prepare_dataset(std::span<const KinematicRecording> recordings, const PrepareConfig& cfg,
                                 std::span<const std::filesystem::path> paths = {});
PreparedDataset prepare_dataset(std::span<const std::filesystem::path> paths, const PrepareConfig& cfg);

// Rebuilds a dataset from its manifest and checks the recorded membership.
PreparedDataset load_prepared(const DatasetManifest& manifest);

// Same store and held-out recordings, segments cut at another horizon.
PreparedDataset with_horizon(const PreparedDataset& base, std::size_t horizon);
// Same store, different segment length; splits are re-drawn with the same seed.
PreparedDataset with_segment_length(const PreparedDataset& base, std::size_t length);

SegmentKey key_of(const SegmentStore& store, const LabeledSegment& seg);

// Optional cache of materialized segments: 32-byte header (magic "CSEG",
// version, N, width, count, reserved) then count * N * width little-endian doubles.
struct SegmentArchive {
  std::uint32_t version = 1;
  std::uint32_t length = 0;
  std::uint32_t width = kFeatureWidth;
  std::uint64_t count = 0;
  std::vector<double> values;
};

std::vector<std::uint8_t> encode_segment_archive(const SegmentStore& store, std::span<const LabeledSegment> segments);
SegmentArchive decode_segment_archive(std::span<const std::uint8_t> bytes);

}  // namespace camseer::dataset
