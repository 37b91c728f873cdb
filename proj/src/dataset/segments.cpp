#include <algorithm>

#include "camseer/dataset.hpp"
#include "camseer/error.hpp"

namespace camseer::dataset {

std::uint32_t SegmentStore::add_recording(std::string id, std::vector<FeatureMatrix> matrices,
                                          std::vector<MovementInterval> intervals) {
  Recording rec{std::move(id), {}, std::move(intervals)};
  for (auto& m : matrices) {
    require(matrices_.empty() || m.width == matrices_.front().width, ErrorKind::ContractViolation,
            "feature width differs between matrices");
    rec.matrices.push_back(static_cast<std::uint32_t>(matrices_.size()));
    matrices_.push_back(std::move(m));
  }
  recordings_.push_back(std::move(rec));
  return static_cast<std::uint32_t>(recordings_.size() - 1);
}

std::size_t SegmentStore::width() const { return matrices_.empty() ? kFeatureWidth : matrices_.front().width; }

std::span<const double> SegmentStore::window(const LabeledSegment& seg) const {
  const auto& m = matrices_.at(seg.matrix);
  require(seg.end_row < m.rows() && seg.length >= 1 && seg.end_row + 1 >= seg.length,
          ErrorKind::ContractViolation, "segment outside its chunk");
  return {m.values.data() + static_cast<std::size_t>(seg.start_row()) * m.width,
          static_cast<std::size_t>(seg.length) * m.width};
}

std::vector<LabeledSegment> extract_segments(std::span<const FeatureMatrix> matrices,
                                             std::span<const MovementInterval> intervals, std::size_t length,
                                             std::size_t horizon, std::size_t guard,
                                             std::uint32_t recording_index, std::uint32_t first_matrix) {
  require(length >= 1, ErrorKind::InvalidParameter, "segment length must be positive");
  require(guard >= horizon, ErrorKind::InvalidParameter, "guard must be at least the horizon");

  std::vector<LabeledSegment> out;
  for (std::size_t mi = 0; mi < matrices.size(); ++mi) {
    const auto& m = matrices[mi];
    const std::size_t rows = m.rows();
    if (rows < length) continue;
    const std::int64_t chunk_end = m.global_offsets.back() + 1;
    const bool has_onset =
        std::any_of(intervals.begin(), intervals.end(), [&](const MovementInterval& iv) { return iv.start == chunk_end; });

    for (std::size_t end_row = length - 1; end_row < rows; ++end_row) {
      const std::size_t distance = rows - 1 - end_row;  // rows between window end and chunk end
      int label = -1;
      if (!has_onset)
        label = 0;
      else if (distance == horizon)
        label = 1;
      else if (distance >= guard)
        label = 0;
      if (label < 0) continue;

      LabeledSegment s;
      s.recording = recording_index;
      s.matrix = first_matrix + static_cast<std::uint32_t>(mi);
      s.chunk_idx = static_cast<std::uint32_t>(m.chunk_idx);
      s.end_row = static_cast<std::uint32_t>(end_row);
      s.end_offset = m.global_offsets[end_row];
      s.length = static_cast<std::uint32_t>(length);
      s.horizon = static_cast<std::uint32_t>(horizon);
      s.label = static_cast<std::uint8_t>(label);
      out.push_back(s);
    }
  }
  return out;
}

std::vector<LabeledSegment> extract_segments(const SegmentStore& store, std::size_t length, std::size_t horizon,
                                             std::size_t guard) {
  std::vector<LabeledSegment> out;
  for (std::uint32_t r = 0; r < store.num_recordings(); ++r) {
    const auto ids = store.matrices_of(r);
    if (ids.empty()) continue;
    // Matrices of one recording are stored contiguously.
    const auto first = ids.front();
    const std::span<const FeatureMatrix> mats(&store.matrix(first), ids.size());
    auto segs = extract_segments(mats, store.intervals_of(r), length, horizon, guard, r, first);
    out.insert(out.end(), segs.begin(), segs.end());
  }
  return out;
}

SegmentKey key_of(const SegmentStore& store, const LabeledSegment& seg) {
  return {store.recording_id(seg.recording), seg.chunk_idx, seg.end_offset, seg.label};
}

void sort_segments(std::vector<LabeledSegment>& segments) {
  std::sort(segments.begin(), segments.end(), [](const LabeledSegment& a, const LabeledSegment& b) {
    if (a.matrix != b.matrix) return a.matrix < b.matrix;
    return a.end_row < b.end_row;
  });
}

}  // namespace camseer::dataset
