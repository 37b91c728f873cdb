#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "camseer/dataset.hpp"
#include "camseer/error.hpp"

namespace camseer::dataset {

namespace {

using io::json;

json filter_to_json(const signal::FilterCoefficients& c) {
  json j;
  j["cutoff_hz"] = c.cutoff_hz;
  j["sample_rate_hz"] = c.sample_rate_hz;
  j["b"] = json::array();
  j["a"] = json::array();
  for (double v : c.b) j["b"].push_back(io::format_g17(v));
  for (double v : c.a) j["a"].push_back(io::format_g17(v));
  return j;
}

signal::FilterCoefficients filter_from_json(const json& j) {
  signal::FilterCoefficients c;
  c.cutoff_hz = j.at("cutoff_hz").get<double>();
  c.sample_rate_hz = j.at("sample_rate_hz").get<double>();
  for (std::size_t i = 0; i < 3; ++i) {
    c.b[i] = std::stod(j.at("b").at(i).get<std::string>());
    c.a[i] = std::stod(j.at("a").at(i).get<std::string>());
  }
  return c;
}

json keys_to_json(const std::vector<SegmentKey>& keys) {
  json arr = json::array();
  for (const auto& k : keys) arr.push_back(json::array({k.recording_id, k.chunk_idx, k.end_offset, k.label}));
  return arr;
}

std::vector<SegmentKey> keys_from_json(const json& arr) {
  std::vector<SegmentKey> keys;
  for (const auto& e : arr)
    keys.push_back({e.at(0).get<std::string>(), e.at(1).get<std::size_t>(), e.at(2).get<std::int64_t>(),
                    e.at(3).get<int>()});
  return keys;
}

std::vector<SegmentKey> keys_of(const SegmentStore& store, const std::vector<LabeledSegment>& segs) {
  std::vector<SegmentKey> keys;
  keys.reserve(segs.size());
  for (const auto& s : segs) keys.push_back(key_of(store, s));
  return keys;
}

}  // namespace

json stats_to_json(const ChannelStats& stats) {
  json arr = json::array();
  for (std::size_t c = 0; c < stats.size(); ++c)
    arr.push_back({{"feature", feature_name(c)},
                   {"mean", stats[c].mean},
                   {"std", stats[c].std},
                   {"degenerate", stats[c].degenerate}});
  return arr;
}

ChannelStats stats_from_json(const json& j) {
  ChannelStats stats{};
  require(j.is_array() && j.size() == stats.size(), ErrorKind::Format, "normalization statistics need 21 entries");
  for (std::size_t c = 0; c < stats.size(); ++c)
    stats[c] = {j[c].at("mean").get<double>(), j[c].at("std").get<double>(), j[c].at("degenerate").get<bool>()};
  return stats;
}

json DatasetManifest::to_json() const {
  json j;
  j["format"] = "camseer-dataset";
  j["version"] = version;
  j["recordings"] = json::array();
  for (const auto& r : recordings)
    j["recordings"].push_back({{"id", r.id}, {"path", r.path}, {"sha256", r.digest}, {"samples", r.samples}});
  j["dt"] = dt;
  j["detection"] = {{"v_on", config.detection.v_on},
                    {"v_off", config.detection.v_off},
                    {"min_duration_s", config.detection.min_duration_s},
                    {"merge_gap_s", config.detection.merge_gap_s},
                    {"smoothing_cutoff_hz", config.detection.smoothing_cutoff_hz}};
  j["filters"] = {{"position", filter_to_json(position_filter)}, {"velocity", filter_to_json(velocity_filter)}};
  j["segment_length"] = config.segment_length;
  j["horizon_samples"] = config.horizon;
  j["guard_samples"] = config.guard;
  j["seed"] = config.seed;
  j["test_frac"] = config.test_frac;
  j["val_frac"] = config.val_frac;
  j["group_guard_gap"] = config.group_guard_gap;
  j["norm_stats"] = stats_to_json(norm_stats);
  j["counts"] = {{"positive", total_positive},
                 {"negative", total_negative},
                 {"train_pool_pos", train_pool_pos},
                 {"train_pool_neg", train_pool_neg}};
  j["splits"] = {{"test", keys_to_json(test)},
                 {"validation", keys_to_json(validation)},
                 {"train", "complement"}};
  return j;
}

DatasetManifest DatasetManifest::from_json(const json& j) {
  try {
    require(j.at("format").get<std::string>() == "camseer-dataset", ErrorKind::Format, "not a dataset manifest");
    DatasetManifest m;
    m.version = j.at("version").get<int>();
    for (const auto& r : j.at("recordings"))
      m.recordings.push_back({r.at("id").get<std::string>(), r.at("path").get<std::string>(),
                              r.at("sha256").get<std::string>(), r.at("samples").get<std::size_t>()});
    m.dt = j.at("dt").get<double>();
    const auto& d = j.at("detection");
    m.config.detection = {d.at("v_on").get<double>(), d.at("v_off").get<double>(),
                          d.at("min_duration_s").get<double>(), d.at("merge_gap_s").get<double>(),
                          d.at("smoothing_cutoff_hz").get<double>()};
    m.position_filter = filter_from_json(j.at("filters").at("position"));
    m.velocity_filter = filter_from_json(j.at("filters").at("velocity"));
    m.config.preprocess = {m.position_filter.cutoff_hz, m.velocity_filter.cutoff_hz};
    m.config.segment_length = j.at("segment_length").get<std::size_t>();
    m.config.horizon = j.at("horizon_samples").get<std::size_t>();
    m.config.guard = j.at("guard_samples").get<std::size_t>();
    m.config.seed = j.at("seed").get<std::uint64_t>();
    m.config.test_frac = j.at("test_frac").get<double>();
    m.config.val_frac = j.at("val_frac").get<double>();
    m.config.group_guard_gap = j.at("group_guard_gap").get<std::size_t>();
    m.norm_stats = stats_from_json(j.at("norm_stats"));
    const auto& c = j.at("counts");
    m.total_positive = c.at("positive").get<std::size_t>();
    m.total_negative = c.at("negative").get<std::size_t>();
    m.train_pool_pos = c.at("train_pool_pos").get<std::size_t>();
    m.train_pool_neg = c.at("train_pool_neg").get<std::size_t>();
    m.test = keys_from_json(j.at("splits").at("test"));
    m.validation = keys_from_json(j.at("splits").at("validation"));
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed dataset manifest: ") + e.what());
  }
}

namespace {

struct BuiltStore {
  std::shared_ptr<SegmentStore> store;
  ChannelStats stats{};
};

BuiltStore build_store(std::span<const KinematicRecording> recordings, const PrepareConfig& cfg,
                       const std::optional<ChannelStats>& stats) {
  std::vector<FeatureBuild> builds;
  std::vector<std::vector<MovementInterval>> intervals;
  builds.reserve(recordings.size());
  for (const auto& rec : recordings) {
    intervals.push_back(detect_camera_movements(rec.camera_position, cfg.detection));
    builds.push_back(build_raw_features(rec, intervals.back(), cfg.preprocess));
  }

  BuiltStore out;
  if (stats) {
    out.stats = *stats;
  } else {
    std::vector<FeatureMatrix> all;
    std::size_t total_rows = 0;
    for (const auto& b : builds) total_rows += b.matrices.size();
    all.reserve(total_rows);
    // Stats over every stationary sample of the set; the matrices are moved
    // back afterwards.
    for (auto& b : builds)
      for (auto& m : b.matrices) all.push_back(std::move(m));
    out.stats = fit_channel_stats(all);
    std::size_t k = 0;
    for (auto& b : builds)
      for (auto& m : b.matrices) m = std::move(all[k++]);
  }

  out.store = std::make_shared<SegmentStore>();
  for (std::size_t r = 0; r < recordings.size(); ++r) {
    normalize(builds[r].matrices, out.stats);
    out.store->add_recording(recordings[r].id, std::move(builds[r].matrices), std::move(intervals[r]));
  }
  return out;
}

DatasetSplits make_splits(std::span<const LabeledSegment> segments, const PrepareConfig& cfg) {
  auto splits = split_dataset(segments, cfg.test_frac, cfg.val_frac, cfg.seed);
  return group_guard_filter(splits, cfg.group_guard_gap);
}

void fill_manifest_splits(PreparedDataset& ds) {
  auto& m = ds.manifest;
  m.config.horizon = ds.segments.empty() ? m.config.horizon : ds.segments.front().horizon;
  m.test = keys_of(*ds.store, ds.splits.test);
  m.validation = keys_of(*ds.store, ds.splits.validation);
  m.train_pool_pos = ds.splits.train_pool_pos.size();
  m.train_pool_neg = ds.splits.train_pool_neg.size();
  m.total_positive = static_cast<std::size_t>(
      std::count_if(ds.segments.begin(), ds.segments.end(), [](const LabeledSegment& s) { return s.label == 1; }));
  m.total_negative = ds.segments.size() - m.total_positive;
}

}  // namespace

PreparedDataset prepare_dataset(std::span<const KinematicRecording> recordings, const PrepareConfig& cfg,
                                std::span<const std::filesystem::path> paths) {
  require(!recordings.empty(), ErrorKind::InvalidParameter, "no recordings");
  require(cfg.guard >= cfg.horizon, ErrorKind::InvalidParameter, "guard must be at least the horizon");
  const double dt = recordings.front().dt;
  for (const auto& r : recordings)
    require(std::abs(r.dt - dt) <= 1e-3 * dt, ErrorKind::Format, "recordings differ in sample interval");

  auto built = build_store(recordings, cfg, std::nullopt);
  PreparedDataset ds;
  ds.store = built.store;
  ds.segments = extract_segments(*ds.store, cfg.segment_length, cfg.horizon, cfg.guard);
  ds.splits = make_splits(ds.segments, cfg);

  auto& m = ds.manifest;
  m.config = cfg;
  m.dt = dt;
  m.position_filter = signal::design_butterworth2(cfg.preprocess.position_cutoff_hz, 1.0 / dt);
  m.velocity_filter = signal::design_butterworth2(cfg.preprocess.velocity_cutoff_hz, 1.0 / dt);
  m.norm_stats = built.stats;
  for (std::size_t r = 0; r < recordings.size(); ++r) {
    RecordingEntry e{recordings[r].id, "", "", recordings[r].size()};
    if (r < paths.size()) {
      e.path = paths[r].string();
      e.digest = io::sha256_file(paths[r]);
    }
    m.recordings.push_back(e);
  }
  fill_manifest_splits(ds);
  return ds;
}

PreparedDataset prepare_dataset(std::span<const std::filesystem::path> paths, const PrepareConfig& cfg) {
  std::vector<KinematicRecording> recs;
  recs.reserve(paths.size());
  for (const auto& p : paths) recs.push_back(load_recording(p));
  return prepare_dataset(recs, cfg, paths);
}

PreparedDataset load_prepared(const DatasetManifest& manifest) {
  std::vector<KinematicRecording> recs;
  for (const auto& e : manifest.recordings) {
    require(!e.path.empty(), ErrorKind::Format, "manifest recording '" + e.id + "' has no path");
    const std::filesystem::path p(e.path);
    if (!e.digest.empty())
      require(io::sha256_file(p) == e.digest, ErrorKind::Format, "recording digest mismatch: " + e.path);
    recs.push_back(load_recording(p));
  }
  auto built = build_store(recs, manifest.config, manifest.norm_stats);

  PreparedDataset ds;
  ds.store = built.store;
  ds.manifest = manifest;
  const auto& cfg = manifest.config;
  ds.segments = extract_segments(*ds.store, cfg.segment_length, cfg.horizon, cfg.guard);

  std::map<std::tuple<std::string, std::size_t, std::int64_t>, LabeledSegment> by_key;
  for (const auto& s : ds.segments) by_key.emplace(std::make_tuple(ds.store->recording_id(s.recording),
                                                                   std::size_t{s.chunk_idx}, s.end_offset), s);
  std::set<std::uint64_t> held;
  auto resolve = [&](const std::vector<SegmentKey>& keys) {
    std::vector<LabeledSegment> out;
    for (const auto& k : keys) {
      auto it = by_key.find({k.recording_id, k.chunk_idx, k.end_offset});
      require(it != by_key.end() && it->second.label == k.label, ErrorKind::Format,
              "manifest segment " + k.recording_id + "/" + std::to_string(k.chunk_idx) + "/" +
                  std::to_string(k.end_offset) + " not reproduced");
      out.push_back(it->second);
      held.insert((static_cast<std::uint64_t>(it->second.matrix) << 32) | it->second.end_row);
    }
    return out;
  };
  ds.splits.seed = cfg.seed;
  ds.splits.test = resolve(manifest.test);
  ds.splits.validation = resolve(manifest.validation);
  for (const auto& s : ds.segments) {
    if (held.contains((static_cast<std::uint64_t>(s.matrix) << 32) | s.end_row)) continue;
    (s.label == 1 ? ds.splits.train_pool_pos : ds.splits.train_pool_neg).push_back(s);
  }
  ds.splits = group_guard_filter(ds.splits, cfg.group_guard_gap);
  require(ds.splits.train_pool_pos.size() == manifest.train_pool_pos &&
              ds.splits.train_pool_neg.size() == manifest.train_pool_neg,
          ErrorKind::Format, "train pool sizes differ from manifest");
  return ds;
}

PreparedDataset with_horizon(const PreparedDataset& base, std::size_t horizon) {
  const auto& cfg = base.manifest.config;
  require(cfg.guard >= horizon, ErrorKind::InvalidParameter, "guard must be at least the horizon");
  PreparedDataset ds;
  ds.store = base.store;
  ds.manifest = base.manifest;
  ds.manifest.config.horizon = horizon;
  ds.segments = extract_segments(*ds.store, cfg.segment_length, horizon, cfg.guard);
  ds.splits = group_guard_filter(align_splits(base.splits, ds.segments), cfg.group_guard_gap);
  fill_manifest_splits(ds);
  return ds;
}

PreparedDataset with_segment_length(const PreparedDataset& base, std::size_t length) {
  PreparedDataset ds;
  ds.store = base.store;
  ds.manifest = base.manifest;
  ds.manifest.config.segment_length = length;
  const auto& cfg = ds.manifest.config;
  ds.segments = extract_segments(*ds.store, length, cfg.horizon, cfg.guard);
  ds.splits = make_splits(ds.segments, cfg);
  fill_manifest_splits(ds);
  return ds;
}

std::vector<std::uint8_t> encode_segment_archive(const SegmentStore& store, std::span<const LabeledSegment> segments) {
  io::ByteWriter w;
  const std::uint32_t length = segments.empty() ? 0 : segments.front().length;
  w.raw("CSEG");
  w.u32(1);
  w.u32(length);
  w.u32(static_cast<std::uint32_t>(store.width()));
  w.u64(segments.size());
  w.u64(0);
  for (const auto& s : segments) {
    require(s.length == length, ErrorKind::ContractViolation, "archive segments must share N");
    w.f64s(store.window(s));
  }
  return w.bytes();
}

SegmentArchive decode_segment_archive(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  require(r.raw(4) == "CSEG", ErrorKind::Format, "bad segment archive magic");
  SegmentArchive a;
  a.version = r.u32();
  require(a.version == 1, ErrorKind::Format, "unsupported segment archive version");
  a.length = r.u32();
  a.width = r.u32();
  a.count = r.u64();
  r.u64();
  a.values.resize(a.count * a.length * a.width);
  r.f64s(a.values);
  require(r.remaining() == 0, ErrorKind::Format, "trailing bytes in segment archive");
  return a;
}

}  // namespace camseer::dataset
