#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "camseer/dataset.hpp"
#include "camseer/error.hpp"
#include "fixtures.hpp"

using namespace camseer;
using namespace camseer::dataset;

namespace {

KinematicRecording make_recording(std::size_t n, double dt = 0.02, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1e-3);
  KinematicRecording rec;
  rec.id = "r";
  rec.dt = dt;
  for (std::size_t k = 0; k < n; ++k) rec.time.push_back(static_cast<double>(k) * dt);
  for (auto& axis : rec.camera_position) axis = {std::vector<double>(n, 0.1), dt};
  for (std::size_t i = 0; i < kNumInstruments; ++i) {
    auto& inst = rec.instruments[i];
    for (std::size_t a = 0; a < 3; ++a) {
      inst.position[a].dt = dt;
      for (std::size_t k = 0; k < n; ++k)
        inst.position[a].values.push_back(0.01 * std::sin(0.3 * static_cast<double>(k) * dt * static_cast<double>(a + i + 1)) +
                                          noise(rng));
    }
    inst.gripper_angle.dt = dt;
    for (std::size_t k = 0; k < n; ++k) inst.gripper_angle.values.push_back(0.5 + noise(rng));
  }
  return rec;
}

// Camera parked at the origin, moving along x at `speed` over [start, end) seconds.
std::array<signal::Series, 3> camera_track(double seconds, std::vector<std::pair<double, double>> moves,
                                           double speed = 0.02, double dt = 0.02) {
  std::array<signal::Series, 3> cam;
  const auto n = static_cast<std::size_t>(std::llround(seconds / dt));
  for (auto& a : cam) a = {std::vector<double>(n, 0.0), dt};
  double x = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    for (const auto& [s, e] : moves)
      if (t > s && t <= e + 1e-12) x += speed * dt;
    cam[0].values[k] = x;
  }
  return cam;
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::ContractViolation;
}

}  // namespace

TEST(RecordingCsv, RoundTripPreservesEverySample) {
  fixtures::TempDir dir;
  const auto rec = make_recording(1000);
  save_recording(dir / "r.csv", rec);
  const auto back = load_recording(dir / "r.csv");
  EXPECT_EQ(back.size(), 1000u);
  EXPECT_EQ(back.id, "r");
  EXPECT_NEAR(back.dt, 0.02, 1e-12);
  for (std::size_t i = 0; i < kNumInstruments; ++i) {
    for (std::size_t a = 0; a < 3; ++a)
      EXPECT_EQ(back.instruments[i].position[a].values, rec.instruments[i].position[a].values);
    EXPECT_EQ(back.instruments[i].gripper_angle.values, rec.instruments[i].gripper_angle.values);
  }
  EXPECT_EQ(back.camera_position[2].values, rec.camera_position[2].values);
}

TEST(RecordingCsv, ColumnOrderFollowsHeader) {
  fixtures::TempDir dir;
  std::string csv = "g3,t,cam_x,cam_y,cam_z,p1x,p1y,p1z,g1,p2x,p2y,p2z,g2,p3x,p3y,p3z\n";
  for (int k = 0; k < 3; ++k)
    csv += std::to_string(k + 10) + "," + std::to_string(k * 0.02) + ",0,0,0,1,2,3,4,5,6,7,8,9,10,11\n";
  write_text(dir / "x.csv", csv);
  const auto rec = load_recording(dir / "x.csv");
  EXPECT_EQ(rec.instruments[2].gripper_angle.values, (std::vector<double>{10, 11, 12}));
  EXPECT_EQ(rec.instruments[1].position[1].values[0], 6.0);
}

TEST(RecordingCsv, NanNamesColumnAndRow) {
  fixtures::TempDir dir;
  std::string csv = "t,cam_x,cam_y,cam_z,p1x,p1y,p1z,g1,p2x,p2y,p2z,g2,p3x,p3y,p3z,g3\n";
  csv += "0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n";
  csv += "0.02,0,0,0,0,0,0,0,0,nan,0,0,0,0,0,0\n";
  write_text(dir / "nan.csv", csv);
  try {
    load_recording(dir / "nan.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Format);
    EXPECT_NE(std::string(e.what()).find("p2y"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
}

TEST(RecordingCsv, RejectsBadTimeAndShape) {
  fixtures::TempDir dir;
  const std::string head = "t,cam_x,cam_y,cam_z,p1x,p1y,p1z,g1,p2x,p2y,p2z,g2,p3x,p3y,p3z,g3\n";
  const std::string zeros = ",0,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n";
  write_text(dir / "jumbled.csv", head + "0" + zeros + "0.04" + zeros + "0.02" + zeros);
  EXPECT_EQ(kind_of([&] { load_recording(dir / "jumbled.csv"); }), ErrorKind::NonMonotonicTime);

  write_text(dir / "uneven.csv", head + "0" + zeros + "0.02" + zeros + "0.1" + zeros + "0.12" + zeros);
  EXPECT_EQ(kind_of([&] { load_recording(dir / "uneven.csv"); }), ErrorKind::Format);

  write_text(dir / "missing.csv", "t,cam_x\n0,0\n");
  EXPECT_EQ(kind_of([&] { load_recording(dir / "missing.csv"); }), ErrorKind::Format);

  write_text(dir / "ragged.csv", head + "0" + zeros + "0.02,0\n");
  EXPECT_EQ(kind_of([&] { load_recording(dir / "ragged.csv"); }), ErrorKind::Format);

  EXPECT_EQ(kind_of([&] { load_recording(dir / "absent.csv"); }), ErrorKind::Io);
}

TEST(Detection, StationaryCameraHasNoMovements) {
  EXPECT_TRUE(detect_camera_movements(camera_track(10.0, {})).empty());
}

TEST(Detection, SingleOneSecondMove) {
  const auto found = detect_camera_movements(camera_track(10.0, {{4.0, 5.0}}));
  ASSERT_EQ(found.size(), 1u);
  // Smoothing spreads the speed step by a few samples on each side.
  EXPECT_LE(found[0].start, 201);
  EXPECT_GE(found[0].start, 196);
  EXPECT_GE(found[0].end, 251);
  EXPECT_LE(found[0].end, 256);
}

TEST(Detection, ShortGapIsMerged) {
  const auto found = detect_camera_movements(camera_track(10.0, {{3.0, 3.5}, {3.6, 4.1}}));
  ASSERT_EQ(found.size(), 1u);
  EXPECT_LE(found[0].start, 151);
  EXPECT_GE(found[0].start, 146);
  EXPECT_GE(found[0].end, 206);
  EXPECT_LE(found[0].end, 211);
}

TEST(Detection, WellSeparatedMovesStayApart) {
  const auto found = detect_camera_movements(camera_track(20.0, {{3.0, 4.0}, {10.0, 11.0}}));
  ASSERT_EQ(found.size(), 2u);
  EXPECT_LT(found[0].end, found[1].start);
}

TEST(Detection, BriefJitterIsDiscarded) {
  DetectionConfig cfg;
  cfg.min_duration_s = 0.5;
  EXPECT_TRUE(detect_camera_movements(camera_track(10.0, {{4.0, 4.2}}), cfg).empty());
}

TEST(Features, NoMovementGivesOneFullChunk) {
  const auto rec = make_recording(1000);
  const auto fb = build_feature_matrices(rec, {}, std::nullopt);
  ASSERT_EQ(fb.matrices.size(), 1u);
  EXPECT_EQ(fb.matrices[0].rows(), 1000u);
  EXPECT_EQ(fb.matrices[0].width, 21u);
}

TEST(Features, MovementSplitsIntoTwoChunks) {
  const auto rec = make_recording(1000);
  const std::vector<MovementInterval> iv{{500, 550}};
  const auto fb = build_feature_matrices(rec, iv, std::nullopt);
  ASSERT_EQ(fb.matrices.size(), 2u);
  EXPECT_EQ(fb.matrices[0].rows(), 500u);
  EXPECT_EQ(fb.matrices[1].rows(), 450u);
  EXPECT_TRUE(fb.matrices[0].ends_at_onset);
  EXPECT_FALSE(fb.matrices[1].ends_at_onset);
  for (const auto& m : fb.matrices)
    for (std::size_t r = 1; r < m.rows(); ++r) EXPECT_EQ(m.global_offsets[r], m.global_offsets[r - 1] + 1);
  EXPECT_EQ(fb.matrices[1].global_offsets.front(), 550);
  for (const auto& m : fb.matrices)
    for (auto off : m.global_offsets) EXPECT_TRUE(off < 500 || off >= 550);
}

TEST(Features, ShortChunkIsSkippedAndReported) {
  const auto rec = make_recording(300);
  const std::vector<MovementInterval> iv{{10, 20}};
  const auto fb = build_feature_matrices(rec, iv, std::nullopt);
  ASSERT_EQ(fb.matrices.size(), 1u);
  ASSERT_EQ(fb.skipped.size(), 1u);
  EXPECT_EQ(fb.skipped[0].start, 0);
  EXPECT_EQ(fb.skipped[0].end, 10);
}

TEST(Features, ColumnsFollowThePipeline) {
  const auto rec = make_recording(400);
  const auto raw = build_raw_features(rec, {});
  const auto& m = raw.matrices.at(0);
  const auto pf = signal::design_butterworth2(5.0, 50.0), vf = signal::design_butterworth2(8.0, 50.0);
  const auto pos = signal::filtfilt(pf, rec.instruments[1].position[2]);
  const auto vel = signal::filtfilt(vf, signal::differentiate(pos));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    EXPECT_DOUBLE_EQ(m.values[r * 21 + 7 + 2], pos.values[r]);
    EXPECT_DOUBLE_EQ(m.values[r * 21 + 7 + 5], vel.values[r]);
    EXPECT_DOUBLE_EQ(m.values[r * 21 + 7 + 6], rec.instruments[1].gripper_angle.values[r]);
  }
  EXPECT_EQ(feature_name(0), "p1_x");
  EXPECT_EQ(feature_name(10), "v2_x");
  EXPECT_EQ(feature_name(20), "g3");
}

TEST(Features, NormalizedColumnsHaveUnitMoments) {
  const auto fb = build_feature_matrices(make_recording(800), {}, std::nullopt);
  const auto& m = fb.matrices[0];
  for (std::size_t c = 0; c < 21; ++c) {
    std::vector<double> col;
    for (std::size_t r = 0; r < m.rows(); ++r) col.push_back(m.values[r * 21 + c]);
    const auto s = signal::compute_norm_stats(col);
    EXPECT_NEAR(s.mean, 0.0, 1e-10);
    EXPECT_NEAR(s.std, 1.0, 1e-10);
  }
}

TEST(Features, ConstantChannelsAreZeroAndFlagged) {
  auto rec = make_recording(500);
  for (auto& inst : rec.instruments) {
    for (auto& a : inst.position) std::fill(a.values.begin(), a.values.end(), 0.25);
    std::fill(inst.gripper_angle.values.begin(), inst.gripper_angle.values.end(), 1.0);
  }
  const auto fb = build_feature_matrices(rec, {}, std::nullopt);
  for (std::size_t c = 0; c < 21; ++c) {
    EXPECT_TRUE(fb.stats[c].degenerate) << c;
    for (std::size_t r = 0; r < fb.matrices[0].rows(); ++r) EXPECT_EQ(fb.matrices[0].values[r * 21 + c], 0.0);
  }
}

TEST(Features, GivenStatisticsAreApplied) {
  const auto rec = make_recording(500);
  ChannelStats stats{};
  for (auto& s : stats) s = {1.0, 2.0, false};
  const auto fb = build_feature_matrices(rec, {}, stats);
  const auto raw = build_raw_features(rec, {});
  EXPECT_DOUBLE_EQ(fb.matrices[0].values[5], (raw.matrices[0].values[5] - 1.0) / 2.0);
}
