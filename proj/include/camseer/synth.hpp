#pragma once

// Synthetic recordings with planted camera movements. Before each movement the
// instruments slow down and the grippers close a little, by an amount set by
// signature_strength (0 = no signature at all).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "camseer/dataset.hpp"

namespace camseer::synth {

struct SynthConfig {
  double duration_s = 600.0;
  double dt = 0.02;
  std::size_t num_events = 10;
  double min_event_gap_s = 20.0;  // between consecutive onsets
  double signature_strength = 1.0;
  double signature_window_s = 1.0;
  double noise_std = 5e-4;          // m, instrument position noise
  double gripper_noise_std = 5e-3;  // rad
  std::uint64_t seed = 0;

  double move_min_s = 0.5, move_max_s = 1.5;
  double amplitude_min_m = 0.02, amplitude_max_m = 0.05;
  double speed_cap = 0.2;  // m/s, noise-free instrument speed bound
  double lead_in_s = 5.0;  // quiet time before the first onset

  void validate() const;
  io::json to_json() const;
  static SynthConfig from_json(const io::json& j);
};

struct SynthResult {
  dataset::KinematicRecording recording;
  std::vector<dataset::MovementInterval> events;  // ground truth, sample indices
};

SynthResult generate_recording(const SynthConfig& cfg, const std::string& id = "synth");

// Sidecar with the generating config and the ground-truth intervals.
io::json sidecar_json(const SynthConfig& cfg, const SynthResult& result);

// Writes <stem>.csv and <stem>.truth.json into `dir`; returns the CSV path.
std::filesystem::path write_synthetic(const std::filesystem::path& dir, const std::string& stem,
                                      const SynthConfig& cfg, const SynthResult& result);

}  // namespace camseer::synth
