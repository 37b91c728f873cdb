#include <cmath>

#include "camseer/dataset.hpp"
#include "camseer/error.hpp"

namespace camseer::dataset {

std::vector<MovementInterval> detect_camera_movements(const std::array<signal::Series, 3>& camera_position,
                                                      const DetectionConfig& cfg) {
  const std::size_t n = camera_position[0].size();
  const double dt = camera_position[0].dt;
  require(n >= 2, ErrorKind::TooShortInput, "camera series needs at least 2 samples");
  require(camera_position[1].size() == n && camera_position[2].size() == n, ErrorKind::ContractViolation,
          "camera axes differ in length");
  require(cfg.v_off < cfg.v_on && cfg.v_off > 0.0, ErrorKind::InvalidParameter, "need 0 < v_off < v_on");

  std::vector<double> speed(n, 0.0);
  for (const auto& axis : camera_position) {
    const auto v = signal::differentiate(axis);
    for (std::size_t k = 0; k < n; ++k) speed[k] += v.values[k] * v.values[k];
  }
  for (double& s : speed) s = std::sqrt(s);
  if (n >= signal::kFiltfiltMinLength) {
    const auto smoother = signal::design_butterworth2(cfg.smoothing_cutoff_hz, 1.0 / dt);
    speed = signal::filtfilt(smoother, speed);
  }

  std::vector<MovementInterval> runs;
  std::size_t k = 0;
  while (k < n) {
    if (speed[k] < cfg.v_off) {
      ++k;
      continue;
    }
    const std::size_t start = k;
    bool triggered = false;
    while (k < n && speed[k] >= cfg.v_off) {
      triggered = triggered || speed[k] >= cfg.v_on;
      ++k;
    }
    if (triggered) runs.push_back({static_cast<std::int64_t>(start), static_cast<std::int64_t>(k)});
  }

  const auto merge_gap = static_cast<std::int64_t>(std::llround(cfg.merge_gap_s / dt));
  const auto min_len = static_cast<std::int64_t>(std::llround(cfg.min_duration_s / dt));

  std::vector<MovementInterval> merged;
  for (const auto& r : runs) {
    if (!merged.empty() && r.start - merged.back().end < merge_gap)
      merged.back().end = r.end;
    else
      merged.push_back(r);
  }

  std::vector<MovementInterval> out;
  for (const auto& r : merged)
    if (r.length() >= min_len) out.push_back(r);
  return out;
}

}  // namespace camseer::dataset
