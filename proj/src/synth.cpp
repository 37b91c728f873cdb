#include "camseer/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "camseer/error.hpp"

namespace camseer::synth {

namespace {

constexpr double kTailS = 2.0;  // quiet time after the last movement
constexpr std::size_t kHarmonics = 3;

struct Harmonic {
  double amplitude, freq, phase;
};

}  // namespace

void SynthConfig::validate() const {
  auto check = [](bool ok, const char* what) { require(ok, ErrorKind::InvalidParameter, what); };
  check(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  check(duration_s > 0.0, "duration must be positive");
  check(signature_strength >= 0.0, "signature strength must be non-negative");
  check(signature_window_s > 0.0, "signature window must be positive");
  check(noise_std >= 0.0 && gripper_noise_std >= 0.0, "noise levels must be non-negative");
  check(move_min_s > 0.0 && move_min_s <= move_max_s, "movement durations need 0 < min <= max");
  check(amplitude_min_m > 0.0 && amplitude_min_m <= amplitude_max_m, "movement amplitudes need 0 < min <= max");
  check(speed_cap > 0.0, "speed cap must be positive");
  check(lead_in_s >= signature_window_s, "lead-in must cover the signature window");
  check(min_event_gap_s > 0.0, "minimum event gap must be positive");
  if (static_cast<double>(num_events) * min_event_gap_s >= duration_s)
    fail(ErrorKind::InvalidParameter, "num_events * min_event_gap_s must be below duration_s");
}

io::json SynthConfig::to_json() const {
  return {{"duration_s", duration_s},
          {"dt", dt},
          {"num_events", num_events},
          {"min_event_gap_s", min_event_gap_s},
          {"signature_strength", signature_strength},
          {"signature_window_s", signature_window_s},
          {"noise_std", noise_std},
          {"gripper_noise_std", gripper_noise_std},
          {"seed", seed},
          {"move_min_s", move_min_s},
          {"move_max_s", move_max_s},
          {"amplitude_min_m", amplitude_min_m},
          {"amplitude_max_m", amplitude_max_m},
          {"speed_cap", speed_cap},
          {"lead_in_s", lead_in_s}};
}

SynthConfig SynthConfig::from_json(const io::json& j) {
  SynthConfig c;
  try {
    auto get = [&j](const char* key, auto& dst) {
      if (j.contains(key)) j.at(key).get_to(dst);
    };
    get("duration_s", c.duration_s);
    get("dt", c.dt);
    get("num_events", c.num_events);
    get("min_event_gap_s", c.min_event_gap_s);
    get("signature_strength", c.signature_strength);
    get("signature_window_s", c.signature_window_s);
    get("noise_std", c.noise_std);
    get("gripper_noise_std", c.gripper_noise_std);
    get("seed", c.seed);
    get("move_min_s", c.move_min_s);
    get("move_max_s", c.move_max_s);
    get("amplitude_min_m", c.amplitude_min_m);
    get("amplitude_max_m", c.amplitude_max_m);
    get("speed_cap", c.speed_cap);
    get("lead_in_s", c.lead_in_s);
  } catch (const io::json::exception& e) {
    fail(ErrorKind::InvalidParameter, std::string("malformed synth config: ") + e.what());
  }
  return c;
}

SynthResult generate_recording(const SynthConfig& cfg, const std::string& id) {
  cfg.validate();
  using std::numbers::pi;
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration_s / cfg.dt));
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  // Onsets: fixed spacing plus a sorted uniform share of the slack.
  if (cfg.min_event_gap_s < cfg.move_max_s + cfg.signature_window_s)
    fail(ErrorKind::Infeasible, "min_event_gap_s must exceed the longest movement plus the signature window");
  const double k = static_cast<double>(cfg.num_events);
  const double slack =
      cfg.duration_s - cfg.lead_in_s - std::max(0.0, k - 1.0) * cfg.min_event_gap_s - cfg.move_max_s - kTailS;
  if (cfg.num_events > 0 && slack < 0.0)
    fail(ErrorKind::Infeasible, "cannot place " + std::to_string(cfg.num_events) + " events in " +
                                    std::to_string(cfg.duration_s) + " s with the requested gaps");
  std::vector<double> offsets(cfg.num_events);
  for (auto& o : offsets) o = uniform(0.0, slack);
  std::sort(offsets.begin(), offsets.end());

  SynthResult out;
  auto& rec = out.recording;
  rec.id = id;
  rec.dt = cfg.dt;
  rec.time.resize(n);
  for (std::size_t i = 0; i < n; ++i) rec.time[i] = static_cast<double>(i) * cfg.dt;

  // Camera: constant between raised-cosine moves along random directions.
  std::array<std::vector<double>, 3> cam;
  std::array<double, 3> c0{};
  for (std::size_t a = 0; a < 3; ++a) {
    c0[a] = uniform(-0.02, 0.02);
    cam[a].assign(n, c0[a]);
  }
  std::vector<double> w(n, 0.0);  // signature weight in [0, 1]
  const auto window = static_cast<std::int64_t>(std::llround(cfg.signature_window_s / cfg.dt));
  for (std::size_t e = 0; e < cfg.num_events; ++e) {
    const double onset = cfg.lead_in_s + static_cast<double>(e) * cfg.min_event_gap_s + offsets[e];
    const auto start = std::llround(onset / cfg.dt);
    const auto len = std::max<std::int64_t>(2, std::llround(uniform(cfg.move_min_s, cfg.move_max_s) / cfg.dt));
    const double amp = uniform(cfg.amplitude_min_m, cfg.amplitude_max_m);
    std::array<double, 3> dir{gauss(rng), gauss(rng), gauss(rng)};
    const double norm = std::hypot(dir[0], dir[1], dir[2]);
    for (auto& d : dir) d /= norm;
    out.events.push_back({start, start + len});

    const std::array<double, 3> from{cam[0][start], cam[1][start], cam[2][start]};
    for (auto i = start; i < static_cast<std::int64_t>(n); ++i) {
      const double s = std::min(1.0, static_cast<double>(i - start) / static_cast<double>(len));
      const double shape = 0.5 * (1.0 - std::cos(pi * s));
      for (std::size_t a = 0; a < 3; ++a) cam[a][i] = from[a] + amp * dir[a] * shape;
    }
    // Ramp up over the window before the onset, back down during the move.
    for (auto i = std::max<std::int64_t>(0, start - window); i < start; ++i) {
      const double u = static_cast<double>(i - (start - window)) / static_cast<double>(window);
      w[i] = std::max(w[i], std::pow(std::sin(0.5 * pi * u), 2));
    }
    for (auto i = start; i < std::min<std::int64_t>(start + len, static_cast<std::int64_t>(n)); ++i) {
      const double u = static_cast<double>(i - start) / static_cast<double>(len);
      w[i] = std::max(w[i], std::pow(std::cos(0.5 * pi * u), 2));
    }
  }

  // Warped clock: the instruments' own time runs at rate 1 - strength * w.
  const double s = cfg.signature_strength;
  std::vector<double> tau(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) tau[i] = tau[i - 1] + cfg.dt * (1.0 - s * 0.5 * (w[i - 1] + w[i]));
  const double max_rate = std::max(1.0, s - 1.0);

  for (std::size_t inst = 0; inst < dataset::kNumInstruments; ++inst) {
    std::array<std::array<Harmonic, kHarmonics>, 3> axes{};
    std::array<double, 3> base{};
    double bound2 = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
      base[a] = uniform(-0.05, 0.05);
      double axis_bound = 0.0;
      for (auto& h : axes[a]) {
        h = {uniform(0.005, 0.02), uniform(0.05, 0.4), uniform(0.0, 2.0 * pi)};
        axis_bound += h.amplitude * 2.0 * pi * h.freq;
      }
      bound2 += axis_bound * axis_bound;
    }
    const double bound = std::sqrt(bound2) * max_rate;
    const double scale = bound > cfg.speed_cap ? cfg.speed_cap / bound : 1.0;

    auto& kin = rec.instruments[inst];
    for (std::size_t a = 0; a < 3; ++a) {
      auto& v = kin.position[a].values;
      kin.position[a].dt = cfg.dt;
      v.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        double p = base[a];
        for (const auto& h : axes[a]) p += scale * h.amplitude * std::sin(2.0 * pi * h.freq * tau[i] + h.phase);
        v[i] = p - cam[a][i] + cfg.noise_std * gauss(rng);
      }
    }
    const double g_mid = uniform(0.4, 0.8);
    const double g_amp = uniform(0.1, 0.25);
    const double g_freq = uniform(0.05, 0.3);
    const double g_phase = uniform(0.0, 2.0 * pi);
    auto& g = kin.gripper_angle;
    g.dt = cfg.dt;
    g.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      g.values[i] = g_mid + g_amp * std::sin(2.0 * pi * g_freq * tau[i] + g_phase) - s * 0.2 * w[i] +
                    cfg.gripper_noise_std * gauss(rng);
  }
  for (std::size_t a = 0; a < 3; ++a) rec.camera_position[a] = {std::move(cam[a]), cfg.dt};
  return out;
}

io::json sidecar_json(const SynthConfig& cfg, const SynthResult& result) {
  io::json ev = io::json::array();
  for (const auto& e : result.events)
    ev.push_back({{"start", e.start},
                  {"end", e.end},
                  {"start_s", static_cast<double>(e.start) * cfg.dt},
                  {"end_s", static_cast<double>(e.end) * cfg.dt}});
  return {{"format", "camseer-synth-truth"},
          {"recording", result.recording.id},
          {"samples", result.recording.size()},
          {"config", cfg.to_json()},
          {"events", std::move(ev)}};
}

std::filesystem::path write_synthetic(const std::filesystem::path& dir, const std::string& stem,
                                      const SynthConfig& cfg, const SynthResult& result) {
  std::filesystem::create_directories(dir);
  const auto csv = dir / (stem + ".csv");
  dataset::save_recording(csv, result.recording);
  io::write_json(dir / (stem + ".truth.json"), sidecar_json(cfg, result));
  return csv;
}

}  // namespace camseer::synth
