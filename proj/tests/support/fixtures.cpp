#include "fixtures.hpp"

#include <atomic>
#include <cstdio>
#include <random>

#include <unistd.h>

namespace fixtures {

namespace fs = std::filesystem;
using namespace camseer;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("camseer_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1)));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

ToySet make_toy_set(std::size_t n_train_per_class, std::size_t n_val_per_class, std::size_t steps,
                    std::size_t width, double shift, std::uint64_t seed, double noise_std) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_std);
  std::vector<dataset::FeatureMatrix> mats;
  std::vector<int> labels;
  const std::size_t total = 2 * (n_train_per_class + n_val_per_class);
  for (std::size_t i = 0; i < total; ++i) {
    const int label = static_cast<int>(i % 2);
    dataset::FeatureMatrix m;
    m.recording_id = "toy";
    m.chunk_idx = i;
    m.width = width;
    m.values.resize(steps * width);
    for (auto& v : m.values) v = noise(rng);
    if (label == 1)
      for (std::size_t t = 0; t < steps; ++t) m.values[t * width] += shift;
    for (std::size_t t = 0; t < steps; ++t) m.global_offsets.push_back(static_cast<std::int64_t>(i * 1000 + t));
    mats.push_back(std::move(m));
    labels.push_back(label);
  }
  ToySet out;
  out.store = std::make_shared<dataset::SegmentStore>();
  out.store->add_recording("toy", std::move(mats), {});
  for (std::size_t i = 0; i < total; ++i) {
    dataset::LabeledSegment s;
    s.matrix = static_cast<std::uint32_t>(i);
    s.chunk_idx = static_cast<std::uint32_t>(i);
    s.end_row = static_cast<std::uint32_t>(steps - 1);
    s.end_offset = static_cast<std::int64_t>(i * 1000 + steps - 1);
    s.length = static_cast<std::uint32_t>(steps);
    s.label = static_cast<std::uint8_t>(labels[i]);
    (i < 2 * n_train_per_class ? out.train : out.val).push_back(s);
  }
  return out;
}

dataset::FeatureMatrix make_chunk(std::size_t rows, std::int64_t first_offset, std::size_t chunk_idx) {
  dataset::FeatureMatrix m;
  m.recording_id = "chunk";
  m.chunk_idx = chunk_idx;
  m.values.resize(rows * m.width);
  for (std::size_t r = 0; r < rows; ++r) {
    m.global_offsets.push_back(first_offset + static_cast<std::int64_t>(r));
    for (std::size_t c = 0; c < m.width; ++c) m.values[r * m.width + c] = static_cast<double>(r) + 0.001 * c;
  }
  return m;
}

nn::NetworkConfig tiny_config(std::size_t input_width, std::vector<std::size_t> hidden, std::size_t num_batchnorm,
                              double recurrent_dropout, std::size_t steps) {
  nn::NetworkConfig c;
  c.input_width = input_width;
  c.hidden_sizes = std::move(hidden);
  c.dropout.assign(c.hidden_sizes.size(), 0.0);
  c.recurrent_dropout.assign(c.hidden_sizes.size(), recurrent_dropout);
  c.num_batchnorm = num_batchnorm;
  c.segment_length = steps;
  c.batch_size = 8;
  c.learning_rate = 1e-2;
  c.max_epochs = 20;
  return c;
}

std::vector<double> uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<dataset::KinematicRecording> synthetic_corpus(std::size_t count, const synth::SynthConfig& base,
                                                          std::uint64_t first_seed) {
  std::vector<dataset::KinematicRecording> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto cfg = base;
    cfg.seed = first_seed + i;
    char id[32];
    std::snprintf(id, sizeof id, "rec%03zu", i);
    out.push_back(synth::generate_recording(cfg, id).recording);
  }
  return out;
}

}  // namespace fixtures
