#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "camseer/dataset.hpp"
#include "camseer/neuralnet.hpp"
#include "camseer/synth.hpp"

namespace fixtures {

// Unique directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Segments stored one per matrix of a single recording.
struct ToySet {
  std::shared_ptr<camseer::dataset::SegmentStore> store;
  std::vector<camseer::dataset::LabeledSegment> train;
  std::vector<camseer::dataset::LabeledSegment> val;
};

// Gaussian noise on every feature; label-1 segments have `shift` added to
// feature 0 over the whole window.
ToySet make_toy_set(std::size_t n_train_per_class, std::size_t n_val_per_class, std::size_t steps,
                    std::size_t width, double shift, std::uint64_t seed, double noise = 1.0);

// Feature matrix of `rows` rows whose global offsets start at `first_offset`.
camseer::dataset::FeatureMatrix make_chunk(std::size_t rows, std::int64_t first_offset, std::size_t chunk_idx = 0);

// Tiny network configuration for tests.
camseer::nn::NetworkConfig tiny_config(std::size_t input_width, std::vector<std::size_t> hidden,
                                       std::size_t num_batchnorm, double recurrent_dropout, std::size_t steps);

// Random uniform values in [lo, hi).
std::vector<double> uniform(std::size_t n, double lo, double hi, std::uint64_t seed);

// Synthetic recordings with ids rec000, rec001, ...
std::vector<camseer::dataset::KinematicRecording> synthetic_corpus(std::size_t count,
                                                                   const camseer::synth::SynthConfig& base,
                                                                   std::uint64_t first_seed);

}  // namespace fixtures
