#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "camseer/dataset.hpp"
#include "camseer/error.hpp"
#include "camseer/neuralnet.hpp"
#include "camseer/synth.hpp"

namespace camseer::cli {

// 0 success, 2 usage or configuration, 3 data format, 4 numeric failure.
int exit_code(ErrorKind kind);

struct GenOptions {
  std::filesystem::path out_dir;
  std::string name = "synth";
  std::size_t count = 1;
  synth::SynthConfig synth;
};

struct PrepareOptions {
  std::vector<std::filesystem::path> inputs;  // CSV files or directories of them
  std::filesystem::path out_dir;
  std::vector<std::size_t> segment_lengths{50};
  double horizon_s = 0.0;
  dataset::PrepareConfig config;
  bool write_archive = false;
};

struct TrainOptions {
  std::filesystem::path dataset;
  std::filesystem::path out_dir;
  std::size_t k = 15;
  std::uint64_t seed = 1;
  std::string vote_rule = "majority";
  bool unbalanced = false;
  nn::NetworkConfig network = nn::NetworkConfig::final_architecture();
  std::size_t threads = 0;
};

struct EvalOptions {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> ensemble;
  std::filesystem::path out_dir;
  std::string split = "test";
  bool stability = false;
  std::optional<std::filesystem::path> relative_to;
  // Experiment mode: trains ensembles itself instead of loading one.
  bool experiment = false;
  std::size_t k = 15;
  std::size_t seeds = 1;
  std::uint64_t seed = 1;
  std::vector<double> horizons_s{0.0};
  std::vector<std::size_t> durations;
  std::optional<std::filesystem::path> grid;
  std::size_t max_configs = 0;
  nn::NetworkConfig network = nn::NetworkConfig::final_architecture();
  bool save_models = false;
  std::size_t threads = 0;
};

struct PredictOptions {
  std::filesystem::path recording;
  std::filesystem::path ensemble;
  std::optional<std::filesystem::path> dataset;  // source of detection/filter settings
  std::optional<std::filesystem::path> out;      // default: stdout
  std::size_t stride = 1;
  std::size_t context = 100;
  dataset::DetectionConfig detection;
  dataset::PreprocessConfig preprocess;
};

struct RunConfig {
  std::string command;
  int verbosity = 1;  // 0 quiet, 1 progress, 2 detail
  GenOptions gen;
  PrepareOptions prepare;
  TrainOptions train;
  EvalOptions eval;
  PredictOptions predict;
};

void cmd_gen(const GenOptions& o, std::ostream& log);
void cmd_prepare(const PrepareOptions& o, std::ostream& log);
void cmd_train(const TrainOptions& o, std::ostream& log);
void cmd_eval(const EvalOptions& o, std::ostream& log);
void cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream& log);

// Parses and dispatches; never throws. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace camseer::cli
