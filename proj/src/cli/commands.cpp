#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "camseer/cli.hpp"
#include "camseer/ensemble.hpp"
#include "camseer/eval.hpp"
#include "camseer/io.hpp"
#include "camseer/synth.hpp"

namespace camseer::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 4) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".csv") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  require(!out.empty(), ErrorKind::InvalidParameter, "no recordings found in the given inputs");
  return out;
}

std::size_t seconds_to_samples(double seconds, double dt, const char* what) {
  require(seconds >= 0.0, ErrorKind::InvalidParameter, std::string(what) + " must be non-negative");
  // Whole samples that fit in the interval: 0.25 s at 50 Hz is 12 samples.
  const double x = seconds / dt;
  return static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, x)));
}

dataset::PreparedDataset load_dataset(const fs::path& manifest_path) {
  require(fs::exists(manifest_path), ErrorKind::Io, "dataset manifest not found: " + manifest_path.string());
  return dataset::load_prepared(dataset::DatasetManifest::from_json(io::read_json(manifest_path)));
}

void log_metrics(std::ostream& log, const std::string& label, const eval::MetricsReport& r) {
  log << label << ": accuracy " << fixed(r.accuracy.mean) << " +- " << fixed(r.accuracy.std) << ", TPR "
      << fixed(r.tpr.mean) << " +- " << fixed(r.tpr.std) << ", TNR " << fixed(r.tnr.mean) << " +- "
      << fixed(r.tnr.std) << " (" << r.runs.size() << " run(s))\n";
}

// Rebuilds a MetricsReport from the first horizon of a report file, recomputing
// metrics from the stored confusion matrices.
eval::MetricsReport report_from_file(const fs::path& path) {
  const auto j = io::read_json(path);
  eval::MetricsReport rep;
  try {
    require(j.at("format").get<std::string>() == "camseer-report", ErrorKind::Format,
            path.string() + ": not a report file");
    const auto& h = j.at("horizons").at(0);
    rep.horizon_samples = h.at("horizon_samples").get<std::size_t>();
    rep.horizon_s = h.at("horizon_s").get<double>();
    rep.segment_length = h.at("segment_length").get<std::size_t>();
    for (const auto& r : h.at("runs")) {
      eval::RunResult run;
      run.seed = r.at("seed").get<std::uint64_t>();
      run.cm = eval::ConfusionMatrix::from_json(r.at("confusion"));
      run.m = eval::metrics(run.cm);
      rep.runs.push_back(std::move(run));
    }
  } catch (const io::json::exception& e) {
    fail(ErrorKind::Format, path.string() + ": malformed report: " + e.what());
  }
  rep.aggregate();
  return rep;
}

dataset::KinematicRecording slice(const dataset::KinematicRecording& rec, std::int64_t a, std::int64_t b) {
  auto cut = [&](const signal::Series& s) {
    return signal::Series{std::vector<double>(s.values.begin() + a, s.values.begin() + b), s.dt};
  };
  dataset::KinematicRecording out;
  out.id = rec.id;
  out.dt = rec.dt;
  out.time.assign(rec.time.begin() + a, rec.time.begin() + b);
  for (std::size_t k = 0; k < 3; ++k) out.camera_position[k] = cut(rec.camera_position[k]);
  for (std::size_t i = 0; i < dataset::kNumInstruments; ++i) {
    for (std::size_t k = 0; k < 3; ++k) out.instruments[i].position[k] = cut(rec.instruments[i].position[k]);
    out.instruments[i].gripper_angle = cut(rec.instruments[i].gripper_angle);
  }
  return out;
}

}  // namespace

void cmd_gen(const GenOptions& o, std::ostream& log) {
  require(o.count >= 1, ErrorKind::InvalidParameter, "--count must be at least 1");
  for (std::size_t i = 0; i < o.count; ++i) {
    auto cfg = o.synth;
    cfg.seed = o.synth.seed + i;
    char stem[256];
    if (o.count == 1)
      std::snprintf(stem, sizeof stem, "%s", o.name.c_str());
    else
      std::snprintf(stem, sizeof stem, "%s_%03zu", o.name.c_str(), i);
    const auto result = synth::generate_recording(cfg, stem);
    const auto path = synth::write_synthetic(o.out_dir, stem, cfg, result);
    log << "wrote " << path.string() << " (" << result.recording.size() << " samples, " << result.events.size()
        << " events)\n";
  }
}

void cmd_prepare(const PrepareOptions& o, std::ostream& log) {
  require(!o.segment_lengths.empty(), ErrorKind::InvalidParameter, "at least one --n is required");
  const auto paths = expand_inputs(o.inputs);
  std::vector<dataset::KinematicRecording> recs;
  recs.reserve(paths.size());
  for (const auto& p : paths) recs.push_back(dataset::load_recording(p));

  auto cfg = o.config;
  cfg.horizon = seconds_to_samples(o.horizon_s, recs.front().dt, "--horizon");
  require(cfg.guard >= cfg.horizon, ErrorKind::InvalidParameter,
          "--guard (" + std::to_string(cfg.guard) + " samples) must be at least the horizon (" +
              std::to_string(cfg.horizon) + " samples)");
  cfg.segment_length = o.segment_lengths.front();
  const auto base = dataset::prepare_dataset(recs, cfg, paths);

  fs::create_directories(o.out_dir);
  const bool many = o.segment_lengths.size() > 1;
  for (std::size_t n : o.segment_lengths) {
    const auto ds = n == cfg.segment_length ? base : dataset::with_segment_length(base, n);
    const std::string suffix = many ? "_n" + std::to_string(n) : "";
    const auto manifest_path = o.out_dir / ("dataset" + suffix + ".json");
    io::write_json(manifest_path, ds.manifest.to_json());
    if (o.write_archive) {
      std::vector<dataset::LabeledSegment> held = ds.splits.test;
      held.insert(held.end(), ds.splits.validation.begin(), ds.splits.validation.end());
      const auto bytes = dataset::encode_segment_archive(*ds.store, held);
      io::write_atomic(o.out_dir / ("segments" + suffix + ".cseg"), std::span<const std::uint8_t>(bytes));
    }
    const auto& m = ds.manifest;
    log << "wrote " << manifest_path.string() << ": N=" << n << ", horizon " << m.config.horizon << " samples, "
        << m.total_positive << " positive / " << m.total_negative << " negative segments; test "
        << m.test.size() << ", validation " << m.validation.size() << ", train pool " << m.train_pool_pos << "+"
        << m.train_pool_neg << "\n";
  }
}

void cmd_train(const TrainOptions& o, std::ostream& log) {
  const auto ds = load_dataset(o.dataset);
  auto net = o.network;
  net.segment_length = ds.manifest.config.segment_length;
  net.validate();

  std::vector<std::vector<dataset::LabeledSegment>> subsets;
  if (o.unbalanced) {
    require(o.k == 1, ErrorKind::InvalidParameter, "--unbalanced trains a single network; use --k 1");
    auto all = ds.splits.train_pool_pos;
    all.insert(all.end(), ds.splits.train_pool_neg.begin(), ds.splits.train_pool_neg.end());
    dataset::sort_segments(all);
    subsets.push_back(std::move(all));
  } else {
    subsets = ensemble::make_balanced_subsets(ds.splits.train_pool_pos, ds.splits.train_pool_neg, o.k, o.seed);
  }
  log << "training " << subsets.size() << " network(s) on " << subsets.front().size() << " segments each\n";
  auto model = o.unbalanced ? ensemble::train_single(net, *ds.store, subsets.front(), ds.splits.validation,
                                                     o.seed * 1000)
                            : ensemble::train_ensemble(net, *ds.store, subsets, ds.splits.validation,
                                                       o.seed * 1000, o.threads);
  model.vote_rule = ensemble::vote_rule_from_string(o.vote_rule);
  model.norm_stats = ds.manifest.norm_stats;
  model.horizon_samples = ds.manifest.config.horizon;
  ensemble::save_ensemble(o.out_dir, model, io::sha256_file(o.dataset));
  for (std::size_t i = 0; i < model.logs.size(); ++i)
    log << "member " << i << ": " << model.logs[i].epochs.size() << " epochs, best epoch "
        << model.logs[i].best_epoch << ", validation loss " << fixed(model.logs[i].best_val_loss) << "\n";
  log << "wrote " << (o.out_dir / "ensemble.json").string() << "\n";
}

void cmd_eval(const EvalOptions& o, std::ostream& log) {
  const auto data = load_dataset(o.dataset);
  const double dt = data.manifest.dt;
  fs::create_directories(o.out_dir);

  auto experiment_config = [&] {
    eval::ExperimentConfig c;
    c.network = o.network;
    c.k = o.k;
    c.num_seeds = o.seeds;
    c.base_seed = o.seed;
    c.threads = o.threads;
    c.horizons.clear();
    for (double h : o.horizons_s) c.horizons.push_back(seconds_to_samples(h, dt, "--horizon"));
    if (o.save_models) c.artifact_dir = o.out_dir / "models";
    return c;
  };

  if (o.grid) {
    eval::SweepBudget budget;
    budget.max_configs = o.max_configs;
    budget.seeds_per_config = o.seeds;
    budget.base_seed = o.seed;
    budget.threads = o.threads;
    auto net = o.network;
    const auto entries = eval::sweep_hyperparameters(data, eval::HyperGrid::from_json(io::read_json(*o.grid)), net,
                                                     budget);
    io::write_json(o.out_dir / "sweep.json", eval::sweep_to_json(entries));
    log << "swept " << entries.size() << " configuration(s); best validation accuracy "
        << fixed(entries.front().val_accuracy.mean) << "\n";
    return;
  }

  if (!o.durations.empty()) {
    const auto rows = eval::sweep_segment_duration(data, o.durations, experiment_config());
    io::json j = io::json::array();
    for (const auto& r : rows) {
      j.push_back({{"segment_length", r.segment_length}, {"seconds", r.seconds}, {"report", r.report.to_json()}});
      log_metrics(log, "N=" + std::to_string(r.segment_length), r.report);
    }
    io::write_json(o.out_dir / "duration.json", j);
    io::write_atomic(o.out_dir / "duration.csv", eval::duration_csv(rows));
    return;
  }

  if (o.experiment) {
    const auto report = eval::run_experiment(data, experiment_config());
    io::write_json(o.out_dir / "report.json", report.to_json());
    for (const auto& [h, rep] : report.per_horizon) {
      log_metrics(log, "horizon " + std::to_string(h) + " samples", rep);
      if (o.stability)
        io::write_atomic(o.out_dir / ("stability_h" + std::to_string(h) + ".csv"), eval::stability_csv(rep));
    }
    if (report.relative) {
      io::write_json(o.out_dir / "relative.json", report.relative->to_json());
      io::write_atomic(o.out_dir / "relative.csv", report.relative->to_csv());
    }
    return;
  }

  require(o.ensemble.has_value(), ErrorKind::InvalidParameter,
          "eval needs --ensemble, or one of --experiment, --durations, --grid");
  require(fs::exists(*o.ensemble), ErrorKind::Io, "ensemble manifest not found: " + o.ensemble->string());
  const auto model = ensemble::load_ensemble(*o.ensemble);
  require(model.segment_length == data.manifest.config.segment_length, ErrorKind::InvalidParameter,
          "ensemble segment length differs from the dataset's");
  require(ensemble::norm_reference(model.norm_stats) == ensemble::norm_reference(data.manifest.norm_stats),
          ErrorKind::InvalidParameter, "ensemble was trained with different normalization statistics");
  const auto ds = model.horizon_samples == data.manifest.config.horizon
                      ? data
                      : dataset::with_horizon(data, model.horizon_samples);
  const auto& segments = o.split == "test" ? ds.splits.test : ds.splits.validation;

  eval::MetricsReport rep;
  rep.horizon_samples = model.horizon_samples;
  rep.horizon_s = static_cast<double>(model.horizon_samples) * dt;
  rep.segment_length = model.segment_length;
  auto run = eval::evaluate(model, *ds.store, segments, o.threads);
  run.seed = model.seeds.front();
  run.ensemble_manifest = o.ensemble->string();
  rep.runs.push_back(std::move(run));
  rep.aggregate();

  eval::ExperimentReport out;
  out.provenance = {{"dataset_sha256", io::sha256_file(o.dataset)},
                    {"ensemble_sha256", io::sha256_file(*o.ensemble)},
                    {"split", o.split},
                    {"k", model.size()},
                    {"vote_rule", ensemble::to_string(model.vote_rule)}};
  out.per_horizon.emplace(rep.horizon_samples, rep);
  const auto& cm = rep.runs.front().cm;
  log << "confusion: tn " << cm.tn << ", fp " << cm.fp << ", fn " << cm.fn << ", tp " << cm.tp << "\n";
  log_metrics(log, o.split, rep);

  if (o.relative_to) {
    auto base = report_from_file(*o.relative_to);
    require(base.horizon_samples == 0, ErrorKind::InvalidParameter, "--relative needs a horizon-0 report");
    std::map<std::size_t, eval::MetricsReport> both{{0, std::move(base)}};
    if (rep.horizon_samples != 0) both.emplace(rep.horizon_samples, rep);
    out.relative = eval::relative_performance(both, dt);
    io::write_json(o.out_dir / "relative.json", out.relative->to_json());
    io::write_atomic(o.out_dir / "relative.csv", out.relative->to_csv());
  }
  io::write_json(o.out_dir / "report.json", out.to_json());
  if (o.stability) io::write_atomic(o.out_dir / "stability.csv", eval::stability_csv(rep.runs.front().stability));
}

void cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream& log) {
  require(o.stride >= 1, ErrorKind::InvalidParameter, "--stride must be at least 1");
  require(fs::exists(o.ensemble), ErrorKind::Io, "ensemble manifest not found: " + o.ensemble.string());
  const auto model = ensemble::load_ensemble(o.ensemble);
  auto detection = o.detection;
  auto preprocess = o.preprocess;
  std::optional<double> manifest_dt;
  if (o.dataset) {
    const auto m = dataset::DatasetManifest::from_json(io::read_json(*o.dataset));
    detection = m.config.detection;
    preprocess = m.config.preprocess;
    manifest_dt = m.dt;
  }
  const auto rec = dataset::load_recording(o.recording);
  if (manifest_dt)
    require(std::abs(rec.dt - *manifest_dt) <= 1e-3 * *manifest_dt, ErrorKind::Format,
            "recording sample interval differs from the dataset's");

  const auto intervals = dataset::detect_camera_movements(rec.camera_position, detection);
  const auto chunks = dataset::stationary_chunks(static_cast<std::int64_t>(rec.size()), intervals);
  const auto n = static_cast<std::int64_t>(model.segment_length);
  const auto ctx = static_cast<std::int64_t>(o.context);
  const std::size_t width = dataset::kFeatureWidth;

  std::ostringstream buffer;
  std::ostream& sink = o.out ? static_cast<std::ostream&>(buffer) : out;
  sink << "end_time,end_sample,positive_votes,final_class\n";

  struct Pending {
    std::int64_t end;
  };
  std::vector<Pending> pending;
  nn::SequenceBatch batch{0, model.segment_length, width, {}};
  std::size_t lines = 0, skipped = 0;
  auto flush = [&] {
    if (pending.empty()) return;
    batch.size = pending.size();
    std::vector<std::vector<double>> probs;
    probs.reserve(model.size());
    for (const auto& net : model.networks) probs.push_back(nn::forward(net, batch, nn::Mode::Infer).probabilities);
    const auto votes = ensemble::votes_from_probabilities(probs, model.size(), model.vote_rule);
    for (std::size_t i = 0; i < pending.size(); ++i) {
      sink << shortest(rec.time[pending[i].end]) << ',' << pending[i].end << ',' << votes[i].positive_votes
           << ',' << votes[i].final_class << '\n';
      ++lines;
    }
    sink.flush();
    pending.clear();
    batch.values.clear();
  };

  for (const auto& chunk : chunks) {
    for (std::int64_t end = chunk.start + n - 1; end < chunk.end; end += static_cast<std::int64_t>(o.stride)) {
      // Only samples up to the window end are filtered.
      const std::int64_t from = std::max(chunk.start, end + 1 - n - ctx);
      if (end + 1 - from < static_cast<std::int64_t>(signal::kFiltfiltMinLength)) {
        ++skipped;
        continue;
      }
      auto build = dataset::build_raw_features(slice(rec, from, end + 1), {}, preprocess);
      dataset::normalize(build.matrices, model.norm_stats);
      const auto& m = build.matrices.front();
      const auto first = m.values.begin() + static_cast<std::ptrdiff_t>((m.rows() - model.segment_length) * width);
      batch.values.insert(batch.values.end(), first, m.values.end());
      pending.push_back({end});
      if (pending.size() == 256) flush();
    }
  }
  flush();
  if (o.out) io::write_atomic(*o.out, buffer.str());
  log << lines << " window(s) over " << chunks.size() << " stationary chunk(s)";
  if (skipped) log << ", " << skipped << " too short to filter";
  log << "\n";
}

}  // namespace camseer::cli
