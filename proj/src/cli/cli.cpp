#include "camseer/cli.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "camseer/io.hpp"

namespace camseer::cli {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Format:
    case ErrorKind::NonMonotonicTime:
    case ErrorKind::TooShortInput:
      return 3;
    case ErrorKind::NumericFailure:
      return 4;
    case ErrorKind::InvalidParameter:
    case ErrorKind::InfeasibleSplit:
    case ErrorKind::Infeasible:
    case ErrorKind::ContractViolation:
    case ErrorKind::EmptyGrid:
    case ErrorKind::Io:
      return 2;
  }
  return 2;
}

namespace {

// JSON run configuration. Keys are long option names without dashes. A key
// naming a subcommand holds an object for that subcommand; other keys apply
// to the subcommand being run. Flags given on the command line win.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    return options_json(app, default_also).dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    io::json j;
    try {
      j = io::json::parse(input);
    } catch (const io::json::exception& e) {
      throw CLI::ConversionError("config", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config", "the configuration must be a JSON object");

    std::string active;
    for (const CLI::App* sub : app_->get_subcommands()) active = sub->get_name();

    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      const CLI::App* sub = nullptr;
      try {
        sub = app_->get_subcommand(key);
      } catch (const CLI::OptionNotFound&) {
      }
      if (sub && value.is_object()) {
        if (key != active) continue;
        for (const auto& [k2, v2] : value.items()) items.push_back(item({key}, k2, v2));
      } else {
        items.push_back(item(active.empty() ? std::vector<std::string>{} : std::vector<std::string>{active}, key,
                             value));
      }
    }
    return items;
  }

 private:
  static io::json options_json(const CLI::App* app, bool default_also) {
    io::json j = io::json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& r = opt->results();
        j[name] = r.size() == 1 ? io::json(r.front()) : io::json(r);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    for (const CLI::App* sub : app->get_subcommands()) j[sub->get_name()] = options_json(sub, default_also);
    return j;
  }

  static std::string scalar(const io::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config", "unsupported value " + v.dump());
  }

  static CLI::ConfigItem item(std::vector<std::string> parents, const std::string& name, const io::json& v) {
    CLI::ConfigItem it;
    it.parents = std::move(parents);
    it.name = name;
    if (v.is_array())
      for (const auto& e : v) it.inputs.push_back(scalar(e));
    else
      it.inputs.push_back(scalar(v));
    return it;
  }

  const CLI::App* app_;
};

struct NetworkFlags {
  std::vector<std::size_t> hidden;
  double dropout;
  double recurrent_dropout;

  void add(CLI::App* cmd, nn::NetworkConfig& net) {
    hidden = net.hidden_sizes;
    dropout = net.dropout.empty() ? 0.0 : net.dropout.front();
    recurrent_dropout = net.recurrent_dropout.empty() ? 0.0 : net.recurrent_dropout.front();
    cmd->add_option("--hidden", hidden, "LSTM layer sizes")->capture_default_str()->expected(1, 2);
    cmd->add_option("--dropout", dropout, "dropout after each LSTM block")->capture_default_str();
    cmd->add_option("--recurrent-dropout", recurrent_dropout, "dropout on the recurrent state")
        ->capture_default_str();
    cmd->add_option("--batchnorm", net.num_batchnorm, "number of batch normalization layers")
        ->capture_default_str();
    cmd->add_option("--l2", net.l2_lambda, "L2 weight penalty")->capture_default_str();
    cmd->add_option("--lr", net.learning_rate, "initial Adam learning rate")->capture_default_str();
    cmd->add_option("--decay", net.lr_decay, "per-epoch learning rate decay factor")->capture_default_str();
    cmd->add_option("--batch", net.batch_size, "mini-batch size")->capture_default_str();
    cmd->add_option("--epochs", net.max_epochs, "maximum epochs")->capture_default_str();
    cmd->add_option("--patience", net.patience, "early stopping patience in epochs")->capture_default_str();
  }

  void apply(nn::NetworkConfig& net) const {
    net.hidden_sizes = hidden;
    net.dropout.assign(hidden.size(), dropout);
    net.recurrent_dropout.assign(hidden.size(), recurrent_dropout);
  }
};

void add_detection(CLI::App* cmd, dataset::DetectionConfig& d, dataset::PreprocessConfig& p) {
  cmd->add_option("--v-on", d.v_on, "movement start speed threshold (m/s)")->capture_default_str();
  cmd->add_option("--v-off", d.v_off, "movement end speed threshold (m/s)")->capture_default_str();
  cmd->add_option("--min-duration", d.min_duration_s, "shortest kept movement (s)")->capture_default_str();
  cmd->add_option("--merge-gap", d.merge_gap_s, "movements closer than this are merged (s)")->capture_default_str();
  cmd->add_option("--pos-cutoff", p.position_cutoff_hz, "position low-pass cutoff (Hz)")->capture_default_str();
  cmd->add_option("--vel-cutoff", p.velocity_cutoff_hz, "velocity low-pass cutoff (Hz)")->capture_default_str();
}

class NullBuffer : public std::streambuf {
 protected:
  int overflow(int c) override { return c; }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Predicts endoscopic camera movements from instrument kinematics", "camseer"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.set_config("--config", "", "JSON run configuration");
  int verbose = 0;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "echo the effective configuration before running");
  app.add_flag("-q,--quiet", quiet, "no log output");

  auto* gen = app.add_subcommand("gen", "generate synthetic recordings with ground truth");
  auto& g = rc.gen;
  gen->add_option("--out", g.out_dir, "output directory")->required();
  gen->add_option("--name", g.name, "file stem")->capture_default_str();
  gen->add_option("--count", g.count, "number of recordings (seeds seed, seed+1, ...)")->capture_default_str();
  gen->add_option("--events", g.synth.num_events, "camera movements per recording")->capture_default_str();
  gen->add_option("--duration", g.synth.duration_s, "recording length (s)")->capture_default_str();
  gen->add_option("--dt", g.synth.dt, "sample interval (s)")->capture_default_str();
  gen->add_option("--gap", g.synth.min_event_gap_s, "minimum time between onsets (s)")->capture_default_str();
  gen->add_option("--signature", g.synth.signature_strength, "pre-movement signature strength")
      ->capture_default_str();
  gen->add_option("--window", g.synth.signature_window_s, "signature window before onsets (s)")
      ->capture_default_str();
  gen->add_option("--noise", g.synth.noise_std, "instrument position noise (m)")->capture_default_str();
  gen->add_option("--gripper-noise", g.synth.gripper_noise_std, "gripper angle noise (rad)")->capture_default_str();
  gen->add_option("--speed-cap", g.synth.speed_cap, "instrument speed bound (m/s)")->capture_default_str();
  gen->add_option("--seed", g.synth.seed, "random seed")->capture_default_str();

  auto* prep = app.add_subcommand("prepare", "detect movements, build features, segment and split");
  auto& p = rc.prepare;
  prep->add_option("--input,-i", p.inputs, "recording CSV files or directories")->required()->check(CLI::ExistingPath);
  prep->add_option("--out", p.out_dir, "output directory")->required();
  prep->add_option("--n", p.segment_lengths, "segment length(s) in samples")->capture_default_str();
  prep->add_option("--horizon", p.horizon_s, "advance horizon (s)")->capture_default_str();
  prep->add_option("--guard", p.config.guard, "negative guard distance (samples)")->capture_default_str();
  prep->add_option("--test-frac", p.config.test_frac, "positive fraction held out for test")->capture_default_str();
  prep->add_option("--val-frac", p.config.val_frac, "fraction of remaining positives for validation")
      ->capture_default_str();
  prep->add_option("--seed", p.config.seed, "split seed")->capture_default_str();
  prep->add_option("--group-guard", p.config.group_guard_gap,
                   "drop train segments ending within this many samples of a held-out one (0 = off)")
      ->capture_default_str();
  prep->add_flag("--archive", p.write_archive, "also write the held-out segments as a binary archive");
  add_detection(prep, p.config.detection, p.config.preprocess);

  auto* train = app.add_subcommand("train", "train a balanced-subset ensemble");
  auto& t = rc.train;
  NetworkFlags train_net;
  train->add_option("--dataset", t.dataset, "dataset manifest")->required();
  train->add_option("--out", t.out_dir, "output directory")->required();
  train->add_option("--k", t.k, "ensemble size")->capture_default_str();
  train->add_option("--seed", t.seed, "run seed")->capture_default_str();
  train->add_option("--vote", t.vote_rule, "majority or mean-probability")
      ->check(CLI::IsMember({"majority", "mean-probability"}))
      ->capture_default_str();
  train->add_flag("--unbalanced", t.unbalanced, "single network on the whole train pool (needs --k 1)");
  train->add_option("--threads", t.threads, "worker threads (0 = CAMSEER_THREADS or all cores)");
  train_net.add(train, t.network);

  auto* ev = app.add_subcommand("eval", "evaluate ensembles and run experiments");
  auto& e = rc.eval;
  NetworkFlags eval_net;
  ev->add_option("--dataset", e.dataset, "dataset manifest")->required();
  ev->add_option("--ensemble", e.ensemble, "ensemble manifest to evaluate");
  ev->add_option("--out", e.out_dir, "output directory")->required();
  ev->add_option("--split", e.split, "test or validation")
      ->check(CLI::IsMember({"test", "validation"}))
      ->capture_default_str();
  ev->add_flag("--stability", e.stability, "write the accuracy-vs-ensemble-size curve");
  ev->add_option("--relative", e.relative_to, "horizon-0 report to compare against");
  ev->add_flag("--experiment", e.experiment, "train and evaluate ensembles over seeds and horizons");
  ev->add_option("--k", e.k, "ensemble size (experiment mode)")->capture_default_str();
  ev->add_option("--seeds", e.seeds, "number of seeds (experiment mode)")->capture_default_str();
  ev->add_option("--seed", e.seed, "first seed (experiment mode)")->capture_default_str();
  ev->add_option("--horizon", e.horizons_s, "horizons in seconds (experiment mode)")->capture_default_str();
  ev->add_option("--durations", e.durations, "segment lengths to sweep (samples)");
  ev->add_option("--grid", e.grid, "hyperparameter grid JSON to sweep");
  ev->add_option("--max-configs", e.max_configs, "cap on swept grid points (0 = all)");
  ev->add_flag("--save-models", e.save_models, "keep trained ensembles under the output directory");
  ev->add_option("--threads", e.threads, "worker threads (0 = CAMSEER_THREADS or all cores)");
  eval_net.add(ev, e.network);

  auto* pred = app.add_subcommand("predict", "stream ensemble votes over a recording");
  auto& pr = rc.predict;
  pred->add_option("--recording", pr.recording, "recording CSV")->required();
  pred->add_option("--ensemble", pr.ensemble, "ensemble manifest")->required();
  pred->add_option("--dataset", pr.dataset, "dataset manifest supplying detection and filter settings");
  pred->add_option("--out", pr.out, "output CSV (default stdout)");
  pred->add_option("--stride", pr.stride, "window stride (samples)")->capture_default_str();
  pred->add_option("--context", pr.context, "extra past samples filtered with each window")->capture_default_str();
  add_detection(pred, pr.detection, pr.preprocess);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? 0 : 2;
  }

  rc.verbosity = quiet ? 0 : 1 + verbose;
  NullBuffer null_buf;
  std::ostream null_stream(&null_buf);
  std::ostream& log = rc.verbosity == 0 ? null_stream : err;
  if (rc.verbosity >= 2) log << app.config_to_str(true, true);
  try {
    if (*gen) {
      cmd_gen(g, log);
    } else if (*prep) {
      cmd_prepare(p, log);
    } else if (*train) {
      train_net.apply(t.network);
      cmd_train(t, log);
    } else if (*ev) {
      eval_net.apply(e.network);
      cmd_eval(e, log);
    } else if (*pred) {
      cmd_predict(pr, out, log);
    }
  } catch (const Error& ex) {
    err << "error: " << to_string(ex.kind()) << ": " << ex.what() << "\n";
    return exit_code(ex.kind());
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace camseer::cli
