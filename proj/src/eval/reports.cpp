#include <cmath>
#include <sstream>

#include "camseer/error.hpp"
#include "camseer/eval.hpp"

namespace camseer::eval {

namespace {

io::json summary_json(const Summary& s) {
  io::json j;
  j["mean"] = std::isnan(s.mean) ? io::json(nullptr) : io::json(s.mean);
  j["std"] = std::isnan(s.std) ? io::json(nullptr) : io::json(s.std);
  j["runs"] = s.count;
  return j;
}

std::string csv_cell(const Ratio& r) { return r.defined() ? io::format_g17(*r.value) : "nan"; }

}  // namespace

void MetricsReport::aggregate() {
  std::vector<double> a, p, n;
  for (const auto& r : runs) {
    a.push_back(r.m.accuracy.value_or_nan());
    p.push_back(r.m.tpr.value_or_nan());
    n.push_back(r.m.tnr.value_or_nan());
  }
  accuracy = summarize(a);
  tpr = summarize(p);
  tnr = summarize(n);
}

io::json MetricsReport::to_json() const {
  io::json j;
  j["horizon_samples"] = horizon_samples;
  j["horizon_s"] = horizon_s;
  j["segment_length"] = segment_length;
  j["accuracy"] = summary_json(accuracy);
  j["tpr"] = summary_json(tpr);
  j["tnr"] = summary_json(tnr);
  j["runs"] = io::json::array();
  for (const auto& r : runs) {
    io::json rj;
    rj["seed"] = r.seed;
    rj["confusion"] = r.cm.to_json();
    rj["accuracy"] = r.m.accuracy.to_json();
    rj["tpr"] = r.m.tpr.to_json();
    rj["tnr"] = r.m.tnr.to_json();
    rj["stability"] = r.stability;
    if (!r.ensemble_manifest.empty()) rj["ensemble_manifest"] = r.ensemble_manifest;
    j["runs"].push_back(std::move(rj));
  }
  return j;
}

RelativeReport relative_performance(const std::map<std::size_t, MetricsReport>& reports, double dt) {
  const auto base = reports.find(0);
  require(base != reports.end(), ErrorKind::InvalidParameter, "relative performance needs the horizon-0 report");
  auto pct = [](const Summary& h, const Summary& b, const char* name) {
    if (std::isnan(b.mean) || b.mean == 0.0)
      return Ratio{std::nullopt, std::string("horizon-0 ") + name + " is zero or undefined"};
    if (std::isnan(h.mean)) return Ratio{std::nullopt, std::string(name) + " undefined at this horizon"};
    return Ratio{100.0 * h.mean / b.mean, {}};
  };
  RelativeReport out;
  for (const auto& [h, rep] : reports)
    out.rows.push_back({h, static_cast<double>(h) * dt, pct(rep.accuracy, base->second.accuracy, "accuracy"),
                        pct(rep.tpr, base->second.tpr, "tpr"), pct(rep.tnr, base->second.tnr, "tnr")});
  return out;
}

io::json RelativeReport::to_json() const {
  io::json arr = io::json::array();
  for (const auto& r : rows)
    arr.push_back({{"horizon_samples", r.horizon_samples},
                   {"horizon_s", r.horizon_s},
                   {"accuracy_pct", r.accuracy_pct.to_json()},
                   {"tpr_pct", r.tpr_pct.to_json()},
                   {"tnr_pct", r.tnr_pct.to_json()}});
  return arr;
}

std::string RelativeReport::to_csv() const {
  std::ostringstream os;
  os << "horizon_samples,horizon_s,accuracy_pct,tpr_pct,tnr_pct\n";
  for (const auto& r : rows)
    os << r.horizon_samples << ',' << io::format_g17(r.horizon_s) << ',' << csv_cell(r.accuracy_pct) << ','
       << csv_cell(r.tpr_pct) << ',' << csv_cell(r.tnr_pct) << '\n';
  return os.str();
}

io::json ExperimentConfig::to_json() const {
  io::json j;
  j["network"] = network.to_json();
  j["k"] = k;
  j["horizons"] = horizons;
  j["num_seeds"] = num_seeds;
  j["base_seed"] = base_seed;
  j["vote_rule"] = ensemble::to_string(vote_rule);
  j["balanced"] = balanced;
  return j;
}

io::json ExperimentReport::to_json() const {
  io::json j;
  j["format"] = "camseer-report";
  j["provenance"] = provenance;
  j["horizons"] = io::json::array();
  for (const auto& [h, rep] : per_horizon) j["horizons"].push_back(rep.to_json());
  if (relative) j["relative"] = relative->to_json();
  return j;
}

std::string duration_csv(std::span<const DurationRow> rows) {
  std::ostringstream os;
  os << "segment_length,seconds,accuracy_mean,accuracy_std,tpr_mean,tpr_std,tnr_mean,tnr_std\n";
  for (const auto& r : rows) {
    const auto& m = r.report;
    os << r.segment_length << ',' << io::format_g17(r.seconds) << ',' << io::format_g17(m.accuracy.mean) << ','
       << io::format_g17(m.accuracy.std) << ',' << io::format_g17(m.tpr.mean) << ',' << io::format_g17(m.tpr.std)
       << ',' << io::format_g17(m.tnr.mean) << ',' << io::format_g17(m.tnr.std) << '\n';
  }
  return os.str();
}

std::string stability_csv(std::span<const double> curve) {
  std::ostringstream os;
  os << "k,accuracy\n";
  for (std::size_t i = 0; i < curve.size(); ++i) os << i + 1 << ',' << io::format_g17(curve[i]) << '\n';
  return os.str();
}

std::string stability_csv(const MetricsReport& report) {
  std::ostringstream os;
  os << "seed,k,accuracy\n";
  for (const auto& r : report.runs)
    for (std::size_t i = 0; i < r.stability.size(); ++i)
      os << r.seed << ',' << i + 1 << ',' << io::format_g17(r.stability[i]) << '\n';
  return os.str();
}

io::json sweep_to_json(std::span<const SweepEntry> entries) {
  io::json arr = io::json::array();
  for (std::size_t rank = 0; rank < entries.size(); ++rank) {
    const auto& e = entries[rank];
    arr.push_back({{"rank", rank + 1},
                   {"grid_index", e.grid_index},
                   {"config", e.config.to_json()},
                   {"val_accuracy", summary_json(e.val_accuracy)},
                   {"val_tpr", summary_json(e.val_tpr)},
                   {"val_tnr", summary_json(e.val_tnr)}});
  }
  return arr;
}

}  // namespace camseer::eval
