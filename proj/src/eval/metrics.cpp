#include <cmath>
#include <limits>

#include "camseer/error.hpp"
#include "camseer/eval.hpp"

namespace camseer::eval {

io::json ConfusionMatrix::to_json() const { return {{"tn", tn}, {"fp", fp}, {"fn", fn}, {"tp", tp}}; }

ConfusionMatrix ConfusionMatrix::from_json(const io::json& j) {
  return {j.at("tn").get<std::size_t>(), j.at("fp").get<std::size_t>(), j.at("fn").get<std::size_t>(),
          j.at("tp").get<std::size_t>()};
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> truths) {
  require(predictions.size() == truths.size() && !truths.empty(), ErrorKind::ContractViolation,
          "confusion needs equally long, non-empty prediction and truth vectors");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int p = predictions[i];
    const int t = truths[i];
    require((p == 0 || p == 1) && (t == 0 || t == 1), ErrorKind::ContractViolation, "labels must be 0 or 1");
    if (t == 1)
      (p == 1 ? cm.tp : cm.fn)++;
    else
      (p == 1 ? cm.fp : cm.tn)++;
  }
  return cm;
}

double Ratio::value_or_nan() const { return value ? *value : std::numeric_limits<double>::quiet_NaN(); }

io::json Ratio::to_json() const {
  if (value) return *value;
  return {{"undefined", reason}};
}

Ratio Ratio::of(double num, double den, const char* reason_if_undefined) {
  if (den == 0.0) return {std::nullopt, reason_if_undefined};
  return {num / den, {}};
}

Metrics metrics(const ConfusionMatrix& cm) {
  const auto d = [](std::size_t x) { return static_cast<double>(x); };
  return {Ratio::of(d(cm.tn + cm.tp), d(cm.total()), "no evaluated segments"),
          Ratio::of(d(cm.tp), d(cm.positives()), "no positive segments (tp + fn = 0)"),
          Ratio::of(d(cm.tn), d(cm.negatives()), "no negative segments (tn + fp = 0)")};
}

Summary summarize(std::span<const double> values) {
  Summary s;
  double sum = 0.0;
  for (double v : values)
    if (!std::isnan(v)) {
      sum += v;
      ++s.count;
    }
  if (s.count == 0) {
    s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values)
      if (!std::isnan(v)) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

}  // namespace camseer::eval
