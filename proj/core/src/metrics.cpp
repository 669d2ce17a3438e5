#include "cffn/metrics.hpp"

namespace cffn {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  const double sum = m.precision + m.recall;
  m.f1 = sum == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / sum;
  return m;
}

}  // namespace

Metrics metrics_from_counts(const ConfusionCounts& c) {
  Metrics m;
  m.counts = c;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.fake = class_metrics(c.tp, c.fp, c.fn);
  m.real = class_metrics(c.tn, c.fn, c.fp);
  return m;
}

Metrics compute_metrics(const std::vector<Label>& truth, const std::vector<Label>& predicted) {
  require_dims(truth.size() == predicted.size(), "truth and prediction lists differ in length");
  require(!truth.empty(), ErrorKind::kValidation, "no predictions to score");
  ConfusionCounts c;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const bool fake = truth[k] == Label::kFake;
    const bool said_fake = predicted[k] == Label::kFake;
    if (fake && said_fake) ++c.tp;
    else if (!fake && said_fake) ++c.fp;
    else if (fake) ++c.fn;
    else ++c.tn;
  }
  return metrics_from_counts(c);
}

nlohmann::json to_json(const Metrics& m) {
  auto cls = [](const ClassMetrics& c) {
    return nlohmann::json{{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
  };
  return {{"accuracy", m.accuracy},
          {"fake", cls(m.fake)},
          {"real", cls(m.real)},
          {"confusion", {{"tp", m.counts.tp}, {"fp", m.counts.fp}, {"fn", m.counts.fn}, {"tn", m.counts.tn}}}};
}

}  // namespace cffn
