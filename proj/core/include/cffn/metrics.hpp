#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "cffn/record.hpp"

namespace cffn {

/// Confusion counts with FAKE as the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Metrics {
  double accuracy = 0.0;
  ClassMetrics fake;
  ClassMetrics real;
  ConfusionCounts counts;
};

Metrics metrics_from_counts(const ConfusionCounts& counts);
Metrics compute_metrics(const std::vector<Label>& truth, const std::vector<Label>& predicted);

nlohmann::json to_json(const Metrics& m);

}  // namespace cffn
