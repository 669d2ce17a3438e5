#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cffn/trainer.hpp"

namespace cffn {

struct SweepCell {
  double beta = 0.0;
  double lambda = 0.0;
  std::optional<Metrics> metrics;  // empty when the cell failed
  std::string error;
  double seconds = 0.0;
  double fake_prediction_rate = 0.0;
  double consistent_pair_fraction = 0.0;  // |S_m| / valid pairs on the evaluation set
  bool degenerate = false;                // S_m empty for every evaluated post
};

/// Inclusive grid "start:stop:step"; a single number is a one-point grid.
std::vector<double> parse_grid(std::string_view spec);

using SweepCallback = std::function<void(const SweepCell&)>;

/// One train + evaluate per (beta, lambda), beta-major. Cell k trains with
/// seed base.seed + k. Cells evaluate on the test split (train when test is empty). A
/// failing cell records its error and the sweep continues.
std::vector<SweepCell> sweep(const EmbeddingArchive& archive, const DatasetSplit& split, const TrainConfig& base,
                             const std::vector<double>& betas, const std::vector<double>& lambdas,
                             const SweepCallback& on_cell = {});

nlohmann::json to_json(const SweepCell& cell);
nlohmann::json sweep_to_json(const std::vector<SweepCell>& cells);

}  // namespace cffn
