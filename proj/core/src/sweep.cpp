#include "cffn/sweep.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace cffn {

namespace {

double parse_number(std::string_view text) {
  const std::string s(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == s.size() && !s.empty(), ErrorKind::kConfig, "bad grid number '" + s + "'");
  return value;
}

}  // namespace

std::vector<double> parse_grid(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() == 1) return {parse_number(parts[0])};
  require(parts.size() == 3, ErrorKind::kConfig, "grid must be 'start:stop:step' or one number");
  const double lo = parse_number(parts[0]);
  const double hi = parse_number(parts[1]);
  const double step = parse_number(parts[2]);
  require(step > 0.0 && hi >= lo, ErrorKind::kConfig, "grid needs step > 0 and stop >= start");
  // Index-based to avoid accumulating rounding; stop is inclusive up to 1e-9 * step.
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid;
  for (long k = 0; k < count; ++k) grid.push_back(lo + static_cast<double>(k) * step);
  return grid;
}

std::vector<SweepCell> sweep(const EmbeddingArchive& archive, const DatasetSplit& split, const TrainConfig& base,
                             const std::vector<double>& betas, const std::vector<double>& lambdas,
                             const SweepCallback& on_cell) {
  require(!betas.empty() && !lambdas.empty(), ErrorKind::kConfig, "sweep grids must be non-empty");
  const auto& eval_ids = split.test.empty() ? split.train : split.test;
  std::vector<SweepCell> cells;
  std::uint64_t index = 0;
  for (double beta : betas) {
    for (double lambda : lambdas) {
      SweepCell cell;
      cell.beta = beta;
      cell.lambda = lambda;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        TrainConfig config = base;
        config.beta = beta;
        config.lambda = lambda;
        config.seed = base.seed + index;
        const auto result = train(archive, split, config);
        const auto predictions = predict(result.params, archive, eval_ids, config.forward_options());
        std::vector<Label> truth;
        std::vector<Label> predicted;
        Index consistent = 0;
        Index valid = 0;
        std::size_t said_fake = 0;
        for (const auto& p : predictions) {
          truth.push_back(p.truth);
          predicted.push_back(p.predicted);
          said_fake += p.predicted == Label::kFake ? 1 : 0;
          consistent += p.consistent_pairs;
          valid += p.consistent_pairs + p.candidate_pairs;
        }
        cell.metrics = compute_metrics(truth, predicted);
        cell.fake_prediction_rate = static_cast<double>(said_fake) / static_cast<double>(predictions.size());
        cell.consistent_pair_fraction = valid == 0 ? 0.0 : static_cast<double>(consistent) / static_cast<double>(valid);
        cell.degenerate = valid > 0 && consistent == 0;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (on_cell) on_cell(cell);
      cells.push_back(std::move(cell));
      ++index;
    }
  }
  return cells;
}

nlohmann::json to_json(const SweepCell& cell) {
  nlohmann::json j{{"beta", cell.beta},
                   {"lambda", cell.lambda},
                   {"fake_prediction_rate", cell.fake_prediction_rate},
                   {"consistent_pair_fraction", cell.consistent_pair_fraction},
                   {"degenerate", cell.degenerate}};
  j["metrics"] = cell.metrics ? to_json(*cell.metrics) : nlohmann::json(nullptr);
  j["error"] = cell.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(cell.error);
  return j;
}

nlohmann::json sweep_to_json(const std::vector<SweepCell>& cells) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : cells) rows.push_back(to_json(c));
  return {{"rows", rows}};
}

}  // namespace cffn
