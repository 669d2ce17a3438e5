#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cffn/model.hpp"

namespace cffn {

enum class PairPart { kConsistent, kCandidate };

struct ExplainRow {
  Index word = 0;
  Index region = 0;
  double relevance = 0.0;
  PairPart part = PairPart::kCandidate;
  // s^m_i for consistent rows, s^c_ij for candidate rows; absent when the
  // variant disables that part.
  std::optional<double> score;
};

struct ExplainReport {
  std::string post_id;
  Label label = Label::kReal;
  Label prediction = Label::kReal;
  double prob_fake = 0.0;
  double lambda = 0.0;
  AblationVariant variant = AblationVariant::kFull;
  std::vector<ExplainRow> rows;  // every valid pair, row-major
  std::optional<std::array<double, 2>> w_mc;
  std::vector<ExplainRow> top_inconsistent_pairs;
  std::vector<std::pair<Index, double>> top_consistent_words;  // (word, s^m_i)
};

ExplainReport explain(const ModelParams<float>& params, const PostRecord& post, const ForwardOptions& options,
                      std::size_t top_k);

nlohmann::json to_json(const ExplainReport& report);

}  // namespace cffn
