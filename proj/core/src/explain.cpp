#include "cffn/explain.hpp"

#include <algorithm>

namespace cffn {

ExplainReport explain(const ModelParams<float>& params, const PostRecord& post, const ForwardOptions& options,
                      std::size_t top_k) {
  const auto trace = forward(post, params, options);

  ExplainReport report;
  report.post_id = post.post_id;
  report.label = post.label;
  report.prob_fake = static_cast<double>(trace.prob_fake());
  report.prediction = report.prob_fake >= 0.5 ? Label::kFake : Label::kReal;
  report.lambda = options.lambda;
  report.variant = options.variant;

  // The baseline variant never partitions; report the split it would have used.
  const RelevanceMatrix<float> rel = trace.selection_bypassed()
                                         ? relevance(trace.words(), trace.regions, trace.token_mask)
                                         : trace.relevance;
  const Partition part = trace.selection_bypassed() ? partition(rel, options.lambda) : trace.partition;

  std::vector<std::optional<double>> word_scores(static_cast<std::size_t>(rel.scores.rows()));
  for (std::size_t r = 0; r < trace.consistent.words.size(); ++r) {
    word_scores[static_cast<std::size_t>(trace.consistent.words[r])] =
        static_cast<double>(trace.consistent_scores.scores[static_cast<Index>(r)]);
    report.top_consistent_words.emplace_back(trace.consistent.words[r],
                                             static_cast<double>(trace.consistent_scores.scores[static_cast<Index>(r)]));
  }
  Matrix<double> pair_scores = Matrix<double>::Constant(rel.scores.rows(), rel.scores.cols(), -1.0);
  for (std::size_t k = 0; k < trace.candidates.pairs.size(); ++k) {
    const auto [i, j] = trace.candidates.pairs[k];
    pair_scores(i, j) = static_cast<double>(trace.candidate_scores.scores[static_cast<Index>(k)]);
  }

  for (Index i = 0; i < rel.scores.rows(); ++i) {
    for (Index j = 0; j < rel.scores.cols(); ++j) {
      if (!part.valid(i, j)) continue;
      ExplainRow row;
      row.word = i;
      row.region = j;
      row.relevance = static_cast<double>(rel.scores(i, j));
      row.part = part.consistent(i, j) ? PairPart::kConsistent : PairPart::kCandidate;
      if (row.part == PairPart::kConsistent) {
        row.score = word_scores[static_cast<std::size_t>(i)];
      } else if (pair_scores(i, j) >= 0.0) {
        row.score = pair_scores(i, j);
      }
      report.rows.push_back(row);
    }
  }

  if (!trace.selection_bypassed()) {
    report.w_mc = std::array<double, 2>{static_cast<double>(trace.selection.weights[0]),
                                        static_cast<double>(trace.selection.weights[1])};
  }

  for (const auto& row : report.rows) {
    if (row.part == PairPart::kCandidate && row.score) report.top_inconsistent_pairs.push_back(row);
  }
  std::stable_sort(report.top_inconsistent_pairs.begin(), report.top_inconsistent_pairs.end(),
                   [](const ExplainRow& a, const ExplainRow& b) { return *a.score > *b.score; });
  if (report.top_inconsistent_pairs.size() > top_k) report.top_inconsistent_pairs.resize(top_k);

  std::stable_sort(report.top_consistent_words.begin(), report.top_consistent_words.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (report.top_consistent_words.size() > top_k) report.top_consistent_words.resize(top_k);
  return report;
}

namespace {

nlohmann::json row_json(const ExplainRow& row) {
  nlohmann::json j{{"word", row.word},
                   {"region", row.region},
                   {"relevance", row.relevance},
                   {"part", row.part == PairPart::kConsistent ? "CONSISTENT" : "CANDIDATE"}};
  j["score"] = row.score ? nlohmann::json(*row.score) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

nlohmann::json to_json(const ExplainReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) rows.push_back(row_json(row));
  nlohmann::json top_pairs = nlohmann::json::array();
  for (const auto& row : r.top_inconsistent_pairs) top_pairs.push_back(row_json(row));
  nlohmann::json top_words = nlohmann::json::array();
  for (const auto& [word, s] : r.top_consistent_words) top_words.push_back({{"word", word}, {"score", s}});

  nlohmann::json j{{"post_id", r.post_id},
                   {"label", std::string(to_string(r.label))},
                   {"prediction", std::string(to_string(r.prediction))},
                   {"prob_fake", r.prob_fake},
                   {"lambda", r.lambda},
                   {"variant", std::string(to_string(r.variant))},
                   {"rows", rows},
                   {"top_inconsistent_pairs", top_pairs},
                   {"top_consistent_words", top_words}};
  j["w_mc"] = r.w_mc ? nlohmann::json(*r.w_mc) : nlohmann::json(nullptr);
  return j;
}

}  // namespace cffn
