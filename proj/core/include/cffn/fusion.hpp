#pragma once

#include <utility>
#include <vector>

#include "cffn/affine.hpp"

namespace cffn {

/// Cosine relevance between projected words and regions. Padding rows are
/// marked invalid and hold zero scores.
template <typename Real>
struct RelevanceMatrix {
  Matrix<Real> scores;  // N x M
  std::vector<bool> valid_rows;
  Matrix<Real> unit_words;
  Matrix<Real> unit_regions;
  Vector<Real> word_norms;
  Vector<Real> region_norms;
};

inline constexpr double kMinFeatureNorm = 1e-12;

template <typename Real>
RelevanceMatrix<Real> relevance(const Matrix<Real>& words, const Matrix<Real>& regions,
                                const std::vector<bool>& token_mask);

/// Accumulates dL/dT and dL/dV given dL/dS.
template <typename Real>
void relevance_backward(const RelevanceMatrix<Real>& rel, const Matrix<Real>& d_scores, Matrix<Real>& d_words,
                        Matrix<Real>& d_regions);

/// Split of the valid word-region pairs at threshold lambda: S_ij > lambda is
/// consistent, everything else valid is an inconsistency candidate.
struct Partition {
  double lambda = 0.0;
  BoolGrid consistent;
  BoolGrid valid;

  Index consistent_count() const { return consistent.count(); }
  Index candidate_count() const { return valid.count() - consistent.count(); }
  bool candidate(Index i, Index j) const { return valid(i, j) && !consistent(i, j); }
};

void validate_lambda(double lambda);

template <typename Real>
Partition partition(const RelevanceMatrix<Real>& rel, double lambda);

/// Same rule on a bare score matrix; rows with valid_rows[i] == false are excluded.
template <typename Real>
Partition partition_scores(const Matrix<Real>& scores, const std::vector<bool>& valid_rows, double lambda);

/// Word-queried attention restricted to each word's consistent regions, plus
/// the word residual. Words without a consistent region are omitted.
template <typename Real>
struct ConsistentFusion {
  std::vector<Index> words;
  std::vector<std::vector<Index>> columns;
  std::vector<Vector<Real>> weights;
  Matrix<Real> fused;  // one row per entry of `words`
};

template <typename Real>
ConsistentFusion<Real> fuse_consistent(const Matrix<Real>& words, const Matrix<Real>& regions,
                                       const Matrix<Real>& scores, const Partition& partition);

template <typename Real>
void fuse_consistent_backward(const ConsistentFusion<Real>& fusion, const Matrix<Real>& regions,
                              const Matrix<Real>& d_fused, Matrix<Real>& d_words, Matrix<Real>& d_regions,
                              Matrix<Real>& d_scores);

/// c_ij = t_i + v_j for every candidate pair, row-major order.
template <typename Real>
struct CandidateSet {
  std::vector<std::pair<Index, Index>> pairs;
  Matrix<Real> reps;
};

template <typename Real>
CandidateSet<Real> candidate_reps(const Matrix<Real>& words, const Matrix<Real>& regions,
                                  const Partition& partition);

template <typename Real>
void candidate_reps_backward(const CandidateSet<Real>& set, const Matrix<Real>& d_reps, Matrix<Real>& d_words,
                             Matrix<Real>& d_regions);

/// sigmoid(output(tanh(hidden(x)))).
template <typename Real>
struct ScoringMlp {
  Affine<Real> hidden;  // d -> d_m
  Affine<Real> output;  // d_m -> 1

  template <typename To>
  ScoringMlp<To> cast() const {
    return {hidden.template cast<To>(), output.template cast<To>()};
  }
};

template <typename Real>
struct FusionParams {
  ScoringMlp<Real> inconsistency;
  ScoringMlp<Real> consistency;

  static FusionParams zeros(Index d, Index d_m) {
    return {{Affine<Real>::zeros(d, d_m), Affine<Real>::zeros(d_m, 1)},
            {Affine<Real>::zeros(d, d_m), Affine<Real>::zeros(d_m, 1)}};
  }
  template <typename Rng>
  static FusionParams glorot(Index d, Index d_m, Rng& rng) {
    FusionParams p;
    p.inconsistency = {Affine<Real>::glorot(d, d_m, rng), Affine<Real>::glorot(d_m, 1, rng)};
    p.consistency = {Affine<Real>::glorot(d, d_m, rng), Affine<Real>::glorot(d_m, 1, rng)};
    return p;
  }

  template <typename F>
  void for_each(F&& f) {
    f("fusion.inconsistency_mlp.hidden.weight", inconsistency.hidden.weight);
    f("fusion.inconsistency_mlp.hidden.bias", inconsistency.hidden.bias);
    f("fusion.inconsistency_mlp.output.weight", inconsistency.output.weight);
    f("fusion.inconsistency_mlp.output.bias", inconsistency.output.bias);
    f("fusion.consistency_mlp.hidden.weight", consistency.hidden.weight);
    f("fusion.consistency_mlp.hidden.bias", consistency.hidden.bias);
    f("fusion.consistency_mlp.output.weight", consistency.output.weight);
    f("fusion.consistency_mlp.output.bias", consistency.output.bias);
  }
};

template <typename Real>
struct MlpScores {
  Matrix<Real> hidden;  // tanh activations, P x d_m
  Vector<Real> scores;  // P values in (0, 1)
};

template <typename Real>
MlpScores<Real> score(const Matrix<Real>& reps, const ScoringMlp<Real>& mlp);

/// Returns dL/dreps and accumulates MLP gradients.
template <typename Real>
Matrix<Real> score_backward(const Matrix<Real>& reps, const MlpScores<Real>& out, const Vector<Real>& d_scores,
                            const ScoringMlp<Real>& mlp, ScoringMlp<Real>& grad);

template <typename Real>
struct PartRepresentation {
  Vector<Real> z_m;
  Vector<Real> z_c;
  Index consistent_count = 0;
  Index candidate_count = 0;
};

/// Unnormalized score-weighted sums; an empty part yields the zero vector.
template <typename Real>
PartRepresentation<Real> aggregate_parts(const Matrix<Real>& fused, const Vector<Real>& consistent_scores,
                                         const Matrix<Real>& reps, const Vector<Real>& candidate_scores,
                                         Index dim);

template <typename Real>
struct AggregateGradients {
  Matrix<Real> d_fused;
  Vector<Real> d_consistent_scores;
  Matrix<Real> d_reps;
  Vector<Real> d_candidate_scores;
};

template <typename Real>
AggregateGradients<Real> aggregate_parts_backward(const Matrix<Real>& fused, const Vector<Real>& consistent_scores,
                                                  const Matrix<Real>& reps, const Vector<Real>& candidate_scores,
                                                  const Vector<Real>& d_z_m, const Vector<Real>& d_z_c);

/// Plain word-to-all-regions attention: softmax_j(t_i . v_j) weighted sum of v_j.
template <typename Real>
struct BaselineAttention {
  Matrix<Real> weights;  // N x M
  Matrix<Real> output;   // N x d
};

template <typename Real>
BaselineAttention<Real> cross_attention_baseline(const Matrix<Real>& words, const Matrix<Real>& regions);

template <typename Real>
void cross_attention_baseline_backward(const BaselineAttention<Real>& att, const Matrix<Real>& words,
                                       const Matrix<Real>& regions, const Matrix<Real>& d_output,
                                       Matrix<Real>& d_words, Matrix<Real>& d_regions);

template <typename Real>
Real sigmoid(Real x) {
  if (x >= Real(0)) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

}  // namespace cffn
