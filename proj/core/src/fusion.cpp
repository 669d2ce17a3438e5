#include "cffn/fusion.hpp"

#include <cmath>

namespace cffn {

namespace {

template <typename Real>
Vector<Real> softmax(const Vector<Real>& logits) {
  const Real top = logits.maxCoeff();
  Vector<Real> e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

// dL/dlogits for a softmax given its output and dL/doutput.
template <typename Real>
Vector<Real> softmax_backward(const Vector<Real>& probs, const Vector<Real>& d_probs) {
  const Real inner = probs.dot(d_probs);
  return probs.cwiseProduct((d_probs.array() - inner).matrix());
}

}  // namespace

template <typename Real>
RelevanceMatrix<Real> relevance(const Matrix<Real>& words, const Matrix<Real>& regions,
                                const std::vector<bool>& token_mask) {
  require_dims(words.cols() == regions.cols(), "words and regions live in different spaces");
  require_dims(static_cast<Index>(token_mask.size()) == words.rows(), "token mask length differs from N");

  RelevanceMatrix<Real> rel;
  rel.valid_rows = token_mask;
  rel.word_norms = words.rowwise().norm();
  rel.region_norms = regions.rowwise().norm();
  rel.unit_words = Matrix<Real>::Zero(words.rows(), words.cols());
  for (Index i = 0; i < words.rows(); ++i) {
    if (!token_mask[static_cast<std::size_t>(i)]) continue;
    require(rel.word_norms[i] >= kMinFeatureNorm, ErrorKind::kDegenerateInput,
            "content word " + std::to_string(i) + " has a zero-norm feature");
    rel.unit_words.row(i) = words.row(i) / rel.word_norms[i];
  }
  for (Index j = 0; j < regions.rows(); ++j) {
    require(rel.region_norms[j] >= kMinFeatureNorm, ErrorKind::kDegenerateInput,
            "region " + std::to_string(j) + " has a zero-norm feature");
  }
  rel.unit_regions = regions.array().colwise() / rel.region_norms.array();
  rel.scores = rel.unit_words * rel.unit_regions.transpose();
  return rel;
}

template <typename Real>
void relevance_backward(const RelevanceMatrix<Real>& rel, const Matrix<Real>& d_scores, Matrix<Real>& d_words,
                        Matrix<Real>& d_regions) {
  // d cos(t, v) / dt = (v_hat - cos * t_hat) / |t|
  const Matrix<Real> d_unit_words = d_scores * rel.unit_regions;
  const Matrix<Real> d_unit_regions = d_scores.transpose() * rel.unit_words;
  for (Index i = 0; i < d_unit_words.rows(); ++i) {
    if (!rel.valid_rows[static_cast<std::size_t>(i)]) continue;
    const auto u = rel.unit_words.row(i);
    const auto g = d_unit_words.row(i);
    d_words.row(i) += (g - g.dot(u) * u) / rel.word_norms[i];
  }
  for (Index j = 0; j < d_unit_regions.rows(); ++j) {
    const auto u = rel.unit_regions.row(j);
    const auto g = d_unit_regions.row(j);
    d_regions.row(j) += (g - g.dot(u) * u) / rel.region_norms[j];
  }
}

void validate_lambda(double lambda) {
  require(lambda >= 0.0 && lambda < 1.0, ErrorKind::kConfig,
          "lambda must lie in [0, 1), got " + std::to_string(lambda));
}

template <typename Real>
Partition partition_scores(const Matrix<Real>& scores, const std::vector<bool>& valid_rows, double lambda) {
  validate_lambda(lambda);
  require_dims(static_cast<Index>(valid_rows.size()) == scores.rows(), "valid row flags differ from N");
  Partition p;
  p.lambda = lambda;
  p.consistent = BoolGrid(scores.rows(), scores.cols());
  p.valid = BoolGrid(scores.rows(), scores.cols());
  for (Index i = 0; i < scores.rows(); ++i) {
    if (!valid_rows[static_cast<std::size_t>(i)]) continue;
    for (Index j = 0; j < scores.cols(); ++j) {
      p.valid.set(i, j, true);
      // Ties stay in the candidate part.
      p.consistent.set(i, j, static_cast<double>(scores(i, j)) > lambda);
    }
  }
  return p;
}

template <typename Real>
Partition partition(const RelevanceMatrix<Real>& rel, double lambda) {
  return partition_scores(rel.scores, rel.valid_rows, lambda);
}

template <typename Real>
ConsistentFusion<Real> fuse_consistent(const Matrix<Real>& words, const Matrix<Real>& regions,
                                       const Matrix<Real>& scores, const Partition& partition) {
  require_dims(words.cols() == regions.cols(), "words and regions live in different spaces");
  require_dims(scores.rows() == words.rows() && scores.cols() == regions.rows() &&
                   partition.valid.rows() == words.rows() && partition.valid.cols() == regions.rows(),
               "relevance/partition shape differs from N x M");

  ConsistentFusion<Real> out;
  std::vector<Vector<Real>> rows;
  for (Index i = 0; i < words.rows(); ++i) {
    std::vector<Index> cols;
    for (Index j = 0; j < regions.rows(); ++j) {
      if (partition.consistent(i, j)) cols.push_back(j);
    }
    if (cols.empty()) continue;

    Vector<Real> logits(static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) logits[static_cast<Index>(k)] = scores(i, cols[k]);
    Vector<Real> weights = softmax(logits);

    Vector<Real> fused = words.row(i).transpose();
    for (std::size_t k = 0; k < cols.size(); ++k) fused += weights[static_cast<Index>(k)] * regions.row(cols[k]).transpose();

    out.words.push_back(i);
    out.columns.push_back(std::move(cols));
    out.weights.push_back(std::move(weights));
    rows.push_back(std::move(fused));
  }
  out.fused.resize(static_cast<Index>(rows.size()), words.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.fused.row(static_cast<Index>(r)) = rows[r].transpose();
  return out;
}

template <typename Real>
void fuse_consistent_backward(const ConsistentFusion<Real>& fusion, const Matrix<Real>& regions,
                              const Matrix<Real>& d_fused, Matrix<Real>& d_words, Matrix<Real>& d_regions,
                              Matrix<Real>& d_scores) {
  for (std::size_t r = 0; r < fusion.words.size(); ++r) {
    const Index i = fusion.words[r];
    const auto& cols = fusion.columns[r];
    const auto& weights = fusion.weights[r];
    const auto g = d_fused.row(static_cast<Index>(r));

    d_words.row(i) += g;
    Vector<Real> d_weights(static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto kk = static_cast<Index>(k);
      d_regions.row(cols[k]) += weights[kk] * g;
      d_weights[kk] = g.dot(regions.row(cols[k]));
    }
    const Vector<Real> d_logits = softmax_backward(weights, d_weights);
    for (std::size_t k = 0; k < cols.size(); ++k) d_scores(i, cols[k]) += d_logits[static_cast<Index>(k)];
  }
}

template <typename Real>
CandidateSet<Real> candidate_reps(const Matrix<Real>& words, const Matrix<Real>& regions,
                                  const Partition& partition) {
  require_dims(words.cols() == regions.cols(), "words and regions live in different spaces");
  require_dims(partition.valid.rows() == words.rows() && partition.valid.cols() == regions.rows(),
               "partition shape differs from N x M");
  CandidateSet<Real> set;
  for (Index i = 0; i < words.rows(); ++i) {
    for (Index j = 0; j < regions.rows(); ++j) {
      if (partition.candidate(i, j)) set.pairs.emplace_back(i, j);
    }
  }
  set.reps.resize(static_cast<Index>(set.pairs.size()), words.cols());
  for (std::size_t k = 0; k < set.pairs.size(); ++k) {
    const auto [i, j] = set.pairs[k];
    set.reps.row(static_cast<Index>(k)) = words.row(i) + regions.row(j);
  }
  return set;
}

template <typename Real>
void candidate_reps_backward(const CandidateSet<Real>& set, const Matrix<Real>& d_reps, Matrix<Real>& d_words,
                             Matrix<Real>& d_regions) {
  for (std::size_t k = 0; k < set.pairs.size(); ++k) {
    const auto [i, j] = set.pairs[k];
    d_words.row(i) += d_reps.row(static_cast<Index>(k));
    d_regions.row(j) += d_reps.row(static_cast<Index>(k));
  }
}

template <typename Real>
MlpScores<Real> score(const Matrix<Real>& reps, const ScoringMlp<Real>& mlp) {
  require_dims(mlp.output.in_dim() == mlp.hidden.out_dim() && mlp.output.out_dim() == 1,
               "scoring MLP layers do not chain to a scalar");
  MlpScores<Real> out;
  out.hidden = mlp.hidden.apply(reps).array().tanh().matrix();
  const Matrix<Real> logits = mlp.output.apply(out.hidden);
  out.scores.resize(reps.rows());
  for (Index k = 0; k < reps.rows(); ++k) out.scores[k] = sigmoid(logits(k, 0));
  return out;
}

template <typename Real>
Matrix<Real> score_backward(const Matrix<Real>& reps, const MlpScores<Real>& out, const Vector<Real>& d_scores,
                            const ScoringMlp<Real>& mlp, ScoringMlp<Real>& grad) {
  const Matrix<Real> d_logits =
      d_scores.cwiseProduct(out.scores.cwiseProduct((Real(1) - out.scores.array()).matrix()));
  const Matrix<Real> d_hidden = mlp.output.backward(out.hidden, d_logits, grad.output);
  const Matrix<Real> d_pre = d_hidden.cwiseProduct((Real(1) - out.hidden.array().square()).matrix());
  return mlp.hidden.backward(reps, d_pre, grad.hidden);
}

template <typename Real>
PartRepresentation<Real> aggregate_parts(const Matrix<Real>& fused, const Vector<Real>& consistent_scores,
                                         const Matrix<Real>& reps, const Vector<Real>& candidate_scores,
                                         Index dim) {
  require_dims(fused.rows() == consistent_scores.size(), "consistent scores do not align with fused words");
  require_dims(reps.rows() == candidate_scores.size(), "candidate scores do not align with candidate pairs");
  require_dims((fused.rows() == 0 || fused.cols() == dim) && (reps.rows() == 0 || reps.cols() == dim),
               "part representations have the wrong width");
  PartRepresentation<Real> parts;
  parts.z_m = fused.rows() == 0 ? Vector<Real>::Zero(dim) : Vector<Real>(fused.transpose() * consistent_scores);
  parts.z_c = reps.rows() == 0 ? Vector<Real>::Zero(dim) : Vector<Real>(reps.transpose() * candidate_scores);
  return parts;
}

template <typename Real>
AggregateGradients<Real> aggregate_parts_backward(const Matrix<Real>& fused, const Vector<Real>& consistent_scores,
                                                  const Matrix<Real>& reps, const Vector<Real>& candidate_scores,
                                                  const Vector<Real>& d_z_m, const Vector<Real>& d_z_c) {
  AggregateGradients<Real> g;
  g.d_fused = consistent_scores * d_z_m.transpose();
  g.d_consistent_scores = fused * d_z_m;
  g.d_reps = candidate_scores * d_z_c.transpose();
  g.d_candidate_scores = reps * d_z_c;
  return g;
}

template <typename Real>
BaselineAttention<Real> cross_attention_baseline(const Matrix<Real>& words, const Matrix<Real>& regions) {
  require_dims(words.cols() == regions.cols(), "words and regions live in different spaces");
  BaselineAttention<Real> att;
  const Matrix<Real> logits = words * regions.transpose();
  att.weights.resize(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    att.weights.row(i) = softmax<Real>(logits.row(i).transpose()).transpose();
  }
  att.output = att.weights * regions;
  return att;
}

template <typename Real>
void cross_attention_baseline_backward(const BaselineAttention<Real>& att, const Matrix<Real>& words,
                                       const Matrix<Real>& regions, const Matrix<Real>& d_output,
                                       Matrix<Real>& d_words, Matrix<Real>& d_regions) {
  const Matrix<Real> d_weights = d_output * regions.transpose();
  Matrix<Real> d_logits(att.weights.rows(), att.weights.cols());
  for (Index i = 0; i < att.weights.rows(); ++i) {
    d_logits.row(i) =
        softmax_backward<Real>(att.weights.row(i).transpose(), d_weights.row(i).transpose()).transpose();
  }
  d_words.noalias() += d_logits * regions;
  d_regions.noalias() += d_logits.transpose() * words + att.weights.transpose() * d_output;
}

#define CFFN_INSTANTIATE(Real)                                                                                  \
  template RelevanceMatrix<Real> relevance(const Matrix<Real>&, const Matrix<Real>&, const std::vector<bool>&); \
  template void relevance_backward(const RelevanceMatrix<Real>&, const Matrix<Real>&, Matrix<Real>&,           \
                                   Matrix<Real>&);                                                             \
  template Partition partition(const RelevanceMatrix<Real>&, double);                                          \
  template Partition partition_scores(const Matrix<Real>&, const std::vector<bool>&, double);                  \
  template ConsistentFusion<Real> fuse_consistent(const Matrix<Real>&, const Matrix<Real>&,                    \
                                                  const Matrix<Real>&, const Partition&);                      \
  template void fuse_consistent_backward(const ConsistentFusion<Real>&, const Matrix<Real>&,                   \
                                         const Matrix<Real>&, Matrix<Real>&, Matrix<Real>&, Matrix<Real>&);    \
  template CandidateSet<Real> candidate_reps(const Matrix<Real>&, const Matrix<Real>&, const Partition&);      \
  template void candidate_reps_backward(const CandidateSet<Real>&, const Matrix<Real>&, Matrix<Real>&,         \
                                        Matrix<Real>&);                                                        \
  template MlpScores<Real> score(const Matrix<Real>&, const ScoringMlp<Real>&);                                \
  template Matrix<Real> score_backward(const Matrix<Real>&, const MlpScores<Real>&, const Vector<Real>&,       \
                                       const ScoringMlp<Real>&, ScoringMlp<Real>&);                            \
  template PartRepresentation<Real> aggregate_parts(const Matrix<Real>&, const Vector<Real>&,                  \
                                                    const Matrix<Real>&, const Vector<Real>&, Index);          \
  template AggregateGradients<Real> aggregate_parts_backward(const Matrix<Real>&, const Vector<Real>&,         \
                                                             const Matrix<Real>&, const Vector<Real>&,         \
                                                             const Vector<Real>&, const Vector<Real>&);        \
  template BaselineAttention<Real> cross_attention_baseline(const Matrix<Real>&, const Matrix<Real>&);         \
  template void cross_attention_baseline_backward(const BaselineAttention<Real>&, const Matrix<Real>&,         \
                                                  const Matrix<Real>&, const Matrix<Real>&, Matrix<Real>&,     \
                                                  Matrix<Real>&);

CFFN_INSTANTIATE(float)
CFFN_INSTANTIATE(double)

#undef CFFN_INSTANTIATE

}  // namespace cffn
