#include "cffn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cffn {

namespace {

template <typename Real, typename Tensor>
void push_tensor(std::vector<TensorRef<Real>>& out, std::string name, Tensor& t) {
  TensorRef<Real> ref;
  ref.name = std::move(name);
  ref.data = t.data();
  if constexpr (Tensor::ColsAtCompileTime == 1) {
    ref.shape = {t.size()};
  } else {
    ref.shape = {t.rows(), t.cols()};
  }
  out.push_back(std::move(ref));
}

template <typename Real, typename Params>
std::vector<TensorRef<Real>> collect(Params& params) {
  std::vector<TensorRef<Real>> out;
  auto visit = [&](const std::string& name, auto& tensor) { push_tensor<Real>(out, name, tensor); };
  params.projection.for_each(visit);
  params.fusion.for_each(visit);
  params.selection.for_each(visit);
  return out;
}

}  // namespace

void validate(const ModelDims& d) {
  require(d.word_dim > 0 && d.region_dim > 0 && d.shared_dim > 0 && d.mlp_hidden > 0 && d.classifier_hidden > 0 &&
              d.conv_channels > 0,
          ErrorKind::kConfig, "model dimensions must be positive");
}

std::string_view to_string(AblationVariant variant) {
  switch (variant) {
    case AblationVariant::kFull: return "FULL";
    case AblationVariant::kNoConsistent: return "NO_CONSISTENT";
    case AblationVariant::kNoInconsistent: return "NO_INCONSISTENT";
    case AblationVariant::kNoPartitionLoss: return "NO_PARTITION_LOSS";
    case AblationVariant::kNoSeparation: return "NO_SEPARATION";
  }
  return "FULL";
}

AblationVariant parse_variant(std::string_view name) {
  for (auto v : {AblationVariant::kFull, AblationVariant::kNoConsistent, AblationVariant::kNoInconsistent,
                 AblationVariant::kNoPartitionLoss, AblationVariant::kNoSeparation}) {
    if (to_string(v) == name) return v;
  }
  raise(ErrorKind::kConfig, "unknown ablation variant '" + std::string(name) + "'");
}

template <typename Real>
ModelParams<Real> ModelParams<Real>::init(const ModelDims& dims, std::uint64_t seed) {
  validate(dims);
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.projection = ProjectionParams<Real>::glorot(dims.word_dim, dims.region_dim, dims.conv_channels,
                                                dims.shared_dim, rng);
  p.fusion = FusionParams<Real>::glorot(dims.shared_dim, dims.mlp_hidden, rng);
  p.selection = SelectionParams<Real>::glorot(dims.shared_dim, dims.classifier_hidden, rng);
  return p;
}

template <typename Real>
ModelParams<Real> ModelParams<Real>::zeros(const ModelDims& dims) {
  validate(dims);
  ModelParams p;
  p.projection = ProjectionParams<Real>::zeros(dims.word_dim, dims.region_dim, dims.conv_channels, dims.shared_dim);
  p.fusion = FusionParams<Real>::zeros(dims.shared_dim, dims.mlp_hidden);
  p.selection = SelectionParams<Real>::zeros(dims.shared_dim, dims.classifier_hidden);
  return p;
}

template <typename Real>
ModelDims ModelParams<Real>::dims() const {
  ModelDims d;
  d.word_dim = projection.word_dim();
  d.region_dim = projection.region_dim();
  d.shared_dim = projection.shared_dim();
  d.conv_channels = projection.channels();
  d.mlp_hidden = fusion.inconsistency.hidden.out_dim();
  d.classifier_hidden = selection.hidden.out_dim();
  return d;
}

template <typename Real>
std::vector<TensorRef<Real>> ModelParams<Real>::tensors() {
  return collect<Real>(*this);
}

template <typename Real>
std::vector<TensorRef<const Real>> ModelParams<Real>::tensors() const {
  auto mutable_refs = const_cast<ModelParams&>(*this).tensors();
  std::vector<TensorRef<const Real>> out;
  out.reserve(mutable_refs.size());
  for (auto& r : mutable_refs) out.push_back({std::move(r.name), r.data, std::move(r.shape)});
  return out;
}

template <typename Real>
Index ModelParams<Real>::parameter_count() const {
  Index n = 0;
  for (const auto& t : tensors()) n += t.size();
  return n;
}

template <typename Real>
template <typename To>
ModelParams<To> ModelParams<Real>::cast() const {
  auto out = ModelParams<To>::zeros(dims());
  auto src = tensors();
  auto dst = out.tensors();
  for (std::size_t k = 0; k < src.size(); ++k) {
    for (Index i = 0; i < src[k].size(); ++i) dst[k].data[i] = static_cast<To>(src[k].data[i]);
  }
  return out;
}

template <typename Real>
void ModelParams<Real>::set_zero() {
  for (auto& t : tensors()) std::fill(t.data, t.data + t.size(), Real(0));
}

template <typename Real>
bool ModelParams<Real>::all_finite() const {
  for (const auto& t : tensors()) {
    for (Index i = 0; i < t.size(); ++i) {
      if (!std::isfinite(t.data[i])) return false;
    }
  }
  return true;
}

template <typename Real>
ForwardTrace<Real> forward(const PostRecord& post, const ModelParams<Real>& params, const ForwardOptions& options) {
  validate_lambda(options.lambda);
  require_dims(post.region_embeddings.cols() == params.projection.region_dim(),
               "post '" + post.post_id + "' has d_v=" + std::to_string(post.region_embeddings.cols()) +
                   ", model expects " + std::to_string(params.projection.region_dim()));
  require_dims(static_cast<Index>(post.token_mask.size()) == post.word_embeddings.rows(),
               "post '" + post.post_id + "' token mask length differs from N");

  ForwardTrace<Real> t;
  t.variant = options.variant;
  t.token_mask = post.token_mask;
  t.word_inputs = post.word_embeddings.template cast<Real>();
  t.region_inputs = post.region_embeddings.template cast<Real>();
  t.word_projection = project_words(t.word_inputs, params.projection);
  t.regions = project_regions(t.region_inputs, params.projection);
  const Matrix<Real>& words = t.word_projection.output;
  const Index dim = params.projection.shared_dim();

  if (options.variant == AblationVariant::kNoSeparation) {
    t.baseline = cross_attention_baseline(words, t.regions);
    t.pooled = Vector<Real>::Zero(dim);
    Index content = 0;
    for (Index i = 0; i < words.rows(); ++i) {
      if (!t.token_mask[static_cast<std::size_t>(i)]) continue;
      t.pooled += t.baseline.output.row(i).transpose();
      ++content;
    }
    t.pooled /= static_cast<Real>(content);
    t.classification = classify(t.pooled, params.selection);
    return t;
  }

  t.relevance = relevance(words, t.regions, t.token_mask);
  t.partition = partition(t.relevance, options.lambda);

  const bool use_consistent = options.variant != AblationVariant::kNoConsistent;
  const bool use_candidates = options.variant != AblationVariant::kNoInconsistent;

  Matrix<Real> fused(0, dim);
  Vector<Real> consistent_scores(0);
  if (use_consistent) {
    t.consistent = fuse_consistent(words, t.regions, t.relevance.scores, t.partition);
    t.consistent_scores = score(t.consistent.fused, params.fusion.consistency);
    fused = t.consistent.fused;
    consistent_scores = t.consistent_scores.scores;
  }
  Matrix<Real> reps(0, dim);
  Vector<Real> candidate_scores(0);
  if (use_candidates) {
    t.candidates = candidate_reps(words, t.regions, t.partition);
    t.candidate_scores = score(t.candidates.reps, params.fusion.inconsistency);
    reps = t.candidates.reps;
    candidate_scores = t.candidate_scores.scores;
  }
  t.parts = aggregate_parts(fused, consistent_scores, reps, candidate_scores, dim);
  t.parts.consistent_count = t.partition.consistent_count();
  t.parts.candidate_count = t.partition.candidate_count();

  t.selection = select(t.parts.z_m, t.parts.z_c, params.selection);
  t.classification = classify(t.selection.z, params.selection);
  return t;
}

double partition_weight(AblationVariant variant, double beta) {
  if (variant == AblationVariant::kNoPartitionLoss || variant == AblationVariant::kNoSeparation) return 0.0;
  return beta;
}

template <typename Real>
LossBreakdown backward(const ForwardTrace<Real>& t, const ModelParams<Real>& params, Label label,
                       double weight, ModelParams<Real>* grad) {
  const double p = static_cast<double>(t.classification.prob_fake);
  const double l_d = detection_loss(p, label);
  double l_p = 0.0;
  SimplexPair w_mc{0.0, 0.0};
  if (!t.selection_bypassed()) {
    w_mc = {static_cast<double>(t.selection.weights[0]), static_cast<double>(t.selection.weights[1])};
    l_p = partition_loss(w_mc, label);
  }
  const LossBreakdown loss = combine_losses(l_d, l_p, weight);
  if (grad == nullptr) return loss;

  // prob_fake = sigmoid(logit_fake - logit_real)
  const double d_gap = detection_loss_grad(p, label) * p * (1.0 - p);
  Vector<Real> d_logits(2);
  d_logits << static_cast<Real>(-d_gap), static_cast<Real>(d_gap);

  const Vector<Real>& z = t.selection_bypassed() ? t.pooled : t.selection.z;
  const Vector<Real> d_z = classify_backward(z, t.classification, d_logits, params.selection, grad->selection);

  const Matrix<Real>& words = t.word_projection.output;
  Matrix<Real> d_words = Matrix<Real>::Zero(words.rows(), words.cols());
  Matrix<Real> d_regions = Matrix<Real>::Zero(t.regions.rows(), t.regions.cols());

  if (t.selection_bypassed()) {
    Index content = 0;
    for (bool m : t.token_mask) content += m ? 1 : 0;
    Matrix<Real> d_out = Matrix<Real>::Zero(words.rows(), words.cols());
    for (Index i = 0; i < words.rows(); ++i) {
      if (t.token_mask[static_cast<std::size_t>(i)]) d_out.row(i) = d_z.transpose() / static_cast<Real>(content);
    }
    cross_attention_baseline_backward(t.baseline, words, t.regions, d_out, d_words, d_regions);
  } else {
    const auto d_w = partition_loss_grad(w_mc, label);
    Vector<Real> d_weights(2);
    d_weights << static_cast<Real>(weight * d_w[0]), static_cast<Real>(weight * d_w[1]);
    const auto d_parts = select_backward(t.parts.z_m, t.parts.z_c, t.selection, d_z, d_weights, params.selection,
                                         grad->selection);

    const bool use_consistent = t.variant != AblationVariant::kNoConsistent;
    const bool use_candidates = t.variant != AblationVariant::kNoInconsistent;
    const Matrix<Real> no_rows(0, words.cols());
    const Vector<Real> no_scores(0);
    const Matrix<Real>& fused = use_consistent ? t.consistent.fused : no_rows;
    const Vector<Real>& consistent_scores = use_consistent ? t.consistent_scores.scores : no_scores;
    const Matrix<Real>& reps = use_candidates ? t.candidates.reps : no_rows;
    const Vector<Real>& candidate_scores = use_candidates ? t.candidate_scores.scores : no_scores;

    const auto agg = aggregate_parts_backward(fused, consistent_scores, reps, candidate_scores, d_parts.d_z_m,
                                              d_parts.d_z_c);
    Matrix<Real> d_scores = Matrix<Real>::Zero(words.rows(), t.regions.rows());
    if (use_consistent && fused.rows() > 0) {
      Matrix<Real> d_fused = agg.d_fused;
      d_fused += score_backward(fused, t.consistent_scores, agg.d_consistent_scores, params.fusion.consistency,
                                grad->fusion.consistency);
      fuse_consistent_backward(t.consistent, t.regions, d_fused, d_words, d_regions, d_scores);
    }
    if (use_candidates && reps.rows() > 0) {
      Matrix<Real> d_reps = agg.d_reps;
      d_reps += score_backward(reps, t.candidate_scores, agg.d_candidate_scores, params.fusion.inconsistency,
                               grad->fusion.inconsistency);
      candidate_reps_backward(t.candidates, d_reps, d_words, d_regions);
    }
    relevance_backward(t.relevance, d_scores, d_words, d_regions);
  }

  project_words_backward(t.word_projection, d_words, params.projection, grad->projection);
  project_regions_backward(t.region_inputs, d_regions, params.projection, grad->projection);
  return loss;
}

template <typename Real>
KinkState kink_state(const ForwardTrace<Real>& t) {
  KinkState k;
  k.relu_margin = std::numeric_limits<double>::infinity();
  k.partition_margin = std::numeric_limits<double>::infinity();

  for (const auto& pre : t.word_projection.preactivation) {
    for (Index i = 0; i < pre.rows(); ++i) {
      if (!t.token_mask[static_cast<std::size_t>(i)]) continue;
      for (Index c = 0; c < pre.cols(); ++c) {
        const double v = static_cast<double>(pre(i, c));
        k.pattern.push_back(v > 0.0 ? 1 : 0);
        k.relu_margin = std::min(k.relu_margin, std::abs(v));
      }
    }
  }
  for (Index h = 0; h < t.classification.preactivation.size(); ++h) {
    const double v = static_cast<double>(t.classification.preactivation[h]);
    k.pattern.push_back(v > 0.0 ? 1 : 0);
    k.relu_margin = std::min(k.relu_margin, std::abs(v));
  }
  if (!t.selection_bypassed()) {
    for (Index i = 0; i < t.partition.valid.rows(); ++i) {
      for (Index j = 0; j < t.partition.valid.cols(); ++j) {
        if (!t.partition.valid(i, j)) continue;
        k.pattern.push_back(t.partition.consistent(i, j) ? 1 : 0);
        k.partition_margin = std::min(
            k.partition_margin, std::abs(static_cast<double>(t.relevance.scores(i, j)) - t.partition.lambda));
      }
    }
  }
  const double p = static_cast<double>(t.classification.prob_fake);
  k.pattern.push_back(detection_clamped(p) ? 1 : 0);
  k.clamp_margin = std::min(std::abs(p - kProbClamp), std::abs(p - (1.0 - kProbClamp)));
  return k;
}

template struct ModelParams<float>;
template struct ModelParams<double>;
template ModelParams<double> ModelParams<float>::cast<double>() const;
template ModelParams<float> ModelParams<double>::cast<float>() const;
template ModelParams<float> ModelParams<float>::cast<float>() const;
template ModelParams<double> ModelParams<double>::cast<double>() const;

#define CFFN_INSTANTIATE(Real)                                                                                  \
  template ForwardTrace<Real> forward(const PostRecord&, const ModelParams<Real>&, const ForwardOptions&);     \
  template LossBreakdown backward(const ForwardTrace<Real>&, const ModelParams<Real>&, Label, double,          \
                                  ModelParams<Real>*);                                                         \
  template KinkState kink_state(const ForwardTrace<Real>&);

CFFN_INSTANTIATE(float)
CFFN_INSTANTIATE(double)

#undef CFFN_INSTANTIATE

}  // namespace cffn
