#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cffn/fusion.hpp"
#include "cffn/objective.hpp"
#include "cffn/projection.hpp"
#include "cffn/record.hpp"
#include "cffn/selection.hpp"

namespace cffn {

struct ModelDims {
  Index word_dim = 768;          // d_t
  Index region_dim = 768;        // d_v
  Index shared_dim = 256;        // d
  Index mlp_hidden = 128;        // d_m
  Index classifier_hidden = 64;  // d_f
  Index conv_channels = 256;     // c

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

void validate(const ModelDims& dims);

enum class AblationVariant { kFull, kNoConsistent, kNoInconsistent, kNoPartitionLoss, kNoSeparation };

std::string_view to_string(AblationVariant variant);
AblationVariant parse_variant(std::string_view name);

/// Non-owning view of one named parameter tensor. Biases have shape {n}.
template <typename Real>
struct TensorRef {
  std::string name;
  Real* data = nullptr;
  std::vector<Index> shape;

  Index size() const {
    Index n = 1;
    for (Index s : shape) n *= s;
    return n;
  }
};

template <typename Real>
struct ModelParams {
  ProjectionParams<Real> projection;
  FusionParams<Real> fusion;
  SelectionParams<Real> selection;

  /// Glorot-uniform weights and zero biases, drawn in a fixed order from `seed`.
  static ModelParams init(const ModelDims& dims, std::uint64_t seed);
  static ModelParams zeros(const ModelDims& dims);

  ModelDims dims() const;

  std::vector<TensorRef<Real>> tensors();
  std::vector<TensorRef<const Real>> tensors() const;
  Index parameter_count() const;

  template <typename To>
  ModelParams<To> cast() const;

  void set_zero();
  bool all_finite() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    const auto ta = a.tensors();
    const auto tb = b.tensors();
    if (ta.size() != tb.size()) return false;
    for (std::size_t k = 0; k < ta.size(); ++k) {
      if (ta[k].shape != tb[k].shape) return false;
      for (Index i = 0; i < ta[k].size(); ++i) {
        if (ta[k].data[i] != tb[k].data[i]) return false;
      }
    }
    return true;
  }
};

struct ForwardOptions {
  double lambda = 0.1;
  AblationVariant variant = AblationVariant::kFull;
};

/// Everything one forward pass produces, kept for backward and reporting.
template <typename Real>
struct ForwardTrace {
  AblationVariant variant = AblationVariant::kFull;
  std::vector<bool> token_mask;
  Matrix<Real> word_inputs;
  Matrix<Real> region_inputs;
  WordProjection<Real> word_projection;
  Matrix<Real> regions;  // V

  // Separated path.
  RelevanceMatrix<Real> relevance;
  Partition partition;
  ConsistentFusion<Real> consistent;
  MlpScores<Real> consistent_scores;
  CandidateSet<Real> candidates;
  MlpScores<Real> candidate_scores;
  PartRepresentation<Real> parts;
  Selection<Real> selection;

  // NO_SEPARATION path.
  BaselineAttention<Real> baseline;
  Vector<Real> pooled;

  Classification<Real> classification;

  const Matrix<Real>& words() const { return word_projection.output; }
  bool selection_bypassed() const { return variant == AblationVariant::kNoSeparation; }
  Real prob_fake() const { return classification.prob_fake; }
};

template <typename Real>
ForwardTrace<Real> forward(const PostRecord& post, const ModelParams<Real>& params, const ForwardOptions& options);

/// Weight on the partition loss actually used by a variant.
double partition_weight(AblationVariant variant, double beta);

/// Loss of a traced forward pass; when `grad` is non-null the analytic
/// gradient of the total loss is accumulated into it.
template <typename Real>
LossBreakdown backward(const ForwardTrace<Real>& trace, const ModelParams<Real>& params, Label label,
                       double partition_weight, ModelParams<Real>* grad);

/// Piecewise-constant state of a forward pass (ReLU signs on content rows,
/// partition membership, probability clamp) plus the distance of the probe
/// point to the nearest switch.
struct KinkState {
  std::vector<std::uint8_t> pattern;
  double relu_margin = 0.0;
  double partition_margin = 0.0;
  double clamp_margin = 0.0;
};

template <typename Real>
KinkState kink_state(const ForwardTrace<Real>& trace);

}  // namespace cffn
