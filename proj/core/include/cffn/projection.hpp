#pragma once

#include <array>

#include "cffn/affine.hpp"

namespace cffn {

/// Conv window sizes of the three word banks.
inline constexpr std::array<Index, 3> kConvWindows = {1, 2, 3};

/// First offset of a window relative to the output position ("same" padding,
/// extra tap on the right for even windows): w=1 -> {0}, w=2 -> {0,1},
/// w=3 -> {-1,0,1}.
constexpr Index window_start(Index window) { return -((window - 1) / 2); }

/// Trainable projections into the shared d-dimensional space.
///
/// Each conv bank is stored as an affine map over the flattened window
/// (window * d_t inputs, c outputs), so tap k of bank b covers columns
/// [k * d_t, (k + 1) * d_t) of conv[b].weight.
template <typename Real>
struct ProjectionParams {
  std::array<Affine<Real>, 3> conv;
  Affine<Real> word_fc;    // 3c -> d
  Affine<Real> region_fc;  // d_v -> d

  Index word_dim() const { return conv[0].in_dim(); }
  Index channels() const { return conv[0].out_dim(); }
  Index region_dim() const { return region_fc.in_dim(); }
  Index shared_dim() const { return word_fc.out_dim(); }

  static ProjectionParams zeros(Index d_t, Index d_v, Index c, Index d);
  template <typename Rng>
  static ProjectionParams glorot(Index d_t, Index d_v, Index c, Index d, Rng& rng) {
    ProjectionParams p;
    for (std::size_t b = 0; b < kConvWindows.size(); ++b) {
      p.conv[b] = Affine<Real>::glorot(kConvWindows[b] * d_t, c, rng);
    }
    p.word_fc = Affine<Real>::glorot(3 * c, d, rng);
    p.region_fc = Affine<Real>::glorot(d_v, d, rng);
    return p;
  }

  template <typename F>
  void for_each(F&& f) {
    for (std::size_t b = 0; b < conv.size(); ++b) {
      const std::string prefix = "projection.conv" + std::to_string(kConvWindows[b]);
      f(prefix + ".weight", conv[b].weight);
      f(prefix + ".bias", conv[b].bias);
    }
    f("projection.word_fc.weight", word_fc.weight);
    f("projection.word_fc.bias", word_fc.bias);
    f("projection.region_fc.weight", region_fc.weight);
    f("projection.region_fc.bias", region_fc.bias);
  }
};

/// Intermediates of project_words, kept for the backward pass.
template <typename Real>
struct WordProjection {
  std::array<Matrix<Real>, 3> windows;      // N x (w * d_t) im2col inputs
  std::array<Matrix<Real>, 3> preactivation;  // N x c
  Matrix<Real> features;                    // N x 3c, post-ReLU concat
  Matrix<Real> output;                      // N x d
};

/// Multi-width 1-D convolutions with ReLU, channel concat, then word_fc.
template <typename Real>
WordProjection<Real> project_words(const Matrix<Real>& words, const ProjectionParams<Real>& params);

/// Returns dL/dE_t and accumulates parameter gradients.
template <typename Real>
Matrix<Real> project_words_backward(const WordProjection<Real>& trace, const Matrix<Real>& d_output,
                                    const ProjectionParams<Real>& params, ProjectionParams<Real>& grad);

template <typename Real>
Matrix<Real> project_regions(const Matrix<Real>& regions, const ProjectionParams<Real>& params);

template <typename Real>
Matrix<Real> project_regions_backward(const Matrix<Real>& regions, const Matrix<Real>& d_output,
                                      const ProjectionParams<Real>& params, ProjectionParams<Real>& grad);

}  // namespace cffn
