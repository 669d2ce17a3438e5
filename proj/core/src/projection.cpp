#include "cffn/projection.hpp"

namespace cffn {

namespace {

template <typename Real>
Matrix<Real> im2col(const Matrix<Real>& x, Index window) {
  const Index n = x.rows();
  const Index dim = x.cols();
  Matrix<Real> cols = Matrix<Real>::Zero(n, window * dim);
  const Index start = window_start(window);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < window; ++k) {
      const Index src = i + start + k;
      if (src < 0 || src >= n) continue;
      cols.block(i, k * dim, 1, dim) = x.row(src);
    }
  }
  return cols;
}

template <typename Real>
void col2im_add(const Matrix<Real>& cols, Index window, Matrix<Real>& dx) {
  const Index n = dx.rows();
  const Index dim = dx.cols();
  const Index start = window_start(window);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < window; ++k) {
      const Index src = i + start + k;
      if (src < 0 || src >= n) continue;
      dx.row(src) += cols.block(i, k * dim, 1, dim);
    }
  }
}

}  // namespace

template <typename Real>
ProjectionParams<Real> ProjectionParams<Real>::zeros(Index d_t, Index d_v, Index c, Index d) {
  ProjectionParams p;
  for (std::size_t b = 0; b < kConvWindows.size(); ++b) p.conv[b] = Affine<Real>::zeros(kConvWindows[b] * d_t, c);
  p.word_fc = Affine<Real>::zeros(3 * c, d);
  p.region_fc = Affine<Real>::zeros(d_v, d);
  return p;
}

template <typename Real>
WordProjection<Real> project_words(const Matrix<Real>& words, const ProjectionParams<Real>& params) {
  require_dims(words.cols() == params.word_dim(),
               "word embeddings have d_t=" + std::to_string(words.cols()) + ", projection expects " +
                   std::to_string(params.word_dim()));
  const Index c = params.channels();
  WordProjection<Real> t;
  t.features.resize(words.rows(), 3 * c);
  for (std::size_t b = 0; b < kConvWindows.size(); ++b) {
    t.windows[b] = im2col(words, kConvWindows[b]);
    t.preactivation[b] = params.conv[b].apply(t.windows[b]);
    t.features.middleCols(static_cast<Index>(b) * c, c) = t.preactivation[b].cwiseMax(Real(0));
  }
  t.output = params.word_fc.apply(t.features);
  return t;
}

template <typename Real>
Matrix<Real> project_words_backward(const WordProjection<Real>& t, const Matrix<Real>& d_output,
                                    const ProjectionParams<Real>& params, ProjectionParams<Real>& grad) {
  const Index c = params.channels();
  const Matrix<Real> d_features = params.word_fc.backward(t.features, d_output, grad.word_fc);
  Matrix<Real> d_words = Matrix<Real>::Zero(t.features.rows(), params.word_dim());
  for (std::size_t b = 0; b < kConvWindows.size(); ++b) {
    const Matrix<Real> d_pre =
        d_features.middleCols(static_cast<Index>(b) * c, c).cwiseProduct(
            (t.preactivation[b].array() > Real(0)).template cast<Real>().matrix());
    const Matrix<Real> d_cols = params.conv[b].backward(t.windows[b], d_pre, grad.conv[b]);
    col2im_add(d_cols, kConvWindows[b], d_words);
  }
  return d_words;
}

template <typename Real>
Matrix<Real> project_regions(const Matrix<Real>& regions, const ProjectionParams<Real>& params) {
  require_dims(regions.cols() == params.region_dim(),
               "region embeddings have d_v=" + std::to_string(regions.cols()) + ", projection expects " +
                   std::to_string(params.region_dim()));
  return params.region_fc.apply(regions);
}

template <typename Real>
Matrix<Real> project_regions_backward(const Matrix<Real>& regions, const Matrix<Real>& d_output,
                                      const ProjectionParams<Real>& params, ProjectionParams<Real>& grad) {
  return params.region_fc.backward(regions, d_output, grad.region_fc);
}

#define CFFN_INSTANTIATE(Real)                                                                              \
  template struct ProjectionParams<Real>;                                                                  \
  template WordProjection<Real> project_words(const Matrix<Real>&, const ProjectionParams<Real>&);         \
  template Matrix<Real> project_words_backward(const WordProjection<Real>&, const Matrix<Real>&,           \
                                               const ProjectionParams<Real>&, ProjectionParams<Real>&);    \
  template Matrix<Real> project_regions(const Matrix<Real>&, const ProjectionParams<Real>&);               \
  template Matrix<Real> project_regions_backward(const Matrix<Real>&, const Matrix<Real>&,                 \
                                                 const ProjectionParams<Real>&, ProjectionParams<Real>&);

CFFN_INSTANTIATE(float)
CFFN_INSTANTIATE(double)

#undef CFFN_INSTANTIATE

}  // namespace cffn
