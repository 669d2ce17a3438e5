#pragma once

#include <cmath>
#include <random>

#include "cffn/tensor.hpp"

namespace cffn {

/// y = x W^T + b, applied row-wise. weight is out x in.
template <typename Real>
struct Affine {
  Matrix<Real> weight;
  Vector<Real> bias;

  static Affine zeros(Index in, Index out) {
    return {Matrix<Real>::Zero(out, in), Vector<Real>::Zero(out)};
  }

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)); zero bias.
  template <typename Rng>
  static Affine glorot(Index in, Index out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Affine layer = zeros(in, out);
    for (Index k = 0; k < layer.weight.size(); ++k) layer.weight.data()[k] = static_cast<Real>(dist(rng));
    return layer;
  }

  Index in_dim() const { return weight.cols(); }
  Index out_dim() const { return weight.rows(); }

  Matrix<Real> apply(const Matrix<Real>& x) const {
    require_dims(x.cols() == in_dim(), "affine input has " + std::to_string(x.cols()) + " columns, expected " +
                                           std::to_string(in_dim()));
    Matrix<Real> y = x * weight.transpose();
    y.rowwise() += bias.transpose();
    return y;
  }

  Vector<Real> apply(const Vector<Real>& x) const {
    require_dims(x.size() == in_dim(), "affine input has length " + std::to_string(x.size()) + ", expected " +
                                           std::to_string(in_dim()));
    return weight * x + bias;
  }

  /// Accumulates parameter gradients into `grad` and returns dL/dx.
  Matrix<Real> backward(const Matrix<Real>& x, const Matrix<Real>& dy, Affine& grad) const {
    grad.weight.noalias() += dy.transpose() * x;
    grad.bias += dy.colwise().sum().transpose();
    return dy * weight;
  }

  Vector<Real> backward(const Vector<Real>& x, const Vector<Real>& dy, Affine& grad) const {
    grad.weight.noalias() += dy * x.transpose();
    grad.bias += dy;
    return weight.transpose() * dy;
  }

  template <typename To>
  Affine<To> cast() const {
    return {weight.template cast<To>(), bias.template cast<To>()};
  }

  friend bool operator==(const Affine& a, const Affine& b) {
    return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() &&
           a.bias.size() == b.bias.size() && a.weight == b.weight && a.bias == b.bias;
  }
};

}  // namespace cffn
