#pragma once

#include "cffn/affine.hpp"

namespace cffn {

/// Selection head: one gate (d -> 1) shared by both parts, and a
/// d -> d_f -> 2 classifier with a ReLU hidden layer.
template <typename Real>
struct SelectionParams {
  Affine<Real> gate;
  Affine<Real> hidden;
  Affine<Real> output;

  static SelectionParams zeros(Index d, Index d_f) {
    return {Affine<Real>::zeros(d, 1), Affine<Real>::zeros(d, d_f), Affine<Real>::zeros(d_f, 2)};
  }
  template <typename Rng>
  static SelectionParams glorot(Index d, Index d_f, Rng& rng) {
    SelectionParams p;
    p.gate = Affine<Real>::glorot(d, 1, rng);
    p.hidden = Affine<Real>::glorot(d, d_f, rng);
    p.output = Affine<Real>::glorot(d_f, 2, rng);
    return p;
  }

  template <typename F>
  void for_each(F&& f) {
    f("selection.gate.weight", gate.weight);
    f("selection.gate.bias", gate.bias);
    f("selection.classifier.hidden.weight", hidden.weight);
    f("selection.classifier.hidden.bias", hidden.bias);
    f("selection.classifier.output.weight", output.weight);
    f("selection.classifier.output.bias", output.bias);
  }
};

template <typename Real>
struct Selection {
  Real gate_consistent = 0;    // w_m
  Real gate_candidate = 0;     // w_c
  Vector<Real> weights;        // w_mc = softmax([w_m, w_c])
  Vector<Real> z;
};

template <typename Real>
Selection<Real> select(const Vector<Real>& z_m, const Vector<Real>& z_c, const SelectionParams<Real>& params);

template <typename Real>
struct SelectGradients {
  Vector<Real> d_z_m;
  Vector<Real> d_z_c;
};

template <typename Real>
SelectGradients<Real> select_backward(const Vector<Real>& z_m, const Vector<Real>& z_c, const Selection<Real>& sel,
                                      const Vector<Real>& d_z, const Vector<Real>& d_weights,
                                      const SelectionParams<Real>& params, SelectionParams<Real>& grad);

template <typename Real>
struct Classification {
  Vector<Real> preactivation;  // d_f
  Vector<Real> hidden;         // ReLU(preactivation)
  Vector<Real> logits;         // 2: [REAL, FAKE]
  Real prob_fake = 0;
};

template <typename Real>
Classification<Real> classify(const Vector<Real>& z, const SelectionParams<Real>& params);

/// Returns dL/dz given dL/dlogits.
template <typename Real>
Vector<Real> classify_backward(const Vector<Real>& z, const Classification<Real>& cls, const Vector<Real>& d_logits,
                               const SelectionParams<Real>& params, SelectionParams<Real>& grad);

}  // namespace cffn
