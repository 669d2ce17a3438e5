#include "cffn/selection.hpp"

#include <algorithm>
#include <cmath>

#include "cffn/fusion.hpp"

namespace cffn {

template <typename Real>
Selection<Real> select(const Vector<Real>& z_m, const Vector<Real>& z_c, const SelectionParams<Real>& params) {
  require_dims(z_m.size() == z_c.size(), "part representations differ in width");
  Selection<Real> sel;
  sel.gate_consistent = params.gate.apply(z_m)[0];
  sel.gate_candidate = params.gate.apply(z_c)[0];
  const Real top = std::max(sel.gate_consistent, sel.gate_candidate);
  const Real e_m = std::exp(sel.gate_consistent - top);
  const Real e_c = std::exp(sel.gate_candidate - top);
  sel.weights.resize(2);
  sel.weights << e_m / (e_m + e_c), e_c / (e_m + e_c);
  sel.z = sel.weights[0] * z_m + sel.weights[1] * z_c;
  return sel;
}

template <typename Real>
SelectGradients<Real> select_backward(const Vector<Real>& z_m, const Vector<Real>& z_c, const Selection<Real>& sel,
                                      const Vector<Real>& d_z, const Vector<Real>& d_weights,
                                      const SelectionParams<Real>& params, SelectionParams<Real>& grad) {
  const Real w_m = sel.weights[0];
  const Real w_c = sel.weights[1];
  SelectGradients<Real> g;
  g.d_z_m = w_m * d_z;
  g.d_z_c = w_c * d_z;

  // Total derivative w.r.t. w_mc, then through the two-way softmax.
  const Real dw_m = d_weights[0] + d_z.dot(z_m);
  const Real dw_c = d_weights[1] + d_z.dot(z_c);
  const Real d_gap = w_m * w_c * (dw_m - dw_c);  // d/d(gate_consistent) = -d/d(gate_candidate)

  Vector<Real> d_gate(1);
  d_gate[0] = d_gap;
  g.d_z_m += params.gate.backward(z_m, d_gate, grad.gate);
  d_gate[0] = -d_gap;
  g.d_z_c += params.gate.backward(z_c, d_gate, grad.gate);
  return g;
}

template <typename Real>
Classification<Real> classify(const Vector<Real>& z, const SelectionParams<Real>& params) {
  require_dims(params.output.out_dim() == 2 && params.output.in_dim() == params.hidden.out_dim(),
               "classifier layers do not chain to two logits");
  Classification<Real> cls;
  cls.preactivation = params.hidden.apply(z);
  cls.hidden = cls.preactivation.cwiseMax(Real(0));
  cls.logits = params.output.apply(cls.hidden);
  cls.prob_fake = sigmoid(cls.logits[1] - cls.logits[0]);
  return cls;
}

template <typename Real>
Vector<Real> classify_backward(const Vector<Real>& z, const Classification<Real>& cls, const Vector<Real>& d_logits,
                               const SelectionParams<Real>& params, SelectionParams<Real>& grad) {
  const Vector<Real> d_hidden = params.output.backward(cls.hidden, d_logits, grad.output);
  const Vector<Real> d_pre =
      d_hidden.cwiseProduct((cls.preactivation.array() > Real(0)).template cast<Real>().matrix());
  return params.hidden.backward(z, d_pre, grad.hidden);
}

#define CFFN_INSTANTIATE(Real)                                                                                 \
  template Selection<Real> select(const Vector<Real>&, const Vector<Real>&, const SelectionParams<Real>&);    \
  template SelectGradients<Real> select_backward(const Vector<Real>&, const Vector<Real>&,                    \
                                                 const Selection<Real>&, const Vector<Real>&,                 \
                                                 const Vector<Real>&, const SelectionParams<Real>&,           \
                                                 SelectionParams<Real>&);                                     \
  template Classification<Real> classify(const Vector<Real>&, const SelectionParams<Real>&);                  \
  template Vector<Real> classify_backward(const Vector<Real>&, const Classification<Real>&,                   \
                                          const Vector<Real>&, const SelectionParams<Real>&,                  \
                                          SelectionParams<Real>&);

CFFN_INSTANTIATE(float)
CFFN_INSTANTIATE(double)

#undef CFFN_INSTANTIATE

}  // namespace cffn
