#include "cffn/objective.hpp"

#include <algorithm>
#include <cmath>

namespace cffn {

namespace {
double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }
}  // namespace

bool detection_clamped(double prob_fake) { return prob_fake < kProbClamp || prob_fake > 1.0 - kProbClamp; }

double detection_loss(double prob_fake, Label y) {
  const double p = clamp_prob(prob_fake);
  return y == Label::kFake ? -std::log(p) : -std::log(1.0 - p);
}

double detection_loss_grad(double prob_fake, Label y) {
  if (detection_clamped(prob_fake)) return 0.0;
  return y == Label::kFake ? -1.0 / prob_fake : 1.0 / (1.0 - prob_fake);
}

SimplexPair partition_label(Label y) {
  return y == Label::kReal ? SimplexPair{1.0, 0.0} : SimplexPair{0.0, 1.0};
}

double partition_loss(const SimplexPair& w_mc, Label y) {
  const auto target = partition_label(y);
  const double a = target[0] - w_mc[0];
  const double b = target[1] - w_mc[1];
  return a * a + b * b;
}

SimplexPair partition_loss_grad(const SimplexPair& w_mc, Label y) {
  const auto target = partition_label(y);
  return {2.0 * (w_mc[0] - target[0]), 2.0 * (w_mc[1] - target[1])};
}

void validate_beta(double beta) {
  require(beta > 0.0 && beta <= 1.0, ErrorKind::kConfig, "beta must lie in (0, 1], got " + std::to_string(beta));
}

double total_loss(double l_d, double l_p, double beta) {
  validate_beta(beta);
  return l_d + beta * l_p;
}

LossBreakdown combine_losses(double l_d, double l_p, double partition_weight) {
  return {l_d, l_p, partition_weight, l_d + partition_weight * l_p};
}

}  // namespace cffn
