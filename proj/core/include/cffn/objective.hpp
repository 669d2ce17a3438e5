#pragma once

#include <array>

#include "cffn/record.hpp"

namespace cffn {

/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

struct LossBreakdown {
  double l_d = 0.0;
  double l_p = 0.0;
  double beta = 0.0;
  double total = 0.0;
};

using SimplexPair = std::array<double, 2>;

/// Binary cross-entropy of prob_fake against y (FAKE = 1).
double detection_loss(double prob_fake, Label y);
/// d detection_loss / d prob_fake; zero where the clamp is active.
double detection_loss_grad(double prob_fake, Label y);
bool detection_clamped(double prob_fake);

/// [1, 0] for REAL (favour the consistent part), [0, 1] for FAKE.
SimplexPair partition_label(Label y);

/// Squared distance between w_mc and the partition label.
double partition_loss(const SimplexPair& w_mc, Label y);
SimplexPair partition_loss_grad(const SimplexPair& w_mc, Label y);

void validate_beta(double beta);

/// l_d + beta * l_p with beta in (0, 1].
double total_loss(double l_d, double l_p, double beta);

/// Same combination without the range check, for variants that switch the
/// partition term off (weight 0).
LossBreakdown combine_losses(double l_d, double l_p, double partition_weight);

}  // namespace cffn
