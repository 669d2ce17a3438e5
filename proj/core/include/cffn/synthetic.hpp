#pragma once

#include <cstdint>
#include <vector>

#include "cffn/record.hpp"

namespace cffn {

/// Parameters of the synthetic task. Real posts are topic-coherent: every
/// word-region cosine is at least `consistent_cos_min`. Fake posts carry a
/// planted word paired with `planted_pairs_per_fake` regions whose cosine is at
/// most `planted_cos_max` and whose element-wise sum points along a hidden
/// global inconsistency direction.
struct SyntheticConfig {
  std::uint64_t seed = 7;
  std::size_t n_real = 10;
  std::size_t n_fake = 10;
  Index tokens = 6;              // N
  Index regions = 8;             // M
  Index word_dim = 32;           // d_t
  Index region_dim = 32;         // d_v
  double consistent_cos_min = 0.6;
  Index planted_pairs_per_fake = 1;
  double planted_cos_max = 0.0;
  std::uint64_t inconsistency_direction_seed = 1;
  // Content length is drawn per post from [min_content_tokens, tokens];
  // remaining rows are zero padding. 0 means "always tokens".
  Index min_content_tokens = 0;
};

void validate(const SyntheticConfig& config);

/// Unit inconsistency direction q shared by every fake post of a config.
VectorD inconsistency_direction(const SyntheticConfig& config);

std::vector<PostRecord> generate_synthetic(const SyntheticConfig& config);

/// Exhaustive pair scan: FAKE iff some content word-region pair has cosine
/// <= planted_cos_max and (word + region) . q > 0.5.
Label rule_based_label(const PostRecord& record, const VectorD& direction, double planted_cos_max);

// Geometry of the generator, exposed for tests.
inline constexpr double kBackgroundProjection = -0.3;
inline constexpr double kPlantedProjection = 0.35;
inline constexpr double kPlantedSumThreshold = 0.5;
inline constexpr double kNonPlantedSumCeiling = 0.1;

}  // namespace cffn
