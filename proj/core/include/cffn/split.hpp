#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cffn/record.hpp"

namespace cffn {

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

using SplitRatios = std::array<double, 3>;

/// Seeded shuffle, then floor(ratio * n) ids to val and test; the remainder
/// goes to train.
DatasetSplit split_dataset(const EmbeddingArchive& archive, const SplitRatios& ratios, std::uint64_t seed);
DatasetSplit split_ids(std::vector<std::string> ids, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace cffn
