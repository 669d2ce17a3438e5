#include "cffn/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cffn {

DatasetSplit split_ids(std::vector<std::string> ids, const SplitRatios& ratios, std::uint64_t seed) {
  double total = 0.0;
  std::size_t nonzero = 0;
  for (double r : ratios) {
    require(r >= 0.0, ErrorKind::kConfig, "split ratios must be non-negative");
    total += r;
    nonzero += r > 0.0 ? 1 : 0;
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorKind::kConfig, "split ratios must sum to 1");
  require(ids.size() >= nonzero, ErrorKind::kConfig, "fewer records than non-empty split parts");

  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  const auto n = static_cast<double>(ids.size());
  const auto n_val = static_cast<std::size_t>(std::floor(ratios[1] * n));
  const auto n_test = static_cast<std::size_t>(std::floor(ratios[2] * n));
  const auto n_train = ids.size() - n_val - n_test;

  DatasetSplit split;
  auto it = ids.begin();
  split.train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  it += static_cast<std::ptrdiff_t>(n_train);
  split.val.assign(it, it + static_cast<std::ptrdiff_t>(n_val));
  it += static_cast<std::ptrdiff_t>(n_val);
  split.test.assign(it, ids.end());
  return split;
}

DatasetSplit split_dataset(const EmbeddingArchive& archive, const SplitRatios& ratios, std::uint64_t seed) {
  return split_ids(archive.ids(), ratios, seed);
}

}  // namespace cffn
