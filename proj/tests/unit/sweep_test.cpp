#include <gtest/gtest.h>

#include "cffn/errors.hpp"
#include "cffn/sweep.hpp"

namespace cffn {
namespace {

void expect_grid(const std::vector<double>& got, const std::vector<double>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-12);
}

TEST(Grid, InclusiveRanges) {
  expect_grid(parse_grid("0.2:1.0:0.2"), {0.2, 0.4, 0.6, 0.8, 1.0});
  expect_grid(parse_grid("0.0:0.3:0.1"), {0.0, 0.1, 0.2, 0.3});
  expect_grid(parse_grid("0.5"), {0.5});
  expect_grid(parse_grid("0.1:0.1:0.05"), {0.1});
}

TEST(Grid, Malformed) {
  for (const char* bad : {"", "a", "0.1:0.2", "0.2:0.1:0.1", "0:1:0", "0:1:-1", "0:1:x", "1:2:3:4"}) {
    EXPECT_THROW(parse_grid(bad), Error) << bad;
  }
}

struct SweepFixture : ::testing::Test {
  void SetUp() override {
    SyntheticConfig cfg;
    cfg.n_real = 12;
    cfg.n_fake = 12;
    cfg.word_dim = cfg.region_dim = 8;
    archive = EmbeddingArchive(generate_synthetic(cfg));
    split = split_dataset(archive, {0.75, 0.0, 0.25}, 2);
    base.epochs = 2;
    base.batch_size = 6;
    base.seed = 2;
    base.dims = {8, 8, 6, 4, 3, 6};
  }
  EmbeddingArchive archive;
  DatasetSplit split;
  TrainConfig base;
};

TEST_F(SweepFixture, SingleCellEqualsDirectRun) {
  const auto cells = sweep(archive, split, base, {0.8}, {0.1});
  ASSERT_EQ(cells.size(), 1u);
  ASSERT_TRUE(cells[0].metrics);
  const auto direct = train(archive, split, base);
  const auto m = evaluate(direct.params, archive, split.test, base.forward_options());
  EXPECT_EQ(cells[0].metrics->accuracy, m.accuracy);
  EXPECT_EQ(to_json(*cells[0].metrics), to_json(m));
}

TEST_F(SweepFixture, BetaMajorOrderAndDeterminism) {
  const auto cells = sweep(archive, split, base, {0.4, 0.8}, {0.0, 0.2});
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[1].beta, 0.4);
  EXPECT_EQ(cells[1].lambda, 0.2);
  EXPECT_EQ(cells[2].beta, 0.8);
  EXPECT_EQ(sweep_to_json(cells), sweep_to_json(sweep(archive, split, base, {0.4, 0.8}, {0.0, 0.2})));
}

TEST_F(SweepFixture, CellSeedIsBaseSeedPlusIndex) {
  const auto cells = sweep(archive, split, base, {0.8}, {0.0, 0.1});
  ASSERT_TRUE(cells[1].metrics);
  auto config = base;
  config.lambda = 0.1;
  config.seed = base.seed + 1;
  const auto direct = train(archive, split, config);
  EXPECT_EQ(to_json(*cells[1].metrics), to_json(evaluate(direct.params, archive, split.test, config.forward_options())));
}

TEST_F(SweepFixture, DegenerateAndFailingCellsAreRecorded) {
  std::vector<SweepCell> seen;
  const auto cells = sweep(archive, split, base, {0.0, 0.8}, {0.999}, [&](const SweepCell& c) { seen.push_back(c); });
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(seen.size(), 2u);
  EXPECT_FALSE(cells[0].metrics);
  EXPECT_FALSE(cells[0].error.empty());
  ASSERT_TRUE(cells[1].metrics);
  EXPECT_TRUE(cells[1].degenerate);
  EXPECT_EQ(cells[1].consistent_pair_fraction, 0.0);
  const auto j = sweep_to_json(cells);
  EXPECT_TRUE(j.at("rows")[0].at("metrics").is_null());
}

TEST_F(SweepFixture, EmptyGridRejected) {
  EXPECT_THROW(sweep(archive, split, base, {}, {0.1}), Error);
}

}  // namespace
}  // namespace cffn
