#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "cffn/errors.hpp"
#include "cffn/trainer.hpp"

namespace cffn {
namespace {

EmbeddingArchive small_archive(std::size_t n = 40) {
  SyntheticConfig cfg;
  cfg.n_real = n / 2;
  cfg.n_fake = n - n / 2;
  cfg.word_dim = cfg.region_dim = 8;
  return EmbeddingArchive(generate_synthetic(cfg));
}

TrainConfig small_config() {
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 8;
  c.seed = 3;
  c.dims.shared_dim = 6;
  c.dims.conv_channels = 6;
  c.dims.mlp_hidden = 4;
  c.dims.classifier_hidden = 3;
  return c;
}

TEST(Trainer, ZeroLearningRateLeavesParametersUnchanged) {
  const auto archive = small_archive();
  auto config = small_config();
  config.lr = 0.0;
  Trainer trainer(archive, config);
  const TrainParams before = trainer.params();
  trainer.step({archive.ids().front()});
  EXPECT_EQ(trainer.params(), before);
  EXPECT_EQ(trainer.optimizer().steps(), 1);
}

TEST(Trainer, SameSeedSameLosses) {
  const auto archive = small_archive();
  const auto split = split_dataset(archive, {0.8, 0.0, 0.2}, 3);
  Trainer a(archive, small_config());
  Trainer b(archive, small_config());
  const auto order = a.epoch_order(split.train, 1);
  for (int s = 0; s < 5; ++s) {
    const std::vector<std::string> batch(order.begin() + s * 4, order.begin() + s * 4 + 4);
    const auto la = a.step(batch);
    const auto lb = b.step(batch);
    EXPECT_EQ(la.total, lb.total) << "step " << s;
    EXPECT_EQ(la.l_d, lb.l_d);
  }
  EXPECT_EQ(a.params(), b.params());
}

TEST(Trainer, EpochOrderIsSeededPermutation) {
  const auto archive = small_archive();
  Trainer t(archive, small_config());
  const auto ids = archive.ids();
  const auto o1 = t.epoch_order(ids, 1);
  EXPECT_EQ(o1, t.epoch_order(ids, 1));
  EXPECT_NE(o1, t.epoch_order(ids, 2));
  auto sorted = o1;
  auto want = ids;
  std::sort(sorted.begin(), sorted.end());
  std::sort(want.begin(), want.end());
  EXPECT_EQ(sorted, want);
}

TEST(Trainer, NoPartitionLossEqualsFullWithZeroWeight) {
  const auto archive = small_archive();
  const auto split = split_dataset(archive, {0.8, 0.0, 0.2}, 3);
  auto full_config = small_config();
  auto ablated_config = small_config();
  ablated_config.variant = AblationVariant::kNoPartitionLoss;
  Trainer full(archive, full_config);
  full.set_partition_weight(0.0);
  Trainer ablated(archive, ablated_config);
  EXPECT_EQ(ablated.partition_weight(), 0.0);
  for (int epoch = 1; epoch <= 2; ++epoch) {
    const auto a = full.run_epoch(split, epoch);
    const auto b = ablated.run_epoch(split, epoch);
    EXPECT_EQ(a.train_loss, b.train_loss);
  }
  EXPECT_EQ(full.params(), ablated.params());
}

TEST(Trainer, DivergenceIsReported) {
  const auto archive = small_archive();
  Trainer t(archive, small_config());
  t.params().selection.output.bias[0] = std::numeric_limits<float>::quiet_NaN();
  try {
    t.step({archive.ids().front()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDivergence);
  }
}

TEST(Trainer, HistoryUsesValidationWhenPresent) {
  const auto archive = small_archive();
  auto config = small_config();
  const auto with_val = train(archive, split_dataset(archive, {0.6, 0.2, 0.2}, 1), config);
  ASSERT_EQ(with_val.history.size(), 2u);
  EXPECT_EQ(with_val.history[0].eval_set, "val");
  EXPECT_EQ(with_val.history[0].metrics.counts.total(), 8u);
  const auto without = train(archive, split_dataset(archive, {0.8, 0.0, 0.2}, 1), config);
  EXPECT_EQ(without.history[0].eval_set, "train");
  EXPECT_EQ(without.history[1].epoch, 2);
}

TEST(Trainer, EmptyTrainingSplitRejected) {
  const auto archive = small_archive();
  EXPECT_THROW(train(archive, DatasetSplit{}, small_config()), Error);
}

TEST(Evaluate, Errors) {
  const auto archive = small_archive();
  const auto params = TrainParams::init(bind_to_archive(small_config(), archive).dims, 1);
  EXPECT_THROW(evaluate(params, archive, {}, {}), Error);
  try {
    evaluate(params, archive, {"nope"}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownId);
  }
}

TEST(Evaluate, ThresholdAtHalf) {
  const auto archive = small_archive();
  const auto config = bind_to_archive(small_config(), archive);
  auto params = TrainParams::init(config.dims, 1);
  params.selection.output.weight.setZero();
  params.selection.output.bias.setZero();
  const auto preds = predict(params, archive, archive.ids(), {});
  for (const auto& p : preds) {
    EXPECT_EQ(p.prob_fake, 0.5);
    EXPECT_EQ(p.predicted, Label::kFake);
  }
}

TEST(Adam, MatchesScalarRecurrence) {
  TrainConfig config = small_config();
  config.dims.word_dim = config.dims.region_dim = 2;
  TrainParams params = TrainParams::init(config.dims, 5);
  const double lr = 0.01, wd = 0.1;
  AdamOptimizer adam(params, lr, wd);

  std::vector<double> theta, m, v;
  for (const auto& t : params.tensors()) {
    for (Index i = 0; i < t.size(); ++i) theta.push_back(t.data[i]);
  }
  m.assign(theta.size(), 0.0);
  v.assign(theta.size(), 0.0);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int step = 1; step <= 3; ++step) {
    TrainParams grad = TrainParams::zeros(config.dims);
    std::vector<double> g;
    for (auto& t : grad.tensors()) {
      for (Index i = 0; i < t.size(); ++i) {
        t.data[i] = static_cast<float>(normal(rng));
        g.push_back(t.data[i]);
      }
    }
    adam.step(params, grad);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double gk = g[k] + wd * theta[k];
      m[k] = 0.9 * m[k] + 0.1 * gk;
      v[k] = 0.999 * v[k] + 0.001 * gk * gk;
      const double mh = m[k] / (1 - std::pow(0.9, step));
      const double vh = v[k] / (1 - std::pow(0.999, step));
      theta[k] = static_cast<float>(theta[k] - lr * mh / (std::sqrt(vh) + 1e-8));
    }
  }
  std::size_t k = 0;
  for (const auto& t : params.tensors()) {
    for (Index i = 0; i < t.size(); ++i, ++k) EXPECT_NEAR(t.data[i], theta[k], 1e-6) << t.name;
  }
}

}  // namespace
}  // namespace cffn
