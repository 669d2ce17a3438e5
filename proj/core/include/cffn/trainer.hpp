#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cffn/config.hpp"
#include "cffn/metrics.hpp"

namespace cffn {

/// Training runs in single precision; gradient checks cast to double.
using TrainReal = float;
using TrainParams = ModelParams<TrainReal>;

/// Adam with the L2 term added to the gradient before the moment updates.
class AdamOptimizer {
 public:
  AdamOptimizer(const TrainParams& like, double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);

  void step(TrainParams& params, const TrainParams& grad);
  long steps() const { return steps_; }

 private:
  double lr_;
  double weight_decay_;
  double beta1_;
  double beta2_;
  double epsilon_;
  long steps_ = 0;
  TrainParams first_moment_;
  TrainParams second_moment_;
};

struct Prediction {
  std::string post_id;
  Label truth = Label::kReal;
  Label predicted = Label::kReal;
  double prob_fake = 0.0;
  Index consistent_pairs = 0;
  Index candidate_pairs = 0;
};

/// prob_fake >= 0.5 is FAKE.
inline constexpr double kDecisionThreshold = 0.5;

std::vector<Prediction> predict(const TrainParams& params, const EmbeddingArchive& archive,
                                const std::vector<std::string>& ids, const ForwardOptions& options);

Metrics evaluate(const TrainParams& params, const EmbeddingArchive& archive, const std::vector<std::string>& ids,
                 const ForwardOptions& options);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;      // mean total loss over the epoch's batches
  LossBreakdown eval_loss;      // mean over the evaluation set
  Metrics metrics;
  std::string eval_set;         // "val", or "train" when val is empty
};

nlohmann::json to_json(const EpochRecord& record);

struct TrainResult {
  TrainParams params;
  std::vector<EpochRecord> history;
};

/// Owns the parameters and optimizer state of one run.
class Trainer {
 public:
  Trainer(const EmbeddingArchive& archive, TrainConfig config);

  /// Overrides the weight on the partition loss (defaults to the variant's).
  void set_partition_weight(double weight) { partition_weight_ = weight; }
  double partition_weight() const { return partition_weight_; }

  /// One Adam step on the mean loss of `batch`; returns the mean breakdown.
  LossBreakdown step(const std::vector<std::string>& batch);

  /// Deterministic shuffled order of `ids` for a given epoch.
  std::vector<std::string> epoch_order(const std::vector<std::string>& ids, int epoch) const;

  EpochRecord run_epoch(const DatasetSplit& split, int epoch);

  const TrainParams& params() const { return params_; }
  TrainParams& params() { return params_; }
  const TrainConfig& config() const { return config_; }
  const AdamOptimizer& optimizer() const { return optimizer_; }

 private:
  const EmbeddingArchive& archive_;
  TrainConfig config_;
  double partition_weight_;
  TrainParams params_;
  TrainParams grad_;
  AdamOptimizer optimizer_;
  long step_count_ = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const EmbeddingArchive& archive, const DatasetSplit& split, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Model dims of `config` with d_t / d_v taken from the archive header.
TrainConfig bind_to_archive(TrainConfig config, const EmbeddingArchive& archive);

}  // namespace cffn
