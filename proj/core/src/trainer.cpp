#include "cffn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace cffn {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

AdamOptimizer::AdamOptimizer(const TrainParams& like, double lr, double weight_decay, double beta1, double beta2,
                             double epsilon)
    : lr_(lr),
      weight_decay_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      first_moment_(TrainParams::zeros(like.dims())),
      second_moment_(TrainParams::zeros(like.dims())) {}

void AdamOptimizer::step(TrainParams& params, const TrainParams& grad) {
  ++steps_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));

  auto p = params.tensors();
  const auto g = grad.tensors();
  auto m = first_moment_.tensors();
  auto v = second_moment_.tensors();
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (Index i = 0; i < p[t].size(); ++i) {
      const double theta = p[t].data[i];
      const double gi = static_cast<double>(g[t].data[i]) + weight_decay_ * theta;
      const double mi = beta1_ * m[t].data[i] + (1.0 - beta1_) * gi;
      const double vi = beta2_ * v[t].data[i] + (1.0 - beta2_) * gi * gi;
      m[t].data[i] = static_cast<TrainReal>(mi);
      v[t].data[i] = static_cast<TrainReal>(vi);
      const double update = lr_ * (mi / correction1) / (std::sqrt(vi / correction2) + epsilon_);
      p[t].data[i] = static_cast<TrainReal>(theta - update);
    }
  }
}

std::vector<Prediction> predict(const TrainParams& params, const EmbeddingArchive& archive,
                                const std::vector<std::string>& ids, const ForwardOptions& options) {
  std::vector<Prediction> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const PostRecord& post = archive.at(id);
    const auto trace = forward(post, params, options);
    Prediction p;
    p.post_id = id;
    p.truth = post.label;
    p.prob_fake = static_cast<double>(trace.prob_fake());
    p.predicted = p.prob_fake >= kDecisionThreshold ? Label::kFake : Label::kReal;
    if (!trace.selection_bypassed()) {
      p.consistent_pairs = trace.partition.consistent_count();
      p.candidate_pairs = trace.partition.candidate_count();
    }
    out.push_back(std::move(p));
  }
  return out;
}

Metrics evaluate(const TrainParams& params, const EmbeddingArchive& archive, const std::vector<std::string>& ids,
                 const ForwardOptions& options) {
  require(!ids.empty(), ErrorKind::kConfig, "cannot evaluate an empty id list");
  std::vector<Label> truth;
  std::vector<Label> predicted;
  for (const auto& p : predict(params, archive, ids, options)) {
    truth.push_back(p.truth);
    predicted.push_back(p.predicted);
  }
  return compute_metrics(truth, predicted);
}

nlohmann::json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"train_loss", r.train_loss},
          {"eval_set", r.eval_set},
          {"loss",
           {{"l_d", r.eval_loss.l_d}, {"l_p", r.eval_loss.l_p}, {"beta", r.eval_loss.beta},
            {"total", r.eval_loss.total}}},
          {"metrics", to_json(r.metrics)}};
}

TrainConfig bind_to_archive(TrainConfig config, const EmbeddingArchive& archive) {
  config.dims.word_dim = archive.header().word_dim;
  config.dims.region_dim = archive.header().region_dim;
  return config;
}

Trainer::Trainer(const EmbeddingArchive& archive, TrainConfig config)
    : archive_(archive),
      config_(bind_to_archive(std::move(config), archive)),
      partition_weight_(cffn::partition_weight(config_.variant, config_.beta)),
      params_(TrainParams::init((validate(config_), config_.dims), config_.seed)),
      grad_(TrainParams::zeros(config_.dims)),
      optimizer_(params_, config_.lr, config_.weight_decay) {}

LossBreakdown Trainer::step(const std::vector<std::string>& batch) {
  require(!batch.empty(), ErrorKind::kConfig, "empty batch");
  grad_.set_zero();
  LossBreakdown sum{0.0, 0.0, partition_weight_, 0.0};
  const auto options = config_.forward_options();
  for (const auto& id : batch) {
    const PostRecord& post = archive_.at(id);
    const auto trace = forward(post, params_, options);
    const auto loss = backward(trace, params_, post.label, partition_weight_, &grad_);
    if (!std::isfinite(loss.total)) {
      std::ostringstream msg;
      msg << "non-finite loss at optimizer step " << step_count_ + 1 << " on post '" << id
          << "' (l_d=" << loss.l_d << ", l_p=" << loss.l_p << ")";
      raise(ErrorKind::kDivergence, msg.str());
    }
    sum.l_d += loss.l_d;
    sum.l_p += loss.l_p;
    sum.total += loss.total;
  }
  const double n = static_cast<double>(batch.size());
  for (auto& t : grad_.tensors()) {
    for (Index i = 0; i < t.size(); ++i) t.data[i] = static_cast<TrainReal>(t.data[i] / n);
  }
  optimizer_.step(params_, grad_);
  require(params_.all_finite(), ErrorKind::kDivergence,
          "parameters became non-finite at optimizer step " + std::to_string(step_count_ + 1));
  ++step_count_;
  return {sum.l_d / n, sum.l_p / n, partition_weight_, sum.total / n};
}

std::vector<std::string> Trainer::epoch_order(const std::vector<std::string>& ids, int epoch) const {
  std::vector<std::string> order = ids;
  std::mt19937_64 rng(mix_seed(config_.seed, static_cast<std::uint64_t>(epoch)));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

EpochRecord Trainer::run_epoch(const DatasetSplit& split, int epoch) {
  require(!split.train.empty(), ErrorKind::kConfig, "training split is empty");
  const auto order = epoch_order(split.train, epoch);
  const auto batch_size = static_cast<std::size_t>(config_.batch_size);

  EpochRecord record;
  record.epoch = epoch;
  double total = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const auto end = std::min(order.size(), start + batch_size);
    const std::vector<std::string> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
    total += step(batch).total;
    ++batches;
  }
  record.train_loss = total / static_cast<double>(batches);

  const bool use_val = !split.val.empty();
  const auto& eval_ids = use_val ? split.val : split.train;
  record.eval_set = use_val ? "val" : "train";

  const auto options = config_.forward_options();
  std::vector<Label> truth;
  std::vector<Label> predicted;
  LossBreakdown loss{0.0, 0.0, partition_weight_, 0.0};
  for (const auto& id : eval_ids) {
    const PostRecord& post = archive_.at(id);
    const auto trace = forward(post, params_, options);
    const auto l = backward<TrainReal>(trace, params_, post.label, partition_weight_, nullptr);
    loss.l_d += l.l_d;
    loss.l_p += l.l_p;
    loss.total += l.total;
    truth.push_back(post.label);
    predicted.push_back(static_cast<double>(trace.prob_fake()) >= kDecisionThreshold ? Label::kFake : Label::kReal);
  }
  const double n = static_cast<double>(eval_ids.size());
  record.eval_loss = {loss.l_d / n, loss.l_p / n, partition_weight_, loss.total / n};
  record.metrics = compute_metrics(truth, predicted);
  return record;
}

TrainResult train(const EmbeddingArchive& archive, const DatasetSplit& split, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  Trainer trainer(archive, config);
  TrainResult result;
  for (int epoch = 1; epoch <= trainer.config().epochs; ++epoch) {
    result.history.push_back(trainer.run_epoch(split, epoch));
    if (on_epoch) on_epoch(result.history.back());
  }
  result.params = trainer.params();
  return result;
}

}  // namespace cffn
