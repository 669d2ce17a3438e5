#include "cffn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace cffn {

namespace {

using Rng = std::mt19937_64;

VectorD gaussian(Rng& rng, Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorD v(dim);
  for (Index k = 0; k < dim; ++k) v[k] = normal(rng);
  return v;
}

// Random unit vector orthogonal to every (unit, mutually orthogonal) basis vector.
VectorD random_unit_orthogonal(Rng& rng, Index dim, const std::vector<const VectorD*>& basis) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    VectorD v = gaussian(rng, dim);
    for (const VectorD* b : basis) v -= v.dot(*b) * *b;
    for (const VectorD* b : basis) v -= v.dot(*b) * *b;
    const double norm = v.norm();
    if (norm > 1e-6) return v / norm;
  }
  raise(ErrorKind::kGeneration, "could not draw an orthogonal direction");
}

struct Geometry {
  double topic_weight = 0.0;   // c: cosine between a background vector's q-free part and the topic
  double planted_overlap = 0.0;  // rho: overlap of planted region directions with the planted word
};

Geometry solve_geometry(const SyntheticConfig& cfg) {
  const double a2 = kBackgroundProjection * kBackgroundProjection;
  const double b2 = kPlantedProjection * kPlantedProjection;

  // Two background vectors have cosine >= a^2 + (1 - a^2)(2c^2 - 1).
  const double needed_inner = (cfg.consistent_cos_min - a2) / (1.0 - a2);
  double c2 = std::clamp((needed_inner + 1.0) / 2.0, 0.0, 1.0);
  c2 = std::min(1.0, c2 + 0.02 * (1.0 - c2));

  // Planted word and region cosine is b^2 + (1 - b^2) rho with rho >= -1.
  const double reachable = 2.0 * b2 - 1.0 + 0.05;
  const double target = std::max(cfg.planted_cos_max - 0.1, reachable);
  require(target <= cfg.planted_cos_max, ErrorKind::kGeneration,
          "planted_cos_max " + std::to_string(cfg.planted_cos_max) + " is below the reachable minimum " +
              std::to_string(reachable));

  return {std::sqrt(c2), (target - b2) / (1.0 - b2)};
}

VectorD background_vector(Rng& rng, const VectorD& q, const VectorD& topic, double c) {
  const VectorD noise = random_unit_orthogonal(rng, q.size(), {&q, &topic});
  const double a = kBackgroundProjection;
  const VectorD body = c * topic + std::sqrt(1.0 - c * c) * noise;
  return a * q + std::sqrt(1.0 - a * a) * body;
}

VectorD planted_vector(const VectorD& q, const VectorD& direction) {
  const double b = kPlantedProjection;
  return b * q + std::sqrt(1.0 - b * b) * direction;
}

}  // namespace

void validate(const SyntheticConfig& cfg) {
  require(cfg.tokens >= 1 && cfg.regions >= 1, ErrorKind::kConfig, "N and M must be >= 1");
  require(cfg.n_real + cfg.n_fake >= 1, ErrorKind::kConfig, "need at least one post");
  require(cfg.consistent_cos_min > 0.0 && cfg.consistent_cos_min <= 1.0, ErrorKind::kConfig,
          "consistent_cos_min must lie in (0, 1]");
  require(cfg.planted_cos_max < cfg.consistent_cos_min, ErrorKind::kConfig,
          "planted_cos_max must be below consistent_cos_min");
  require(cfg.planted_pairs_per_fake >= 1, ErrorKind::kConfig, "planted_pairs_per_fake must be >= 1");
  require(cfg.min_content_tokens >= 0 && cfg.min_content_tokens <= cfg.tokens, ErrorKind::kConfig,
          "min_content_tokens must lie in [0, N]");
  require(cfg.word_dim == cfg.region_dim, ErrorKind::kGeneration,
          "word-region cosines need d_t == d_v");
  require(cfg.word_dim >= 4, ErrorKind::kGeneration, "dims below 4 leave no room for orthogonal margins");
  require(cfg.planted_pairs_per_fake <= cfg.regions, ErrorKind::kGeneration,
          "cannot plant more pairs than there are regions");
}

VectorD inconsistency_direction(const SyntheticConfig& config) {
  Rng rng(config.inconsistency_direction_seed);
  return random_unit_orthogonal(rng, config.word_dim, {});
}

std::vector<PostRecord> generate_synthetic(const SyntheticConfig& cfg) {
  validate(cfg);
  const Geometry geo = solve_geometry(cfg);
  const VectorD q = inconsistency_direction(cfg);
  const Index dim = cfg.word_dim;
  const Index min_content = cfg.min_content_tokens == 0 ? cfg.tokens : cfg.min_content_tokens;

  Rng rng(cfg.seed);
  std::vector<Label> labels(cfg.n_real, Label::kReal);
  labels.insert(labels.end(), cfg.n_fake, Label::kFake);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<PostRecord> records;
  records.reserve(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    PostRecord rec;
    char id[32];
    std::snprintf(id, sizeof(id), "synth-%06zu", k);
    rec.post_id = id;
    rec.label = labels[k];

    const Index content = std::uniform_int_distribution<Index>(min_content, cfg.tokens)(rng);
    const VectorD topic = random_unit_orthogonal(rng, dim, {&q});

    rec.word_embeddings = MatrixF::Zero(cfg.tokens, dim);
    rec.token_mask.assign(static_cast<std::size_t>(cfg.tokens), false);
    for (Index i = 0; i < content; ++i) {
      rec.word_embeddings.row(i) = background_vector(rng, q, topic, geo.topic_weight).cast<float>().transpose();
      rec.token_mask[static_cast<std::size_t>(i)] = true;
    }
    rec.region_embeddings.resize(cfg.regions, dim);
    for (Index j = 0; j < cfg.regions; ++j) {
      rec.region_embeddings.row(j) = background_vector(rng, q, topic, geo.topic_weight).cast<float>().transpose();
    }

    if (rec.label == Label::kFake) {
      // One planted word shared by k planted regions: with a linear
      // projection onto q, k > 1 disjoint pairs would force some cross sum
      // above the non-planted ceiling.
      const Index word = std::uniform_int_distribution<Index>(0, content - 1)(rng);
      std::vector<Index> columns(static_cast<std::size_t>(cfg.regions));
      std::iota(columns.begin(), columns.end(), Index{0});
      std::shuffle(columns.begin(), columns.end(), rng);
      columns.resize(static_cast<std::size_t>(cfg.planted_pairs_per_fake));

      const VectorD p = random_unit_orthogonal(rng, dim, {&q});
      rec.word_embeddings.row(word) = planted_vector(q, p).cast<float>().transpose();
      const double rho = geo.planted_overlap;
      for (Index j : columns) {
        const VectorD spread = random_unit_orthogonal(rng, dim, {&q, &p});
        const VectorD direction = rho * p + std::sqrt(1.0 - rho * rho) * spread;
        rec.region_embeddings.row(j) = planted_vector(q, direction).cast<float>().transpose();
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

Label rule_based_label(const PostRecord& record, const VectorD& direction, double planted_cos_max) {
  const MatrixD words = record.word_embeddings.cast<double>();
  const MatrixD regions = record.region_embeddings.cast<double>();
  for (Index i = 0; i < words.rows(); ++i) {
    if (!record.token_mask[static_cast<std::size_t>(i)]) continue;
    for (Index j = 0; j < regions.rows(); ++j) {
      const double cosine = words.row(i).dot(regions.row(j)) / (words.row(i).norm() * regions.row(j).norm());
      const double along = (words.row(i) + regions.row(j)).dot(direction.transpose());
      if (cosine <= planted_cos_max && along > kPlantedSumThreshold) return Label::kFake;
    }
  }
  return Label::kReal;
}

}  // namespace cffn
