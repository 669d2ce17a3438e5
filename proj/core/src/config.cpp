#include "cffn/config.hpp"

#include <fstream>
#include <set>

namespace cffn {

namespace {

void reject_unknown_keys(const Json& j, const std::set<std::string>& known, const char* what) {
  require(j.is_object(), ErrorKind::kConfig, std::string(what) + " must be a JSON object");
  for (const auto& item : j.items()) {
    require(known.count(item.key()) == 1, ErrorKind::kConfig,
            std::string("unknown ") + what + " field '" + item.key() + "'");
  }
}

template <typename T>
void read_field(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::kConfig, std::string("field '") + key + "': " + e.what());
  }
}

AblationVariant read_variant(const Json& v) {
  if (v.is_string()) return parse_variant(v.get<std::string>());
  require(v.is_array() && !v.empty(), ErrorKind::kConfig, "variant must be a name or a non-empty list");
  std::set<AblationVariant> chosen;
  for (const auto& item : v) {
    require(item.is_string(), ErrorKind::kConfig, "variant list entries must be names");
    chosen.insert(parse_variant(item.get<std::string>()));
  }
  require(!(chosen.count(AblationVariant::kNoConsistent) && chosen.count(AblationVariant::kNoInconsistent)),
          ErrorKind::kConfig, "NO_CONSISTENT and NO_INCONSISTENT together leave no evidence to classify");
  require(chosen.size() == 1, ErrorKind::kConfig, "exactly one ablation variant per run");
  return *chosen.begin();
}

}  // namespace

void validate(const TrainConfig& c) {
  require(c.lr >= 0.0, ErrorKind::kConfig, "lr must be non-negative");
  require(c.weight_decay >= 0.0, ErrorKind::kConfig, "weight_decay must be non-negative");
  require(c.batch_size > 0, ErrorKind::kConfig, "batch_size must be positive");
  require(c.epochs > 0, ErrorKind::kConfig, "epochs must be positive (there is no default)");
  validate_beta(c.beta);
  validate_lambda(c.lambda);
  validate(c.dims);
}

TrainConfig train_config_from_json(const Json& j) {
  reject_unknown_keys(j,
                      {"lr", "weight_decay", "batch_size", "epochs", "beta", "lambda", "seed", "variant", "d_t",
                       "d_v", "d", "d_m", "d_f", "c", "split"},
                      "train config");
  TrainConfig c;
  read_field(j, "lr", c.lr);
  read_field(j, "weight_decay", c.weight_decay);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "epochs", c.epochs);
  read_field(j, "beta", c.beta);
  read_field(j, "lambda", c.lambda);
  read_field(j, "seed", c.seed);
  if (j.contains("variant")) c.variant = read_variant(j.at("variant"));
  read_field(j, "d_t", c.dims.word_dim);
  read_field(j, "d_v", c.dims.region_dim);
  read_field(j, "d", c.dims.shared_dim);
  read_field(j, "d_m", c.dims.mlp_hidden);
  read_field(j, "d_f", c.dims.classifier_hidden);
  if (j.contains("c")) {
    read_field(j, "c", c.dims.conv_channels);
  } else {
    c.dims.conv_channels = c.dims.shared_dim;
  }
  read_field(j, "split", c.split);
  return c;
}

Json to_json(const TrainConfig& c) {
  return Json{{"lr", c.lr},
              {"weight_decay", c.weight_decay},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"beta", c.beta},
              {"lambda", c.lambda},
              {"seed", c.seed},
              {"variant", std::string(to_string(c.variant))},
              {"d_t", c.dims.word_dim},
              {"d_v", c.dims.region_dim},
              {"d", c.dims.shared_dim},
              {"d_m", c.dims.mlp_hidden},
              {"d_f", c.dims.classifier_hidden},
              {"c", c.dims.conv_channels},
              {"split", c.split}};
}

SyntheticConfig synthetic_config_from_json(const Json& j) {
  reject_unknown_keys(j,
                      {"seed", "n_real", "n_fake", "N", "M", "d_t", "d_v", "consistent_cos_min",
                       "planted_pairs_per_fake", "planted_cos_max", "inconsistency_direction_seed",
                       "min_content_tokens"},
                      "synthetic config");
  SyntheticConfig c;
  read_field(j, "seed", c.seed);
  read_field(j, "n_real", c.n_real);
  read_field(j, "n_fake", c.n_fake);
  read_field(j, "N", c.tokens);
  read_field(j, "M", c.regions);
  read_field(j, "d_t", c.word_dim);
  read_field(j, "d_v", c.region_dim);
  read_field(j, "consistent_cos_min", c.consistent_cos_min);
  read_field(j, "planted_pairs_per_fake", c.planted_pairs_per_fake);
  read_field(j, "planted_cos_max", c.planted_cos_max);
  read_field(j, "inconsistency_direction_seed", c.inconsistency_direction_seed);
  read_field(j, "min_content_tokens", c.min_content_tokens);
  return c;
}

Json to_json(const SyntheticConfig& c) {
  return Json{{"seed", c.seed},
              {"n_real", c.n_real},
              {"n_fake", c.n_fake},
              {"N", c.tokens},
              {"M", c.regions},
              {"d_t", c.word_dim},
              {"d_v", c.region_dim},
              {"consistent_cos_min", c.consistent_cos_min},
              {"planted_pairs_per_fake", c.planted_pairs_per_fake},
              {"planted_cos_max", c.planted_cos_max},
              {"inconsistency_direction_seed", c.inconsistency_direction_seed},
              {"min_content_tokens", c.min_content_tokens}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorKind::kConfig, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace cffn
