#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "cffn/model.hpp"
#include "cffn/split.hpp"
#include "cffn/synthetic.hpp"

namespace cffn {

using Json = nlohmann::json;

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 1e-4;
  int batch_size = 128;
  int epochs = 0;  // required, no default
  double beta = 0.8;
  double lambda = 0.1;
  std::uint64_t seed = 0;
  AblationVariant variant = AblationVariant::kFull;
  ModelDims dims;
  SplitRatios split = {0.8, 0.0, 0.2};

  ForwardOptions forward_options() const { return {lambda, variant}; }
};

void validate(const TrainConfig& config);

/// Field names mirror TrainConfig: lr, weight_decay, batch_size, epochs, beta,
/// lambda, seed, variant, d_t, d_v, d, d_m, d_f, c, split. Unknown keys are
/// rejected. `variant` may be a string or a one-element list.
TrainConfig train_config_from_json(const Json& j);
Json to_json(const TrainConfig& config);

SyntheticConfig synthetic_config_from_json(const Json& j);
Json to_json(const SyntheticConfig& config);

Json read_json_file(const std::filesystem::path& path);

}  // namespace cffn
