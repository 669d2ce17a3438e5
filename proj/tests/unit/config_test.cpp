#include <gtest/gtest.h>

#include <fstream>

#include "cffn/config.hpp"
#include "cffn/errors.hpp"

namespace cffn {
namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kIo;
}

TEST(TrainConfig, Defaults) {
  const auto c = train_config_from_json(Json::object());
  EXPECT_EQ(c.lr, 1e-3);
  EXPECT_EQ(c.weight_decay, 1e-4);
  EXPECT_EQ(c.batch_size, 128);
  EXPECT_EQ(c.beta, 0.8);
  EXPECT_EQ(c.lambda, 0.1);
  EXPECT_EQ(c.dims.shared_dim, 256);
  EXPECT_EQ(c.dims.mlp_hidden, 128);
  EXPECT_EQ(c.dims.classifier_hidden, 64);
  EXPECT_EQ(c.dims.conv_channels, 256);
  EXPECT_EQ(c.variant, AblationVariant::kFull);
  // epochs has no default, so a bare config does not validate.
  EXPECT_EQ(kind_of([&] { validate(c); }), ErrorKind::kConfig);
}

TEST(TrainConfig, ChannelsFollowSharedDimUnlessGiven) {
  EXPECT_EQ(train_config_from_json({{"d", 32}}).dims.conv_channels, 32);
  EXPECT_EQ(train_config_from_json({{"d", 32}, {"c", 8}}).dims.conv_channels, 8);
}

TEST(TrainConfig, JsonRoundTrip) {
  const Json j = {{"lr", 0.01}, {"weight_decay", 0.0}, {"batch_size", 64}, {"epochs", 3}, {"beta", 0.6},
                  {"lambda", 0.0}, {"seed", 42}, {"variant", "NO_SEPARATION"}, {"d_t", 32}, {"d_v", 16},
                  {"d", 8}, {"d_m", 4}, {"d_f", 2}, {"c", 6}, {"split", {0.6, 0.2, 0.2}}};
  const auto c = train_config_from_json(j);
  validate(c);
  EXPECT_EQ(to_json(c), j);
  EXPECT_EQ(train_config_from_json(to_json(c)).dims, c.dims);
}

TEST(TrainConfig, VariantForms) {
  EXPECT_EQ(train_config_from_json({{"variant", {"NO_CONSISTENT"}}}).variant, AblationVariant::kNoConsistent);
  EXPECT_EQ(kind_of([] { train_config_from_json({{"variant", {"NO_CONSISTENT", "NO_INCONSISTENT"}}}); }),
            ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { train_config_from_json({{"variant", {"FULL", "NO_SEPARATION"}}}); }), ErrorKind::kConfig);
  EXPECT_THROW(train_config_from_json({{"variant", "BOTH"}}), Error);
}

TEST(TrainConfig, RejectsBadValues) {
  EXPECT_EQ(kind_of([] { train_config_from_json({{"learning_rate", 0.1}}); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { train_config_from_json({{"lr", "fast"}}); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { train_config_from_json(Json::array()); }), ErrorKind::kConfig);
  auto c = train_config_from_json({{"epochs", 1}});
  validate(c);
  c.beta = 0.0;
  EXPECT_THROW(validate(c), Error);
  c.beta = 0.8;
  c.lambda = 1.0;
  EXPECT_THROW(validate(c), Error);
  c.lambda = 0.1;
  c.batch_size = 0;
  EXPECT_THROW(validate(c), Error);
}

TEST(SyntheticConfig, JsonRoundTrip) {
  const Json j = {{"seed", 7},
                  {"n_real", 10},
                  {"n_fake", 12},
                  {"N", 6},
                  {"M", 8},
                  {"d_t", 32},
                  {"d_v", 32},
                  {"consistent_cos_min", 0.6},
                  {"planted_pairs_per_fake", 2},
                  {"planted_cos_max", 0.0},
                  {"inconsistency_direction_seed", 3},
                  {"min_content_tokens", 0}};
  const auto c = synthetic_config_from_json(j);
  EXPECT_EQ(c.n_fake, 12u);
  EXPECT_EQ(c.planted_pairs_per_fake, 2);
  EXPECT_EQ(to_json(c), j);
  EXPECT_THROW(synthetic_config_from_json({{"k", 1}}), Error);
}

TEST(ReadJsonFile, Errors) {
  EXPECT_EQ(kind_of([] { read_json_file("/nonexistent/config.json"); }), ErrorKind::kIo);
  const auto path = std::filesystem::temp_directory_path() / "cffn_config_test_bad.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  EXPECT_EQ(kind_of([&] { read_json_file(path); }), ErrorKind::kConfig);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace cffn
