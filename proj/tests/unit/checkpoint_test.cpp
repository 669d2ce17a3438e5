#include <gtest/gtest.h>

#include <filesystem>

#include "cffn/checkpoint.hpp"
#include "cffn/errors.hpp"
#include "support/oracles.hpp"

namespace cffn {
namespace {

Checkpoint sample_checkpoint() {
  TrainConfig config;
  config.epochs = 3;
  config.seed = 11;
  config.variant = AblationVariant::kNoInconsistent;
  config.dims = testing::small_dims();
  return {config, TrainParams::init(config.dims, 11)};
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kIo;
}

TEST(Checkpoint, RoundTripGivesIdenticalForwardOutputs) {
  const auto ck = sample_checkpoint();
  const auto path = std::filesystem::temp_directory_path() / "cffn_checkpoint_test.ckpt";
  save_checkpoint(ck, path);
  const auto loaded = load_checkpoint(path);
  std::filesystem::remove(path);

  EXPECT_EQ(loaded.params, ck.params);
  EXPECT_EQ(to_json(loaded.config), to_json(ck.config));
  testing::Rng rng(4);
  for (int k = 0; k < 10; ++k) {
    const auto post = testing::random_post(ck.config.dims, 5, 3, rng);
    const auto a = forward(post, ck.params, ck.config.forward_options());
    const auto b = forward(post, loaded.params, loaded.config.forward_options());
    EXPECT_EQ(a.prob_fake(), b.prob_fake());
    EXPECT_EQ(a.selection.z, b.selection.z);
  }
}

TEST(Checkpoint, EncodingIsDeterministic) {
  const auto ck = sample_checkpoint();
  EXPECT_EQ(encode_checkpoint(ck), encode_checkpoint(ck));
  const auto bytes = encode_checkpoint(ck);
  EXPECT_EQ(encode_checkpoint(decode_checkpoint(bytes)), bytes);
}

TEST(Checkpoint, Errors) {
  const auto bytes = encode_checkpoint(sample_checkpoint());
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(kind_of([&] { decode_checkpoint(bad_magic); }), ErrorKind::kFormat);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_EQ(kind_of([&] { decode_checkpoint(bad_version); }), ErrorKind::kFormat);
  for (std::size_t len : {std::size_t{6}, bytes.size() / 2, bytes.size() - 1}) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<long>(len));
    EXPECT_EQ(kind_of([&] { decode_checkpoint(cut); }), ErrorKind::kCorruption) << len;
  }
  auto trailing = bytes;
  trailing.push_back(1);
  EXPECT_EQ(kind_of([&] { decode_checkpoint(trailing); }), ErrorKind::kCorruption);
  EXPECT_EQ(kind_of([] { load_checkpoint("/nonexistent/x.ckpt"); }), ErrorKind::kIo);
}

}  // namespace
}  // namespace cffn
