#pragma once

#include <filesystem>
#include <vector>

#include "cffn/config.hpp"
#include "cffn/trainer.hpp"

namespace cffn {

/// Binary checkpoint, little-endian throughout:
///   "CFCK", u32 version (=1), u32 config_len, config JSON (UTF-8),
///   u32 tensor_count, then per tensor: u32 name_len, name, u32 rank,
///   rank x u32 dims, prod(dims) x f32 values.
struct Checkpoint {
  TrainConfig config;
  TrainParams params;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cffn
