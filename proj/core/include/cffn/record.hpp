#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cffn/tensor.hpp"

namespace cffn {

enum class Label : std::uint8_t { kReal = 0, kFake = 1 };

std::string_view to_string(Label label);

/// One multimodal post: per-token word embeddings (N x d_t), per-region
/// image embeddings (M x d_v), and a mask marking content tokens.
struct PostRecord {
  std::string post_id;
  Label label = Label::kReal;
  MatrixF word_embeddings;
  MatrixF region_embeddings;
  std::vector<bool> token_mask;

  Index token_count() const { return word_embeddings.rows(); }
  Index region_count() const { return region_embeddings.rows(); }
  Index content_token_count() const;

  friend bool operator==(const PostRecord&, const PostRecord&) = default;
};

/// Throws kValidation when the record breaks a structural invariant
/// (empty matrices, mask length, no content token, non-finite entries).
void validate_record(const PostRecord& record);

struct ArchiveHeader {
  std::uint32_t version = 1;
  std::uint32_t word_dim = 0;
  std::uint32_t region_dim = 0;
  std::uint32_t region_count = 0;
  std::uint64_t record_count = 0;

  friend bool operator==(const ArchiveHeader&, const ArchiveHeader&) = default;
};

/// In-memory CFE1 archive. Immutable once built; safe to share across readers.
class EmbeddingArchive {
 public:
  EmbeddingArchive() = default;
  explicit EmbeddingArchive(std::vector<PostRecord> records);

  const ArchiveHeader& header() const { return header_; }
  const std::vector<PostRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  bool contains(std::string_view id) const;
  const PostRecord& at(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  ArchiveHeader header_;
  std::vector<PostRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr std::uint32_t kArchiveVersion = 1;

void write_archive(const std::vector<PostRecord>& records, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_archive(const std::vector<PostRecord>& records);

EmbeddingArchive read_archive(const std::filesystem::path& path);
EmbeddingArchive decode_archive(const std::vector<std::uint8_t>& bytes);

}  // namespace cffn
