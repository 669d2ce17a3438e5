#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "cffn/errors.hpp"
#include "cffn/record.hpp"
#include "support/oracles.hpp"

namespace cffn {
namespace {

using testing::Rng;

std::vector<PostRecord> random_records(Rng& rng, std::size_t count, Index d_t, Index d_v, Index m) {
  std::vector<PostRecord> records;
  for (std::size_t k = 0; k < count; ++k) {
    const Index n = std::uniform_int_distribution<Index>(1, 7)(rng);
    PostRecord r;
    r.post_id = "post-" + std::to_string(k) + (k % 3 == 0 ? "-\xc3\xa9" : "");
    r.label = k % 2 ? Label::kFake : Label::kReal;
    r.word_embeddings = testing::random_matrix<float>(n, d_t, rng, 3.0);
    r.region_embeddings = testing::random_matrix<float>(m, d_v, rng, 3.0);
    r.token_mask = testing::random_mask(n, rng);
    records.push_back(std::move(r));
  }
  return records;
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

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cffn_archive_test_" + name);
}

TEST(Archive, RoundTripThreeRecords) {
  Rng rng(1);
  const auto records = random_records(rng, 3, 4, 5, 2);
  const auto path = temp_path("three.cfe");
  write_archive(records, path);
  const auto archive = read_archive(path);
  EXPECT_EQ(archive.header().record_count, 3u);
  EXPECT_EQ(archive.header().word_dim, 4u);
  EXPECT_EQ(archive.header().region_dim, 5u);
  EXPECT_EQ(archive.header().region_count, 2u);
  EXPECT_EQ(archive.records(), records);
  std::filesystem::remove(path);
}

TEST(Archive, RoundTripProperty) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index d_t = std::uniform_int_distribution<Index>(1, 9)(rng);
    const Index d_v = std::uniform_int_distribution<Index>(1, 9)(rng);
    const Index m = std::uniform_int_distribution<Index>(1, 6)(rng);
    const auto records = random_records(rng, 1 + seed % 6, d_t, d_v, m);
    EXPECT_EQ(decode_archive(encode_archive(records)).records(), records) << "seed " << seed;
  }
}

TEST(Archive, ByteExactLayout) {
  PostRecord r;
  r.post_id = "ab";
  r.label = Label::kFake;
  r.word_embeddings = MatrixF{{1.0f, 2.0f}};
  r.region_embeddings = MatrixF{{3.0f}};
  r.token_mask = {true};
  const auto bytes = encode_archive({r});

  std::vector<std::uint8_t> expected = {'C', 'F', 'E', '1', 1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0,
                                        1, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 'a', 'b', 1, 1, 0, 0, 0, 1};
  for (float f : {1.0f, 2.0f, 3.0f}) {
    std::uint8_t b[4];
    std::memcpy(b, &f, 4);
    expected.insert(expected.end(), b, b + 4);
  }
  EXPECT_EQ(bytes, expected);
}

TEST(Archive, WritesAreByteIdentical) {
  Rng rng(3);
  const auto records = random_records(rng, 4, 3, 3, 3);
  const auto a = temp_path("a.cfe");
  const auto b = temp_path("b.cfe");
  write_archive(records, a);
  write_archive(records, b);
  std::ifstream fa(a, std::ios::binary);
  std::ifstream fb(b, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, sb);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Archive, EmptyRecordListRejected) {
  EXPECT_EQ(kind_of([] { encode_archive({}); }), ErrorKind::kValidation);
}

TEST(Archive, HeterogeneousDimsRejected) {
  Rng rng(4);
  auto records = random_records(rng, 2, 3, 3, 2);
  auto other = random_records(rng, 1, 4, 3, 2);
  records.push_back(other.front());
  EXPECT_EQ(kind_of([&] { encode_archive(records); }), ErrorKind::kDimensionMismatch);
  records.pop_back();
  other = random_records(rng, 1, 3, 3, 5);
  records.push_back(other.front());
  EXPECT_EQ(kind_of([&] { encode_archive(records); }), ErrorKind::kDimensionMismatch);
}

TEST(Archive, WrongMagicIsFormatError) {
  Rng rng(5);
  auto bytes = encode_archive(random_records(rng, 2, 2, 2, 2));
  std::memcpy(bytes.data(), "XXXX", 4);
  EXPECT_EQ(kind_of([&] { decode_archive(bytes); }), ErrorKind::kFormat);
}

TEST(Archive, WrongVersionIsFormatError) {
  Rng rng(5);
  auto bytes = encode_archive(random_records(rng, 1, 2, 2, 2));
  bytes[4] = 2;
  EXPECT_EQ(kind_of([&] { decode_archive(bytes); }), ErrorKind::kFormat);
}

TEST(Archive, EveryTruncationIsCorruption) {
  Rng rng(6);
  const auto bytes = encode_archive(random_records(rng, 2, 2, 2, 2));
  for (std::size_t len = 8; len < bytes.size(); ++len) {
    std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<long>(len));
    EXPECT_EQ(kind_of([&] { decode_archive(cut); }), ErrorKind::kCorruption) << "length " << len;
  }
}

TEST(Archive, TrailingBytesAreCorruption) {
  Rng rng(6);
  auto bytes = encode_archive(random_records(rng, 1, 2, 2, 2));
  bytes.push_back(0);
  EXPECT_EQ(kind_of([&] { decode_archive(bytes); }), ErrorKind::kCorruption);
}

TEST(Archive, NonFiniteEntryIsValidationError) {
  Rng rng(7);
  auto records = random_records(rng, 1, 2, 2, 2);
  auto bytes = encode_archive(records);
  const float nan = std::numeric_limits<float>::quiet_NaN();
  // Last four bytes are the final region entry.
  std::memcpy(bytes.data() + bytes.size() - 4, &nan, 4);
  EXPECT_EQ(kind_of([&] { decode_archive(bytes); }), ErrorKind::kValidation);

  records[0].word_embeddings(0, 0) = std::numeric_limits<float>::infinity();
  EXPECT_EQ(kind_of([&] { encode_archive(records); }), ErrorKind::kValidation);
}

TEST(Archive, BadLabelAndMaskBytesRejected) {
  PostRecord r;
  r.post_id = "x";
  r.word_embeddings = MatrixF{{1.0f}};
  r.region_embeddings = MatrixF{{1.0f}};
  r.token_mask = {true};
  auto bytes = encode_archive({r});
  const std::size_t label_at = 4 + 4 * 4 + 8 + 4 + 1;
  auto bad_label = bytes;
  bad_label[label_at] = 2;
  EXPECT_EQ(kind_of([&] { decode_archive(bad_label); }), ErrorKind::kValidation);
  auto bad_mask = bytes;
  bad_mask[label_at + 1 + 4] = 7;
  EXPECT_EQ(kind_of([&] { decode_archive(bad_mask); }), ErrorKind::kValidation);
}

TEST(Archive, RecordInvariants) {
  PostRecord r;
  r.post_id = "x";
  r.word_embeddings = MatrixF{{1.0f}, {2.0f}};
  r.region_embeddings = MatrixF{{1.0f}};
  r.token_mask = {false, false};
  EXPECT_EQ(kind_of([&] { validate_record(r); }), ErrorKind::kValidation);
  r.token_mask = {true};
  EXPECT_EQ(kind_of([&] { validate_record(r); }), ErrorKind::kValidation);
  r.token_mask = {true, false};
  EXPECT_NO_THROW(validate_record(r));
  EXPECT_EQ(r.content_token_count(), 1);
}

TEST(Archive, LookupAndUnknownId) {
  Rng rng(8);
  const EmbeddingArchive archive(random_records(rng, 3, 2, 2, 2));
  EXPECT_TRUE(archive.contains("post-1"));
  EXPECT_EQ(archive.at("post-2").post_id, "post-2");
  EXPECT_EQ(archive.ids().size(), 3u);
  EXPECT_EQ(kind_of([&] { archive.at("missing"); }), ErrorKind::kUnknownId);
}

TEST(Archive, DuplicateIdsRejected) {
  Rng rng(9);
  auto records = random_records(rng, 2, 2, 2, 2);
  records[1].post_id = records[0].post_id;
  EXPECT_EQ(kind_of([&] { EmbeddingArchive archive(records); }), ErrorKind::kValidation);
}

TEST(Archive, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { read_archive("/nonexistent/dir/x.cfe"); }), ErrorKind::kIo);
}

}  // namespace
}  // namespace cffn
