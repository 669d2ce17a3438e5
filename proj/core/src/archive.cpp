#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cffn/record.hpp"

namespace cffn {

namespace {

constexpr char kMagic[4] = {'C', 'F', 'E', '1'};

class ByteWriter {
 public:
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }

  template <typename UInt>
  void uint(UInt value) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
  }

  void f32(float value) { uint(std::bit_cast<std::uint32_t>(value)); }

  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void raw(void* out, std::size_t n, const char* what) {
    need(n, what);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }

  template <typename UInt>
  UInt uint(const char* what) {
    need(sizeof(UInt), what);
    UInt value = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      value |= static_cast<UInt>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(UInt);
    return value;
  }

  float f32(const char* what) { return std::bit_cast<float>(uint<std::uint32_t>(what)); }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (remaining() < n) {
      raise(ErrorKind::kCorruption, std::string("truncated archive while reading ") + what);
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

void check_homogeneous(const std::vector<PostRecord>& records) {
  require(!records.empty(), ErrorKind::kValidation, "cannot write an archive with no records");
  const auto& first = records.front();
  for (const auto& r : records) {
    validate_record(r);
    require_dims(r.word_embeddings.cols() == first.word_embeddings.cols() &&
                     r.region_embeddings.cols() == first.region_embeddings.cols() &&
                     r.region_embeddings.rows() == first.region_embeddings.rows(),
                 "record '" + r.post_id + "' has dims differing from '" + first.post_id + "'");
  }
}

}  // namespace

std::string_view to_string(Label label) { return label == Label::kFake ? "FAKE" : "REAL"; }

Index PostRecord::content_token_count() const {
  return static_cast<Index>(std::count(token_mask.begin(), token_mask.end(), true));
}

void validate_record(const PostRecord& record) {
  const auto& id = record.post_id;
  require(record.word_embeddings.rows() >= 1 && record.word_embeddings.cols() >= 1,
          ErrorKind::kValidation, "record '" + id + "' has an empty word matrix");
  require(record.region_embeddings.rows() >= 1 && record.region_embeddings.cols() >= 1,
          ErrorKind::kValidation, "record '" + id + "' has an empty region matrix");
  require(static_cast<Index>(record.token_mask.size()) == record.word_embeddings.rows(),
          ErrorKind::kValidation, "record '" + id + "' token mask length differs from N");
  require(record.content_token_count() >= 1, ErrorKind::kValidation,
          "record '" + id + "' has no content token");
  require(record.word_embeddings.allFinite() && record.region_embeddings.allFinite(),
          ErrorKind::kValidation, "record '" + id + "' contains a non-finite embedding entry");
  require(record.label == Label::kReal || record.label == Label::kFake, ErrorKind::kValidation,
          "record '" + id + "' has an invalid label");
}

EmbeddingArchive::EmbeddingArchive(std::vector<PostRecord> records) : records_(std::move(records)) {
  header_.version = kArchiveVersion;
  header_.record_count = records_.size();
  if (!records_.empty()) {
    header_.word_dim = static_cast<std::uint32_t>(records_.front().word_embeddings.cols());
    header_.region_dim = static_cast<std::uint32_t>(records_.front().region_embeddings.cols());
    header_.region_count = static_cast<std::uint32_t>(records_.front().region_embeddings.rows());
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto [it, inserted] = index_.emplace(records_[i].post_id, i);
    require(inserted, ErrorKind::kValidation, "duplicate post id '" + records_[i].post_id + "'");
  }
}

bool EmbeddingArchive::contains(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

const PostRecord& EmbeddingArchive::at(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  require(it != index_.end(), ErrorKind::kUnknownId, "no record with id '" + std::string(id) + "'");
  return records_[it->second];
}

std::vector<std::string> EmbeddingArchive::ids() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.post_id);
  return out;
}

std::vector<std::uint8_t> encode_archive(const std::vector<PostRecord>& records) {
  check_homogeneous(records);
  const auto& first = records.front();

  ByteWriter w;
  w.raw(kMagic, sizeof(kMagic));
  w.uint<std::uint32_t>(kArchiveVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(first.word_embeddings.cols()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(first.region_embeddings.cols()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(first.region_embeddings.rows()));
  w.uint<std::uint64_t>(records.size());

  for (const auto& r : records) {
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(r.post_id.size()));
    w.raw(r.post_id.data(), r.post_id.size());
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(r.label));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(r.token_count()));
    for (bool m : r.token_mask) w.uint<std::uint8_t>(m ? 1 : 0);
    for (Index k = 0; k < r.word_embeddings.size(); ++k) w.f32(r.word_embeddings.data()[k]);
    for (Index k = 0; k < r.region_embeddings.size(); ++k) w.f32(r.region_embeddings.data()[k]);
  }
  return w.take();
}

void write_archive(const std::vector<PostRecord>& records, const std::filesystem::path& path) {
  const auto bytes = encode_archive(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

EmbeddingArchive decode_archive(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  if (bytes.size() < sizeof(kMagic) || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    raise(ErrorKind::kFormat, "missing CFE1 magic");
  }
  char magic[4];
  r.raw(magic, sizeof(magic), "magic");

  ArchiveHeader header;
  header.version = r.uint<std::uint32_t>("version");
  require(header.version == kArchiveVersion, ErrorKind::kFormat,
          "unsupported archive version " + std::to_string(header.version));
  header.word_dim = r.uint<std::uint32_t>("d_t");
  header.region_dim = r.uint<std::uint32_t>("d_v");
  header.region_count = r.uint<std::uint32_t>("M");
  header.record_count = r.uint<std::uint64_t>("record_count");
  require(header.word_dim > 0 && header.region_dim > 0 && header.region_count > 0,
          ErrorKind::kValidation, "archive header has a zero dimension");

  const Index d_t = header.word_dim;
  const Index d_v = header.region_dim;
  const Index m = header.region_count;

  std::vector<PostRecord> records;
  for (std::uint64_t k = 0; k < header.record_count; ++k) {
    PostRecord rec;
    const auto id_len = r.uint<std::uint32_t>("id length");
    rec.post_id.resize(id_len);
    r.raw(rec.post_id.data(), id_len, "post id");

    const auto label = r.uint<std::uint8_t>("label");
    require(label <= 1, ErrorKind::kValidation,
            "record '" + rec.post_id + "' has label byte " + std::to_string(label));
    rec.label = static_cast<Label>(label);

    const Index n = r.uint<std::uint32_t>("N");
    require(n >= 1, ErrorKind::kValidation, "record '" + rec.post_id + "' has N = 0");
    // Guard against absurd N before allocating.
    if (static_cast<std::uint64_t>(n) * (1 + 4 * static_cast<std::uint64_t>(d_t)) > r.remaining()) {
      raise(ErrorKind::kCorruption, "truncated archive inside record '" + rec.post_id + "'");
    }
    rec.token_mask.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      const auto flag = r.uint<std::uint8_t>("token mask");
      require(flag <= 1, ErrorKind::kValidation, "record '" + rec.post_id + "' has a non-0/1 mask byte");
      rec.token_mask[static_cast<std::size_t>(i)] = flag == 1;
    }
    rec.word_embeddings.resize(n, d_t);
    for (Index i = 0; i < rec.word_embeddings.size(); ++i) {
      rec.word_embeddings.data()[i] = r.f32("word embeddings");
    }
    rec.region_embeddings.resize(m, d_v);
    for (Index i = 0; i < rec.region_embeddings.size(); ++i) {
      rec.region_embeddings.data()[i] = r.f32("region embeddings");
    }
    validate_record(rec);
    records.push_back(std::move(rec));
  }
  require(r.remaining() == 0, ErrorKind::kCorruption,
          std::to_string(r.remaining()) + " trailing bytes after the declared record_count");

  EmbeddingArchive archive(std::move(records));
  if (archive.size() == 0) return archive;
  require(archive.header() == header, ErrorKind::kValidation, "archive header disagrees with its records");
  return archive;
}

EmbeddingArchive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_archive(bytes);
}

}  // namespace cffn
