#include "cffn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace cffn {

namespace {

constexpr char kMagic[4] = {'C', 'F', 'C', 'K'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_bytes(std::vector<std::uint8_t>& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

class Cursor {
 public:
  explicit Cursor(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string str(const char* what) {
    const auto n = u32(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    require(bytes_.size() - pos_ >= n, ErrorKind::kCorruption,
            std::string("truncated checkpoint while reading ") + what);
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, kCheckpointVersion);
  put_bytes(out, to_json(ck.config).dump());
  const auto tensors = ck.params.tensors();
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_bytes(out, t.name);
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (Index s : t.shape) put_u32(out, static_cast<std::uint32_t>(s));
    for (Index i = 0; i < t.size(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(t.data[i])));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorKind::kFormat,
          "missing CFCK magic");
  Cursor cur(bytes);
  cur.u32("magic");
  const auto version = cur.u32("version");
  require(version == kCheckpointVersion, ErrorKind::kFormat, "unsupported checkpoint version " + std::to_string(version));

  Checkpoint ck;
  const auto config_text = cur.str("config");
  try {
    ck.config = train_config_from_json(Json::parse(config_text));
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorKind::kCorruption, std::string("checkpoint config is not JSON: ") + e.what());
  }
  ck.params = TrainParams::zeros(ck.config.dims);

  auto tensors = ck.params.tensors();
  const auto count = cur.u32("tensor count");
  require(count == tensors.size(), ErrorKind::kFormat,
          "checkpoint holds " + std::to_string(count) + " tensors, model has " + std::to_string(tensors.size()));
  for (auto& t : tensors) {
    const auto name = cur.str("tensor name");
    require(name == t.name, ErrorKind::kFormat, "expected tensor '" + t.name + "', found '" + name + "'");
    const auto rank = cur.u32("rank");
    std::vector<Index> shape(rank);
    for (auto& s : shape) s = cur.u32("dims");
    require(shape == t.shape, ErrorKind::kFormat, "tensor '" + name + "' shape differs from the config dims");
    for (Index i = 0; i < t.size(); ++i) t.data[i] = std::bit_cast<float>(cur.u32("tensor payload"));
  }
  require(cur.done(), ErrorKind::kCorruption, "trailing bytes after the last tensor");
  require(ck.params.all_finite(), ErrorKind::kValidation, "checkpoint holds non-finite parameters");
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(ck);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace cffn
