#include "sentdoc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace sentdoc {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'O', 'C'};
constexpr std::uint8_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float f) {
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

void put_section(std::string& out, const std::string& name,
                 const NumArray& a) {
  put_u16(out, static_cast<std::uint16_t>(name.size()));
  out += name;
  put_u64(out, a.size());
  for (double v : a.data) put_f32(out, static_cast<float>(v));
}

class Reader {
 public:
  Reader(std::string bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

  void raw(void* dst, std::size_t n, const char* what) {
    if (remaining() < n)
      throw TruncatedFileError(path_ + ": truncated while reading " +
                               std::string(what));
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::uint16_t u16(const char* what) {
    std::uint8_t b[2];
    raw(b, 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }

  std::uint32_t u32(const char* what) {
    std::uint8_t b[4];
    raw(b, 4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  std::uint64_t u64(const char* what) {
    std::uint8_t b[8];
    raw(b, 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  std::string name(std::size_t n, const char* what) {
    std::string s(n, '\0');
    raw(s.data(), n, what);
    return s;
  }

  float f32(const char* what) {
    return std::bit_cast<float>(u32(what));
  }

  const std::string& path() const { return path_; }

 private:
  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

/// Reads one section header and checks it against the expected name.
std::uint64_t expect_section(Reader& r, const std::string& expected) {
  const std::uint16_t len = r.u16("section name length");
  const std::string name = r.name(len, "section name");
  if (name != expected)
    throw MalformedCheckpointError(r.path() + ": expected section '" +
                                   expected + "', found '" + name + "'");
  return r.u64("section element count");
}

void read_array_section(Reader& r, const std::string& expected, NumArray& a) {
  const std::uint64_t count = expect_section(r, expected);
  if (count != a.size())
    throw MalformedCheckpointError(
        r.path() + ": section '" + expected + "' holds " +
        std::to_string(count) + " elements, expected " +
        std::to_string(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    a.data[i] = static_cast<double>(r.f32("section payload"));
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(ck.params.embedding.rows()));
  put_u32(out, static_cast<std::uint32_t>(kEmbedDim));
  put_u32(out, static_cast<std::uint32_t>(kOutputDim));

  const auto blocks = named_param_blocks(ck.params);
  for (const auto& [name, block] : blocks) put_section(out, name, *block);

  if (ck.opt.kind == "adam") {
    if (ck.opt.m.size() != blocks.size() || ck.opt.v.size() != blocks.size())
      throw std::invalid_argument(
          "save_checkpoint: adam state must hold one m and one v array per "
          "parameter block");
    for (std::size_t i = 0; i < blocks.size(); ++i)
      put_section(out, "opt.adam.m." + blocks[i].first, ck.opt.m[i]);
    for (std::size_t i = 0; i < blocks.size(); ++i)
      put_section(out, "opt.adam.v." + blocks[i].first, ck.opt.v[i]);
  } else if (ck.opt.kind != "sgd") {
    throw std::invalid_argument("save_checkpoint: unknown optimizer kind '" +
                                ck.opt.kind + "'");
  }

  // rng: 16 raw state bytes in the space of 4 f32 elements.
  put_u16(out, 3);
  out += "rng";
  put_u64(out, 4);
  for (std::uint8_t b : ck.rng_state) out.push_back(static_cast<char>(b));

  // step: u64 in the space of 2 f32 elements.
  put_u16(out, 4);
  out += "step";
  put_u64(out, 2);
  put_u64(out, ck.step);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  Reader r(std::move(bytes), path);

  char magic[4];
  r.raw(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw BadMagicError(path + ": bad magic bytes (not a checkpoint file)");
  std::uint8_t version = 0;
  r.raw(&version, 1, "version");
  if (version != kVersion)
    throw UnsupportedVersionError(path + ": unsupported format version " +
                                  std::to_string(version));
  const std::uint32_t vocab = r.u32("vocab size");
  const std::uint32_t d_w = r.u32("embedding dim");
  const std::uint32_t d = r.u32("output dim");
  if (d_w != kEmbedDim || d != kOutputDim)
    throw MalformedCheckpointError(path + ": unexpected dimensions " +
                                   std::to_string(d_w) + "/" +
                                   std::to_string(d));
  if (vocab < 3)
    throw MalformedCheckpointError(path + ": vocab size below minimum");

  Checkpoint ck;
  ck.version = version;
  ck.params = zero_model(vocab);
  const auto blocks = named_param_blocks(ck.params);
  for (const auto& [name, block] : blocks)
    read_array_section(r, name, *block);

  // Optimizer sections are present only for adam; peek at the next name.
  const std::uint16_t next_len = r.u16("section name length");
  std::string next = r.name(next_len, "section name");
  if (next == "opt.adam.m." + blocks.front().first) {
    ck.opt.kind = "adam";
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      NumArray a = NumArray::zeros(blocks[i].second->shape);
      if (i == 0) {
        const std::uint64_t count = r.u64("section element count");
        if (count != a.size())
          throw MalformedCheckpointError(path +
                                         ": adam m section size mismatch");
        for (std::size_t j = 0; j < a.size(); ++j)
          a.data[j] = static_cast<double>(r.f32("section payload"));
      } else {
        read_array_section(r, "opt.adam.m." + blocks[i].first, a);
      }
      ck.opt.m.push_back(std::move(a));
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      NumArray a = NumArray::zeros(blocks[i].second->shape);
      read_array_section(r, "opt.adam.v." + blocks[i].first, a);
      ck.opt.v.push_back(std::move(a));
    }
    const std::uint16_t rng_len = r.u16("section name length");
    next = r.name(rng_len, "section name");
  } else {
    ck.opt.kind = "sgd";
  }

  if (next != "rng")
    throw MalformedCheckpointError(path + ": expected section 'rng', found '" +
                                   next + "'");
  if (r.u64("section element count") != 4)
    throw MalformedCheckpointError(path + ": rng section size mismatch");
  r.raw(ck.rng_state.data(), 16, "rng state");

  if (expect_section(r, "step") != 2)
    throw MalformedCheckpointError(path + ": step section size mismatch");
  ck.step = r.u64("step counter");

  if (!r.at_end())
    throw MalformedCheckpointError(path + ": trailing bytes after final "
                                          "section");
  return ck;
}

}  // namespace sentdoc
