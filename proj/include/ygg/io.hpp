#pragma once

// Little-endian field codec shared by the store formats, plus file helpers.

#include <ygg/errors.hpp>
#include <ygg/symstring.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>

namespace ygg::io {

class Writer {
public:
  template <typename UInt>
  void put(UInt v) {
    for (std::size_t b = 0; b < sizeof(UInt); ++b)
      out_.push_back(static_cast<Byte>(static_cast<std::uint64_t>(v) >> (8 * b)));
  }
  void u8(std::uint8_t v) { put(v); }
  void u16(std::uint16_t v) { put(v); }
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void raw(std::span<const Byte> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }
  void raw(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }

  const Bytes& bytes() const { return out_; }
  Bytes take() { return std::move(out_); }

private:
  Bytes out_;
};

// Every decode failure is a CorruptionError: the reader only ever sees
// persisted state.
class Reader {
public:
  explicit Reader(std::span<const Byte> in) : in_(in) {}

  template <typename UInt>
  UInt get(const char* what) {
    need(sizeof(UInt), what);
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < sizeof(UInt); ++b)
      v |= std::uint64_t{in_[pos_ + b]} << (8 * b);
    pos_ += sizeof(UInt);
    return static_cast<UInt>(v);
  }
  std::uint8_t u8(const char* what) { return get<std::uint8_t>(what); }
  std::uint16_t u16(const char* what) { return get<std::uint16_t>(what); }
  std::uint32_t u32(const char* what) { return get<std::uint32_t>(what); }
  std::uint64_t u64(const char* what) { return get<std::uint64_t>(what); }

  std::span<const Byte> raw(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  void expect_magic(std::string_view magic, std::uint8_t version) {
    auto m = raw(magic.size(), "magic");
    if (!std::equal(m.begin(), m.end(), magic.begin()))
      throw CorruptionError("bad magic: expected \"" + std::string(magic) + "\"");
    const auto v = u8("version");
    if (v != version)
      throw CorruptionError("unsupported version " + std::to_string(v));
  }

  // Count fields are checked against what could possibly follow so a
  // corrupted count cannot trigger a huge allocation.
  std::uint64_t count(std::size_t min_item_bytes, const char* what) {
    const auto c = u64(what);
    if (min_item_bytes > 0 && c > remaining() / min_item_bytes)
      throw CorruptionError(std::string("truncated: ") + what + " claims " + std::to_string(c) +
                            " entries");
    return c;
  }

  std::size_t remaining() const { return in_.size() - pos_; }

  void expect_end() const {
    if (remaining() != 0)
      throw CorruptionError(std::to_string(remaining()) + " trailing bytes");
  }

private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n)
      throw CorruptionError(std::string("truncated while reading ") + what);
  }

  std::span<const Byte> in_;
  std::size_t pos_ = 0;
};

// Params block shared by every store format: k u8, n_o u32, n_b u32, s_h u16.
inline void write_params(Writer& w, const Params& p) {
  w.u8(static_cast<std::uint8_t>(p.k));
  w.u32(static_cast<std::uint32_t>(p.n_o));
  w.u32(static_cast<std::uint32_t>(p.n_b));
  w.u16(static_cast<std::uint16_t>(p.s_h));
}

inline Params read_params(Reader& r) {
  Params p;
  p.k = r.u8("params.k");
  p.n_o = r.u32("params.n_o");
  p.n_b = r.u32("params.n_b");
  p.s_h = r.u16("params.s_h");
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw CorruptionError(std::string("invalid params block: ") + e.what());
  }
  return p;
}

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidArgument("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const Byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw InvalidArgument("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw InvalidArgument("short write to " + path.string());
}

} // namespace ygg::io
