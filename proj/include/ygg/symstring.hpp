#pragma once

// k-bit symbol strings, bit packing, fixed-size chunking and the seeded
// random stream used by every randomized step of the protocol.

#include <ygg/errors.hpp>

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ygg {

using Symbol = std::uint32_t;
using Byte = std::uint8_t;
using Bytes = std::vector<Byte>;

inline bool valid_symbol_width(unsigned k) {
  return k == 1 || k == 2 || k == 4 || k == 8 || k == 16 || k == 32;
}

inline void check_symbol_width(unsigned k) {
  if (!valid_symbol_width(k))
    throw InvalidArgument("symbol width k must be one of 1,2,4,8,16,32 (got " +
                          std::to_string(k) + ")");
}

// Largest symbol value representable with k bits.
inline std::uint64_t max_symbol(unsigned k) {
  return k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
}

// ceil(log2(n)); 0 for n <= 1. Width of a position pointer into n slots.
inline unsigned ceil_log2(std::uint64_t n) {
  return n <= 1 ? 0u : static_cast<unsigned>(std::bit_width(n - 1));
}

// Protocol parameters. Sizes are symbol counts.
struct Params {
  unsigned k = 8;          // symbol width in bits
  std::size_t n_o = 128;   // original string length
  std::size_t n_b = 120;   // base length
  std::size_t tau = 0;     // max cloud edit ops per string
  unsigned s_h = 64;       // accounting size of a file identifier, bits

  std::size_t deletions() const { return n_o - n_b; }
  unsigned pos_bits() const { return ceil_log2(n_o); }
  std::uint64_t original_bits() const { return std::uint64_t{k} * n_o; }
  std::uint64_t base_bits() const { return std::uint64_t{k} * n_b; }

  void validate() const {
    check_symbol_width(k);
    if (n_b < 1 || n_b > n_o)
      throw InvalidArgument("params require 1 <= n_b <= n_o (n_b=" + std::to_string(n_b) +
                            ", n_o=" + std::to_string(n_o) + ")");
    if (n_o > 0xFFFFFFFFu)
      throw InvalidArgument("n_o must fit in 32 bits");
    if (s_h < 1 || s_h > 0xFFFF)
      throw InvalidArgument("s_h must be in [1, 65535]");
  }

  friend bool operator==(const Params&, const Params&) = default;
};

// A sequence of k-bit symbols. Every symbol is < 2^k.
class SymbolString {
public:
  SymbolString() = default;
  explicit SymbolString(unsigned k) : k_(k) { check_symbol_width(k); }
  SymbolString(unsigned k, std::vector<Symbol> symbols) : k_(k), symbols_(std::move(symbols)) {
    check_symbol_width(k);
    const auto limit = max_symbol(k);
    for (Symbol s : symbols_)
      if (s > limit)
        throw InvalidArgument("symbol " + std::to_string(s) + " does not fit in " +
                              std::to_string(k) + " bits");
  }
  SymbolString(unsigned k, std::initializer_list<Symbol> symbols)
      : SymbolString(k, std::vector<Symbol>(symbols)) {}

  unsigned k() const { return k_; }
  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  std::span<const Symbol> view() const { return symbols_; }
  const std::vector<Symbol>& symbols() const { return symbols_; }
  auto begin() const { return symbols_.begin(); }
  auto end() const { return symbols_.end(); }

  friend bool operator==(const SymbolString&, const SymbolString&) = default;

private:
  unsigned k_ = 8;
  std::vector<Symbol> symbols_;
};

namespace detail {

// Reads consecutive k-bit fields, MSB first; bits past the end read as zero.
class BitReader {
public:
  explicit BitReader(std::span<const Byte> bytes) : bytes_(bytes) {}

  std::uint64_t read(unsigned width) {
    std::uint64_t v = 0;
    if (width % 8 == 0 && pos_ % 8 == 0) {
      for (unsigned b = 0; b < width / 8; ++b) {
        const std::size_t idx = pos_ / 8 + b;
        v = (v << 8) | (idx < bytes_.size() ? bytes_[idx] : 0);
      }
      pos_ += width;
      return v;
    }
    for (unsigned b = 0; b < width; ++b, ++pos_) {
      const std::size_t idx = pos_ / 8;
      const unsigned bit = idx < bytes_.size() ? (bytes_[idx] >> (7 - pos_ % 8)) & 1u : 0u;
      v = (v << 1) | bit;
    }
    return v;
  }

private:
  std::span<const Byte> bytes_;
  std::size_t pos_ = 0;
};

class BitWriter {
public:
  void write(std::uint64_t v, unsigned width) {
    if (width % 8 == 0 && bits_ % 8 == 0) {
      for (unsigned b = width / 8; b-- > 0;)
        out_.push_back(static_cast<Byte>(v >> (8 * b)));
      bits_ += width;
      return;
    }
    for (unsigned b = width; b-- > 0; ++bits_) {
      if (bits_ % 8 == 0)
        out_.push_back(0);
      if ((v >> b) & 1u)
        out_.back() |= static_cast<Byte>(1u << (7 - bits_ % 8));
    }
  }
  Bytes take() { return std::move(out_); }

private:
  Bytes out_;
  std::size_t bits_ = 0;
};

} // namespace detail

// Big-endian bit order within each byte, symbols laid out back to back, the
// last byte zero-padded in its low bits.
inline Bytes pack(std::span<const Symbol> symbols, unsigned k) {
  check_symbol_width(k);
  detail::BitWriter w;
  for (Symbol s : symbols)
    w.write(s, k);
  return w.take();
}

inline Bytes pack(const SymbolString& s) { return pack(s.view(), s.k()); }

inline std::size_t packed_size(std::size_t count, unsigned k) {
  return (count * k + 7) / 8;
}

inline SymbolString unpack(std::span<const Byte> bytes, unsigned k, std::size_t count) {
  check_symbol_width(k);
  if (bytes.size() < packed_size(count, k))
    throw InvalidArgument("unpack: " + std::to_string(bytes.size()) + " bytes cannot hold " +
                          std::to_string(count) + " symbols of " + std::to_string(k) + " bits");
  detail::BitReader r(bytes);
  std::vector<Symbol> out(count);
  for (auto& s : out)
    s = static_cast<Symbol>(r.read(k));
  return SymbolString(k, std::move(out));
}

struct ChunkedFile {
  std::vector<SymbolString> chunks;  // each exactly n_o symbols
  std::uint64_t original_bit_length = 0;
};

// Splits raw bytes into n_o-symbol strings; the last one is zero-padded.
inline ChunkedFile chunk(std::span<const Byte> raw, const Params& params) {
  params.validate();
  ChunkedFile cf;
  cf.original_bit_length = std::uint64_t{raw.size()} * 8;
  const std::uint64_t chunk_bits = params.original_bits();
  const std::uint64_t count = (cf.original_bit_length + chunk_bits - 1) / chunk_bits;
  detail::BitReader r(raw);
  cf.chunks.reserve(count);
  for (std::uint64_t c = 0; c < count; ++c) {
    std::vector<Symbol> syms(params.n_o);
    for (auto& s : syms)
      s = static_cast<Symbol>(r.read(params.k));
    cf.chunks.emplace_back(params.k, std::move(syms));
  }
  return cf;
}

inline Bytes dechunk(const ChunkedFile& cf) {
  std::uint64_t total_bits = 0;
  unsigned k = cf.chunks.empty() ? 8 : cf.chunks.front().k();
  for (const auto& c : cf.chunks) {
    if (c.k() != k)
      throw InvalidArgument("dechunk: chunks disagree on symbol width");
    total_bits += std::uint64_t{c.size()} * k;
  }
  if (cf.original_bit_length > total_bits)
    throw InvalidArgument("dechunk: original_bit_length " +
                          std::to_string(cf.original_bit_length) + " exceeds chunk capacity " +
                          std::to_string(total_bits));
  if (cf.original_bit_length % 8 != 0)
    throw InvalidArgument("dechunk: original_bit_length is not a whole number of bytes");
  detail::BitWriter w;
  for (const auto& c : cf.chunks)
    for (Symbol s : c)
      w.write(s, k);
  Bytes out = w.take();
  out.resize(cf.original_bit_length / 8);
  return out;
}

// Deterministic random stream: std::mt19937_64 (the standard 64-bit Mersenne
// Twister) with bounded draws done here rather than through <random>
// distributions, whose output is implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). Rejection sampling keeps it exactly unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0)
      throw InvalidArgument("Rng::below(0)");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  // Independent child stream, for per-task streams in parallel work.
  Rng fork(std::uint64_t salt) { return Rng(mix_seed(next(), salt)); }

  // splitmix64 finalizer over (seed, salt); used to derive per-task seeds.
  static std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

private:
  std::mt19937_64 engine_;
};

// Sorted random subset of size m from {0, ..., n-1} (Floyd's algorithm).
inline std::vector<std::size_t> random_subset(std::size_t n, std::size_t m, Rng& rng) {
  if (m > n)
    throw InvalidArgument("random_subset: m > n");
  std::vector<std::size_t> picked;
  picked.reserve(m);
  std::vector<bool> taken(n, false);
  for (std::size_t j = n - m; j < n; ++j) {
    std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
    if (taken[t])
      t = j;
    taken[t] = true;
    picked.push_back(t);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

} // namespace ygg
