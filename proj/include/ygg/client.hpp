#pragma once

// Client side of the protocol: privacy deletions before upload, the local
// deviations that undo them, and the persistent client store.

#include <ygg/errors.hpp>
#include <ygg/io.hpp>
#include <ygg/policy.hpp>
#include <ygg/symstring.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <string>
#include <vector>

namespace ygg {

struct Deletion {
  std::uint32_t pos = 0;  // index in the original string
  Symbol value = 0;
  friend bool operator==(const Deletion&, const Deletion&) = default;
};

// Deleted symbols sorted by original position.
struct LocalDeviation {
  std::vector<Deletion> deletions;

  std::size_t size() const { return deletions.size(); }

  // (ceil(log2 n_o) + k) bits per deletion.
  std::uint64_t bits(const Params& p) const {
    return std::uint64_t{deletions.size()} * (p.pos_bits() + p.k);
  }

  friend bool operator==(const LocalDeviation&, const LocalDeviation&) = default;
};

struct Transformed {
  SymbolString base;
  LocalDeviation deviation;
};

// Number of adjacent equal-symbol pairs.
inline std::size_t adjacent_equal_pairs(std::span<const Symbol> s) {
  std::size_t c = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    c += s[i] == s[i - 1];
  return c;
}

namespace detail {

// Shortens the longest runs first (leftmost on ties), one symbol at a time;
// which member of a run goes is random since the base does not depend on
// it. Once no runs remain, deletes symbols whose removal does not create a
// new equal pair, falling back to any symbol.
inline std::vector<std::size_t> run_breaking_positions(const SymbolString& f, std::size_t x,
                                                       Rng& rng) {
  struct Run {
    std::size_t start, len, cut = 0;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < f.size();) {
    std::size_t j = i + 1;
    while (j < f.size() && f[j] == f[i])
      ++j;
    runs.push_back({i, j - i});
    i = j;
  }
  // (current length, -start) max-heap over runs that can still shrink.
  auto cmp = [&](std::size_t l, std::size_t r) {
    const auto ll = runs[l].len - runs[l].cut, rl = runs[r].len - runs[r].cut;
    return ll != rl ? ll < rl : runs[l].start > runs[r].start;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
  for (std::size_t r = 0; r < runs.size(); ++r)
    if (runs[r].len >= 2)
      heap.push(r);
  std::size_t left = x;
  while (left > 0 && !heap.empty()) {
    const auto r = heap.top();
    heap.pop();
    ++runs[r].cut;
    --left;
    if (runs[r].len - runs[r].cut >= 2)
      heap.push(r);
  }

  std::vector<bool> gone(f.size(), false);
  for (const auto& run : runs)
    if (run.cut > 0)
      for (auto off : random_subset(run.len, run.cut, rng))
        gone[run.start + off] = true;

  while (left > 0) {
    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (!gone[i])
        alive.push_back(i);
    std::vector<std::size_t> safe;
    for (std::size_t t = 0; t < alive.size(); ++t)
      if (t == 0 || t + 1 == alive.size() || f[alive[t - 1]] != f[alive[t + 1]])
        safe.push_back(alive[t]);
    const auto& pool = safe.empty() ? alive : safe;
    gone[pool[rng.below(pool.size())]] = true;
    --left;
  }

  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (gone[i])
      out.push_back(i);
  return out;
}

} // namespace detail

// Sorted original positions to delete from f.
inline std::vector<std::size_t> choose_deletions(const SymbolString& f, std::size_t x,
                                                 DeletionStrategy strategy, Rng& rng) {
  if (x > f.size())
    throw InvalidArgument("cannot delete more symbols than the string holds");
  if (strategy == DeletionStrategy::RunBreaking)
    return detail::run_breaking_positions(f, x, rng);
  return random_subset(f.size(), x, rng);
}

inline Transformed apply_deletions(const SymbolString& f, std::span<const std::size_t> positions) {
  Transformed t;
  std::vector<Symbol> base;
  base.reserve(f.size() - positions.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (next < positions.size() && positions[next] == i) {
      t.deviation.deletions.push_back({static_cast<std::uint32_t>(i), f[i]});
      ++next;
    } else {
      base.push_back(f[i]);
    }
  }
  if (next != positions.size())
    throw InvalidArgument("deletion positions must be strictly increasing and in range");
  t.base = SymbolString(f.k(), std::move(base));
  return t;
}

// The client transformation: n_o - n_b 1-deletions chosen by the policy's
// strategy.
inline Transformed transform(const Policy& policy, const SymbolString& f, Rng& rng) {
  if (f.size() != policy.n_o || f.k() != policy.k)
    throw InvalidArgument("upload: string has length " + std::to_string(f.size()) + " and k=" +
                          std::to_string(f.k()) + ", policy expects " +
                          std::to_string(policy.n_o) + " symbols of k=" +
                          std::to_string(policy.k));
  if (policy.n_b > policy.n_o)
    throw InvalidArgument("upload: policy base length exceeds original length");
  const auto positions = choose_deletions(f, policy.n_o - policy.n_b, policy.strategy, rng);
  return apply_deletions(f, positions);
}

// Puts the deleted symbols back at their original positions.
inline SymbolString reconstruct(const SymbolString& base, const LocalDeviation& deviation) {
  const std::size_t n_o = base.size() + deviation.size();
  const auto limit = max_symbol(base.k());
  std::vector<Symbol> out;
  out.reserve(n_o);
  std::size_t from_base = 0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n_o; ++i) {
    if (next < deviation.size() && deviation.deletions[next].pos == i) {
      if (deviation.deletions[next].value > limit)
        throw CorruptionError("corrupted deviation: symbol out of range");
      out.push_back(deviation.deletions[next].value);
      ++next;
    } else {
      out.push_back(base[from_base++]);
    }
  }
  if (next != deviation.size())
    throw CorruptionError("corrupted deviation: positions collide or are out of range");
  return SymbolString(base.k(), std::move(out));
}

struct UploadResult {
  std::uint64_t id = 0;
  SymbolString base;
  LocalDeviation deviation;
};

struct FileEntry {
  std::vector<std::uint64_t> chunk_ids;
  std::uint64_t original_bit_length = 0;
  friend bool operator==(const FileEntry&, const FileEntry&) = default;
};

class ClientStore {
public:
  static constexpr std::string_view kMagic = "YGGC";
  static constexpr std::uint8_t kVersion = 1;

  // Chunk ids are allocated sequentially from `id_base`; distinct clients use
  // distinct bases (e.g. client number << 48).
  explicit ClientStore(Params params, std::uint64_t id_base = 0)
      : params_(params), next_id_(id_base) {
    params_.validate();
  }

  const Params& params() const { return params_; }
  const std::map<std::uint64_t, LocalDeviation>& records() const { return records_; }
  const std::map<std::string, FileEntry>& files() const { return files_; }

  UploadResult upload(const Policy& policy, const SymbolString& f, Rng& rng) {
    if (policy.n_o != params_.n_o || policy.n_b != params_.n_b || policy.k != params_.k)
      throw InvalidArgument("upload: policy does not match the client store parameters");
    auto t = transform(policy, f, rng);
    const auto id = next_id_++;
    records_.emplace(id, t.deviation);
    return {id, std::move(t.base), std::move(t.deviation)};
  }

  void add_file(const std::string& name, FileEntry entry) {
    for (auto id : entry.chunk_ids)
      if (!records_.contains(id))
        throw InvalidArgument("file \"" + name + "\" references unknown chunk id " +
                              std::to_string(id));
    files_[name] = std::move(entry);
  }

  const LocalDeviation& deviation(std::uint64_t id) const {
    auto it = records_.find(id);
    if (it == records_.end())
      throw NotFound("client store has no chunk id " + std::to_string(id));
    return it->second;
  }

  // Rebuilds the original chunk from the cloud's answer.
  SymbolString get(std::uint64_t id, const SymbolString& cloud_response) const {
    const auto& dev = deviation(id);
    if (cloud_response.size() != params_.n_b || cloud_response.k() != params_.k)
      throw InvalidArgument("get: cloud response has the wrong shape");
    return reconstruct(cloud_response, dev);
  }

  // Sum over records of deviation bits plus one file identifier each.
  std::uint64_t storage_bits() const {
    std::uint64_t total = 0;
    for (const auto& [id, dev] : records_)
      total += dev.bits(params_) + params_.s_h;
    return total;
  }

  Bytes save() const {
    io::Writer w;
    w.raw(kMagic);
    w.u8(kVersion);
    io::write_params(w, params_);
    w.u64(records_.size());
    for (const auto& [id, dev] : records_) {
      w.u64(id);
      w.u32(static_cast<std::uint32_t>(dev.size()));
      for (const auto& d : dev.deletions) {
        w.u32(d.pos);
        w.u64(d.value);
      }
    }
    w.u64(files_.size());
    for (const auto& [name, entry] : files_) {
      w.u32(static_cast<std::uint32_t>(name.size()));
      w.raw(name);
      w.u64(entry.chunk_ids.size());
      for (auto id : entry.chunk_ids)
        w.u64(id);
      w.u64(entry.original_bit_length);
    }
    return w.take();
  }

  static ClientStore load(std::span<const Byte> bytes) {
    io::Reader r(bytes);
    r.expect_magic(kMagic, kVersion);
    ClientStore store(io::read_params(r));
    const Params& p = store.params_;
    const auto limit = max_symbol(p.k);
    const auto n_records = r.count(12, "record count");
    std::uint64_t max_id = 0;
    for (std::uint64_t t = 0; t < n_records; ++t) {
      const auto id = r.u64("record id");
      if (t > 0 && id <= max_id)
        throw CorruptionError("record ids not strictly increasing");
      max_id = id;
      const auto n = r.u32("deletion count");
      if (n != p.deletions())
        throw CorruptionError("record " + std::to_string(id) + " has " + std::to_string(n) +
                              " deletions, expected " + std::to_string(p.deletions()));
      LocalDeviation dev;
      dev.deletions.reserve(n);
      for (std::uint32_t d = 0; d < n; ++d) {
        const auto pos = r.u32("deletion position");
        const auto value = r.u64("deletion value");
        if (pos >= p.n_o || (!dev.deletions.empty() && pos <= dev.deletions.back().pos))
          throw CorruptionError("record " + std::to_string(id) + " has invalid positions");
        if (value > limit)
          throw CorruptionError("record " + std::to_string(id) + " has an out-of-range symbol");
        dev.deletions.push_back({pos, static_cast<Symbol>(value)});
      }
      store.records_.emplace(id, std::move(dev));
    }
    store.next_id_ = n_records == 0 ? 0 : max_id + 1;

    const auto n_files = r.count(20, "file count");
    std::string prev;
    for (std::uint64_t t = 0; t < n_files; ++t) {
      const auto len = r.u32("file name length");
      auto raw = r.raw(len, "file name");
      std::string name(raw.begin(), raw.end());
      if (t > 0 && name <= prev)
        throw CorruptionError("file table not sorted");
      FileEntry entry;
      const auto n_ids = r.count(8, "chunk id count");
      entry.chunk_ids.reserve(n_ids);
      for (std::uint64_t c = 0; c < n_ids; ++c) {
        const auto id = r.u64("chunk id");
        if (!store.records_.contains(id))
          throw CorruptionError("file \"" + name + "\" references unknown chunk id");
        entry.chunk_ids.push_back(id);
      }
      entry.original_bit_length = r.u64("original bit length");
      if (entry.original_bit_length > n_ids * p.original_bits())
        throw CorruptionError("file \"" + name + "\" is longer than its chunks");
      store.files_.emplace(name, std::move(entry));
      prev = std::move(name);
    }
    r.expect_end();
    return store;
  }

  // Continue allocating ids at or above `id_base` (ids already used stay used).
  void reserve_ids_from(std::uint64_t id_base) { next_id_ = std::max(next_id_, id_base); }

private:
  Params params_;
  std::map<std::uint64_t, LocalDeviation> records_;
  std::map<std::string, FileEntry> files_;
  std::uint64_t next_id_ = 0;
};

inline std::uint64_t client_storage_bits(const ClientStore& store) { return store.storage_bits(); }

} // namespace ygg
