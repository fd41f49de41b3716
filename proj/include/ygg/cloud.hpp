#pragma once

// Cloud side of the protocol: the deduplicated base set, generalized
// deduplication of uploaded bases under an op threshold, and the persistent
// cloud store.

#include <ygg/errors.hpp>
#include <ygg/io.hpp>
#include <ygg/metrics.hpp>
#include <ygg/policy.hpp>
#include <ygg/symstring.hpp>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ygg {

struct BaseEntry {
  SymbolString base;
  std::uint64_t refcount = 0;
};

// Bases keyed by auto-incremented id (== position in the vector), with an
// exact-match index over their contents.
class BaseSet {
public:
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const BaseEntry& at(std::uint64_t id) const { return entries_.at(id); }
  const std::vector<BaseEntry>& entries() const { return entries_; }

  std::optional<std::uint64_t> find(const SymbolString& s) const {
    auto it = index_.find(key(s));
    if (it == index_.end())
      return std::nullopt;
    return it->second;
  }

  // Appends a base. Identical contents are rejected.
  std::uint64_t insert(SymbolString s, std::uint64_t refcount = 0) {
    auto [it, fresh] = index_.emplace(key(s), entries_.size());
    if (!fresh)
      throw InvalidArgument("base already present with id " + std::to_string(it->second));
    entries_.push_back({std::move(s), refcount});
    return entries_.size() - 1;
  }

  void add_ref(std::uint64_t id) { ++entries_.at(id).refcount; }

private:
  // The hash map fingerprints the raw symbol bytes; equal fingerprints are
  // settled by full key comparison.
  friend class CloudStore;
  static std::string key(const SymbolString& s) {
    std::string k(s.size() * sizeof(Symbol) + 1, '\0');
    k[0] = static_cast<char>(s.k());
    std::memcpy(k.data() + 1, s.symbols().data(), s.size() * sizeof(Symbol));
    return k;
  }

  std::vector<BaseEntry> entries_;
  std::unordered_map<std::string, std::uint64_t> index_;
};

// Chunk id -> base pointer plus the script that turns the uploaded base into
// the stored one.
struct DedupRecord {
  std::uint64_t id = 0;
  std::uint64_t base_id = 0;
  EditScript deviation;
  friend bool operator==(const DedupRecord&, const DedupRecord&) = default;
};

class CloudStore {
public:
  static constexpr std::string_view kMagic = "YGGS";
  static constexpr std::uint8_t kVersion = 1;

  explicit CloudStore(Params params) : params_(params) { params_.validate(); }

  // Builds a store from existing state and checks every invariant: uniform
  // base length, refcounts matching records, and every record decoding.
  static CloudStore from_parts(Params params, BaseSet bases,
                               std::map<std::uint64_t, DedupRecord> records) {
    CloudStore store(params);
    if (!bases.empty()) {
      const auto len = bases.at(0).base.size();
      for (const auto& e : bases.entries())
        if (e.base.size() != len || e.base.k() != params.k)
          throw CorruptionError("base set mixes string shapes");
      store.params_.n_b = len;
      store.params_.validate();
    }
    store.bases_ = std::move(bases);
    store.records_ = std::move(records);
    store.check_consistency();
    return store;
  }

  const Params& params() const { return params_; }
  const BaseSet& bases() const { return bases_; }
  const std::map<std::uint64_t, DedupRecord>& records() const { return records_; }
  CostModel cost() const { return CostModel::for_params(params_); }

  void set_tau(std::size_t tau) {
    params_.tau = tau;
    near_memo_.clear();
  }
  void set_strategy_hint(DeletionStrategy s) { hint_ = s; }

  // Publishes the shape clients must upload.
  Policy setup() const {
    std::size_t n_b = params_.n_b;
    if (!bases_.empty()) {
      n_b = bases_.at(0).base.size();
      for (const auto& e : bases_.entries())
        if (e.base.size() != n_b)
          throw CorruptionError("base set mixes string lengths");
    }
    return {params_.k, params_.n_o, n_b, hint_};
  }

  // Seeds the initial base set.
  std::uint64_t add_base(SymbolString base) {
    check_shape(base);
    if (bases_.find(base))
      throw InvalidArgument("add_base: base already present");
    return bases_.insert(std::move(base));
  }

  // Generalized deduplication of one uploaded base:
  //   1. exact match -> empty deviation;
  //   2. nearest base with 0 < swap distance <= tau (lowest id on ties) ->
  //      the swap script onto it;
  //   3. otherwise the upload becomes a new base.
  const DedupRecord& compress(std::uint64_t id, const SymbolString& f_prime) {
    if (records_.contains(id))
      throw InvalidArgument("compress: duplicate chunk id " + std::to_string(id));
    check_shape(f_prime);

    DedupRecord rec;
    rec.id = id;
    if (auto hit = bases_.find(f_prime)) {
      rec.base_id = *hit;
    } else if (auto near = nearest_base(f_prime)) {
      rec.base_id = *near;
      rec.deviation = swap_script(f_prime, bases_.at(*near).base, cost());
    } else {
      rec.base_id = bases_.insert(f_prime);
    }
    bases_.add_ref(rec.base_id);
    return records_.emplace(id, std::move(rec)).first->second;
  }

  // The uploaded base for `id`, or nullopt when the id is unknown (the query
  // is ignored).
  std::optional<SymbolString> decompress(std::uint64_t id) const {
    auto it = records_.find(id);
    if (it == records_.end())
      return std::nullopt;
    return apply_script(bases_.at(it->second.base_id).base, invert_script(it->second.deviation));
  }

  // Bits a base pointer costs: ceil(log2 N_b), at least one bit.
  unsigned pointer_bits() const { return ceil_log2(std::max<std::uint64_t>(2, bases_.size())); }

  // Stored bases plus, per record, identifier + base pointer + deviation.
  std::uint64_t storage_bits() const {
    std::uint64_t total = std::uint64_t{bases_.size()} * params_.k * setup_length();
    const auto c = cost();
    const auto per_record = params_.s_h + pointer_bits();
    for (const auto& [id, rec] : records_)
      total += per_record + rec.deviation.bits(c);
    return total;
  }

  // Upper bound on storage_bits(): every deduplicated record pays for at
  // most tau ops of the dearer kind.
  std::uint64_t storage_bound_bits() const {
    const std::uint64_t n_f = records_.size(), n_b = bases_.size();
    return n_b * params_.k * setup_length() + n_f * params_.s_h +
           (n_f > n_b ? n_f - n_b : 0) * params_.tau * cost().max_op_bits() +
           n_f * pointer_bits();
  }

  // Median greedy swap distance over `sample` random base pairs (every pair
  // when there are fewer).
  std::size_t tau_heuristic(std::size_t sample, Rng& rng) const {
    const std::uint64_t n = bases_.size();
    if (n < 2)
      throw InvalidArgument("tau_heuristic needs at least two bases");
    std::vector<std::size_t> dists;
    const auto c = cost();
    const auto& e = bases_.entries();
    const std::uint64_t all_pairs = n * (n - 1) / 2;
    if (all_pairs <= sample) {
      for (std::uint64_t i = 0; i < n; ++i)
        for (std::uint64_t j = i + 1; j < n; ++j)
          dists.push_back(swap_distance(e[i].base, e[j].base, c));
    } else {
      dists.reserve(sample);
      for (std::size_t s = 0; s < sample; ++s) {
        const auto i = rng.below(n);
        auto j = rng.below(n - 1);
        if (j >= i)
          ++j;
        dists.push_back(swap_distance(e[i].base, e[j].base, c));
      }
    }
    auto mid = dists.begin() + static_cast<std::ptrdiff_t>((dists.size() - 1) / 2);
    std::nth_element(dists.begin(), mid, dists.end());
    return *mid;
  }

  Bytes save() const {
    io::Writer w;
    w.raw(kMagic);
    w.u8(kVersion);
    io::write_params(w, params_);
    w.u64(bases_.size());
    for (std::uint64_t id = 0; id < bases_.size(); ++id) {
      w.u64(id);
      w.u64(bases_.at(id).refcount);
      w.raw(pack(bases_.at(id).base));
    }
    w.u64(records_.size());
    for (const auto& [id, rec] : records_) {
      w.u64(id);
      w.u64(rec.base_id);
      w.u32(static_cast<std::uint32_t>(rec.deviation.size()));
      for (const auto& op : rec.deviation.ops) {
        if (const auto* sw = std::get_if<Swap>(&op)) {
          w.u8(0);
          w.u32(sw->i);
          w.u32(sw->j);
        } else {
          const auto& cv = std::get<ChangeValue>(op);
          w.u8(1);
          w.u32(cv.pos);
          w.u64(cv.old_value);
          w.u64(cv.new_value);
        }
      }
    }
    return w.take();
  }

  static CloudStore load(std::span<const Byte> bytes) {
    io::Reader r(bytes);
    r.expect_magic(kMagic, kVersion);
    const Params params = io::read_params(r);
    const std::size_t packed = packed_size(params.n_b, params.k);
    const auto n_bases = r.count(16 + packed, "base count");
    BaseSet bases;
    std::vector<std::uint64_t> stored_refs;
    for (std::uint64_t t = 0; t < n_bases; ++t) {
      if (r.u64("base id") != t)
        throw CorruptionError("base ids are not sequential");
      stored_refs.push_back(r.u64("refcount"));
      auto base = unpack(r.raw(packed, "base symbols"), params.k, params.n_b);
      if (bases.find(base))
        throw CorruptionError("duplicate base contents");
      bases.insert(std::move(base));
    }
    const auto n_records = r.count(20, "record count");
    std::map<std::uint64_t, DedupRecord> records;
    std::uint64_t prev = 0;
    for (std::uint64_t t = 0; t < n_records; ++t) {
      DedupRecord rec;
      rec.id = r.u64("record id");
      if (t > 0 && rec.id <= prev)
        throw CorruptionError("record ids not strictly increasing");
      prev = rec.id;
      rec.base_id = r.u64("record base id");
      if (rec.base_id >= n_bases)
        throw CorruptionError("record points at a missing base");
      const auto n_ops = r.u32("op count");
      if (n_ops > r.remaining() / 9)
        throw CorruptionError("truncated op list");
      for (std::uint32_t o = 0; o < n_ops; ++o) {
        const auto tag = r.u8("op tag");
        if (tag == 0) {
          const auto i = r.u32("swap i");
          const auto j = r.u32("swap j");
          rec.deviation.ops.emplace_back(Swap{i, j});
        } else if (tag == 1) {
          ChangeValue cv;
          cv.pos = r.u32("change position");
          cv.old_value = r.u64("change old");
          cv.new_value = r.u64("change new");
          rec.deviation.ops.emplace_back(cv);
        } else {
          throw CorruptionError("unknown op tag " + std::to_string(tag));
        }
      }
      records.emplace(rec.id, std::move(rec));
    }
    r.expect_end();

    for (std::uint64_t id = 0; id < n_bases; ++id)
      for (std::uint64_t c = 0; c < stored_refs[id]; ++c)
        bases.add_ref(id);
    return from_parts(params, std::move(bases), std::move(records));
  }

private:
  std::size_t setup_length() const { return bases_.empty() ? params_.n_b : bases_.at(0).base.size(); }

  void check_shape(const SymbolString& s) const {
    if (s.k() != params_.k || s.size() != setup_length())
      throw InvalidArgument("compress: expected " + std::to_string(setup_length()) +
                            " symbols of k=" + std::to_string(params_.k) + ", got " +
                            std::to_string(s.size()) + " of k=" + std::to_string(s.k()));
  }

  // Nearest base strictly within tau, lowest id on ties. A repeated upload
  // only needs to look at bases added since it was last scanned: earlier
  // ones were already beaten or tied by the remembered winner.
  std::optional<std::uint64_t> nearest_base(const SymbolString& f_prime) {
    if (params_.tau == 0)
      return std::nullopt;
    const auto c = cost();
    const auto& entries = bases_.entries();
    auto key = BaseSet::key(f_prime);
    auto memo = near_memo_.find(key);
    std::optional<std::uint64_t> best;
    std::size_t best_d = params_.tau + 1;
    std::uint64_t from = 0;
    if (memo != near_memo_.end()) {
      best = memo->second.base_id;
      best_d = memo->second.distance;
      from = memo->second.scanned;
    }
    auto consider = [&](std::uint64_t id, std::optional<std::size_t> d) {
      if (d) {
        best = id;
        best_d = *d;
      }
    };
    if (params_.k <= 8) {
      while (lanes_.size() < entries.size())
        lanes_.push_back(byte_lanes(entries[lanes_.size()].base.view()));
      const auto mine = byte_lanes(f_prime.view());
      for (std::uint64_t id = from; id < entries.size() && best_d > 1; ++id) {
        const auto bound = best_d - 1;
        if (auto h = hamming_within_lanes(mine, lanes_[id], 2 * bound))
          consider(id, detail::swap_distance_given_hamming(f_prime.view(), entries[id].base.view(),
                                                           *h, bound, c));
      }
    } else {
      for (std::uint64_t id = from; id < entries.size() && best_d > 1; ++id)
        consider(id, swap_distance_within(f_prime.view(), entries[id].base.view(), best_d - 1, c));
    }
    if (best)
      near_memo_[std::move(key)] = {*best, best_d, entries.size()};
    return best;
  }

  void check_consistency() const {
    std::vector<std::uint64_t> refs(bases_.size(), 0);
    for (const auto& [id, rec] : records_) {
      if (rec.id != id)
        throw CorruptionError("record key and id disagree");
      if (rec.base_id >= bases_.size())
        throw CorruptionError("record " + std::to_string(id) + " points at a missing base");
      ++refs[rec.base_id];
      try {
        (void)apply_script(bases_.at(rec.base_id).base, invert_script(rec.deviation));
      } catch (const CorruptionError& e) {
        throw CorruptionError("record " + std::to_string(id) + ": " + e.what());
      }
    }
    for (std::uint64_t id = 0; id < bases_.size(); ++id)
      if (refs[id] != bases_.at(id).refcount)
        throw CorruptionError("refcount of base " + std::to_string(id) + " is " +
                              std::to_string(bases_.at(id).refcount) + " but " +
                              std::to_string(refs[id]) + " records point at it");
  }

  Params params_;
  BaseSet bases_;
  std::map<std::uint64_t, DedupRecord> records_;
  DeletionStrategy hint_ = DeletionStrategy::UniformRandom;

  struct NearMemo {
    std::uint64_t base_id;
    std::size_t distance;
    std::uint64_t scanned;
  };
  std::unordered_map<std::string, NearMemo> near_memo_;
  std::vector<std::vector<std::uint64_t>> lanes_;  // byte-lane copies of the bases, k <= 8
};

inline std::uint64_t cloud_storage_bits(const CloudStore& store) { return store.storage_bits(); }

} // namespace ygg
