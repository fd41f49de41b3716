#pragma once

// Distances between symbol strings and the swap / change-value edit scripts
// the cloud stores as deviations.

#include <ygg/errors.hpp>
#include <ygg/symstring.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace ygg {

// Transposition of two arbitrary positions.
struct Swap {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  friend bool operator==(const Swap&, const Swap&) = default;
};

// Overwrite position `pos`; `old_value` is what the position held before, so
// the op can be inverted and checked.
struct ChangeValue {
  std::uint32_t pos = 0;
  std::uint64_t old_value = 0;
  std::uint64_t new_value = 0;
  friend bool operator==(const ChangeValue&, const ChangeValue&) = default;
};

using EditOp = std::variant<Swap, ChangeValue>;

// Per-op storage cost: a swap stores two positions, a change-value stores a
// position and a symbol.
struct CostModel {
  unsigned k = 8;
  unsigned pos_bits = 7;

  std::uint64_t swap_bits() const { return 2ull * pos_bits; }
  std::uint64_t change_bits() const { return std::uint64_t{k} + pos_bits; }
  std::uint64_t max_op_bits() const { return std::max(swap_bits(), change_bits()); }

  static CostModel for_params(const Params& p) { return {p.k, p.pos_bits()}; }
  static CostModel for_length(unsigned k, std::size_t n) { return {k, ceil_log2(n)}; }
};

struct EditScript {
  std::vector<EditOp> ops;

  std::size_t size() const { return ops.size(); }
  bool empty() const { return ops.empty(); }

  std::uint64_t bits(const CostModel& cost) const {
    std::uint64_t total = 0;
    for (const auto& op : ops)
      total += std::holds_alternative<Swap>(op) ? cost.swap_bits() : cost.change_bits();
    return total;
  }

  friend bool operator==(const EditScript&, const EditScript&) = default;
};

namespace detail {

inline void require_same_shape(const SymbolString& a, const SymbolString& b, const char* what) {
  if (a.k() != b.k())
    throw InvalidArgument(std::string(what) + ": symbol widths differ");
  if (a.size() != b.size())
    throw InvalidArgument(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
}

// Dense renumbering of the symbol values that occur in a mismatch set, so the
// per-value tables below stay O(m) whatever k is.
class ValueIndex {
public:
  void build(std::vector<Symbol>& scratch) {
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    values_.swap(scratch);
  }
  std::uint32_t operator()(Symbol v) const {
    return static_cast<std::uint32_t>(std::lower_bound(values_.begin(), values_.end(), v) -
                                      values_.begin());
  }
  std::size_t size() const { return values_.size(); }

private:
  std::vector<Symbol> values_;
};

// Greedy swap / change-value decomposition of the mismatches between a and b.
//   1. 2-cycles (a[i]==b[j] && a[j]==b[i]) become one Swap each.
//   2. Longer value cycles become c-1 Swaps, or c ChangeValues when those
//      are cheaper in stored bits.
//   3. Whatever is left gets one ChangeValue.
// When `out` is null only the op count is produced.
inline std::size_t greedy_swap_decompose(std::span<const Symbol> a, std::span<const Symbol> b,
                                         const CostModel& cost, EditScript* out) {
  const std::size_t n = a.size();
  std::vector<std::uint32_t> mis;
  for (std::size_t i = 0; i < n; ++i)
    if (a[i] != b[i])
      mis.push_back(static_cast<std::uint32_t>(i));
  if (mis.empty())
    return 0;

  std::size_t ops = 0;
  auto emit_swap = [&](std::uint32_t i, std::uint32_t j) {
    ++ops;
    if (out)
      out->ops.emplace_back(Swap{i, j});
  };
  auto emit_change = [&](std::uint32_t i) {
    ++ops;
    if (out)
      out->ops.emplace_back(ChangeValue{i, a[i], b[i]});
  };

  // Step 1: group mismatches by (a, b) and pair each group with its mirror.
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed;
  keyed.reserve(mis.size());
  for (auto i : mis)
    keyed.emplace_back((std::uint64_t{a[i]} << 32) | b[i], i);
  std::sort(keyed.begin(), keyed.end());
  std::vector<bool> used(n, false);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::size_t g = 0; g < keyed.size();) {
    std::size_t g_end = g;
    while (g_end < keyed.size() && keyed[g_end].first == keyed[g].first)
      ++g_end;
    const std::uint64_t key = keyed[g].first;
    const std::uint64_t mirror = (key << 32) | (key >> 32);
    if ((key >> 32) < (key & 0xFFFFFFFFu)) {
      auto lo = std::lower_bound(keyed.begin(), keyed.end(),
                                 std::pair<std::uint64_t, std::uint32_t>{mirror, 0});
      for (std::size_t t = g; t < g_end && lo != keyed.end() && lo->first == mirror; ++t, ++lo) {
        const auto i = keyed[t].second, j = lo->second;
        used[i] = used[j] = true;
        pairs.emplace_back(std::min(i, j), std::max(i, j));
      }
    }
    g = g_end;
  }
  std::sort(pairs.begin(), pairs.end());
  for (auto [i, j] : pairs)
    emit_swap(i, j);

  // Step 2: walk the remaining mismatches as a value graph. Position p
  // supplies a[p] and needs b[p]; a closed walk is a cycle.
  std::vector<std::uint32_t> rest;
  rest.reserve(mis.size());
  for (auto i : mis)
    if (!used[i])
      rest.push_back(i);
  if (rest.empty())
    return ops;

  std::vector<Symbol> vals;
  vals.reserve(2 * rest.size());
  for (auto p : rest) {
    vals.push_back(a[p]);
    vals.push_back(b[p]);
  }
  ValueIndex vid;
  vid.build(vals);
  const std::size_t V = vid.size();

  // Per-value queues of positions supplying that value, ascending.
  std::vector<std::uint32_t> head(V + 1, 0);
  for (auto p : rest)
    ++head[vid(a[p]) + 1];
  for (std::size_t v = 0; v < V; ++v)
    head[v + 1] += head[v];
  std::vector<std::uint32_t> bucket(rest.size());
  {
    std::vector<std::uint32_t> fill(head.begin(), head.end() - 1);
    for (auto p : rest)
      bucket[fill[vid(a[p])]++] = p;
  }
  std::vector<std::uint32_t> cursor(head.begin(), head.end() - 1);

  constexpr std::uint32_t kNone = 0xFFFFFFFFu;
  std::vector<std::uint32_t> in_path(V, kNone);  // value -> index in path
  std::vector<bool> done(n, false);
  std::vector<std::uint32_t> path;
  std::vector<std::uint32_t> leftover;

  auto take = [&](std::uint32_t v) -> std::uint32_t {
    while (cursor[v] < head[v + 1]) {
      const auto p = bucket[cursor[v]++];
      if (!done[p])
        return p;
    }
    return kNone;
  };

  for (auto start : rest) {
    if (done[start])
      continue;
    const auto sv = vid(a[start]);
    // `start` is the front of its queue; consume it.
    (void)take(sv);
    done[start] = true;
    path.assign(1, start);
    in_path[sv] = 0;
    while (!path.empty()) {
      const auto need = vid(b[path.back()]);
      if (in_path[need] != kNone) {
        const std::size_t s = in_path[need];
        const std::size_t c = path.size() - s;
        if ((c - 1) * cost.swap_bits() <= c * cost.change_bits()) {
          for (std::size_t t = s; t + 1 < path.size(); ++t)
            emit_swap(path[t], path[t + 1]);
        } else {
          for (std::size_t t = s; t < path.size(); ++t)
            emit_change(path[t]);
        }
        for (std::size_t t = s; t < path.size(); ++t)
          in_path[vid(a[path[t]])] = kNone;
        path.resize(s);
        continue;
      }
      const auto q = take(need);
      if (q != kNone) {
        done[q] = true;
        in_path[need] = static_cast<std::uint32_t>(path.size());
        path.push_back(q);
        continue;
      }
      // Nobody left supplies what the tail needs: it can never close a cycle.
      const auto tail = path.back();
      in_path[vid(a[tail])] = kNone;
      path.pop_back();
      leftover.push_back(tail);
    }
  }

  // Step 3.
  std::sort(leftover.begin(), leftover.end());
  for (auto p : leftover)
    emit_change(p);
  return ops;
}

} // namespace detail

inline std::size_t hamming(const SymbolString& a, const SymbolString& b) {
  detail::require_same_shape(a, b, "hamming");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d += a[i] != b[i];
  return d;
}

// Hamming distance, or nullopt as soon as it provably exceeds `bound`.
inline std::optional<std::size_t> hamming_within(std::span<const Symbol> a,
                                                 std::span<const Symbol> b, std::size_t bound) {
  constexpr std::size_t kBlock = 16;
  const std::size_t n = a.size();
  std::size_t d = 0, i = 0;
  for (; i + kBlock <= n; i += kBlock) {
    unsigned block = 0;
    for (std::size_t t = 0; t < kBlock; ++t)
      block += a[i + t] != b[i + t];
    d += block;
    if (d > bound)
      return std::nullopt;
  }
  for (; i < n; ++i)
    d += a[i] != b[i];
  if (d > bound)
    return std::nullopt;
  return d;
}

// Deterministic greedy script turning `a` into `b` with Swap and ChangeValue
// only. Its length is an upper bound on the exact swap distance.
inline EditScript swap_script(const SymbolString& a, const SymbolString& b,
                              const CostModel& cost) {
  detail::require_same_shape(a, b, "swap_script");
  EditScript s;
  detail::greedy_swap_decompose(a.view(), b.view(), cost, &s);
  return s;
}

inline EditScript swap_script(const SymbolString& a, const SymbolString& b) {
  return swap_script(a, b, CostModel::for_length(a.k(), a.size()));
}

inline std::size_t swap_distance(const SymbolString& a, const SymbolString& b,
                                 const CostModel& cost) {
  detail::require_same_shape(a, b, "swap_distance");
  return detail::greedy_swap_decompose(a.view(), b.view(), cost, nullptr);
}

inline std::size_t swap_distance(const SymbolString& a, const SymbolString& b) {
  return swap_distance(a, b, CostModel::for_length(a.k(), a.size()));
}

// Lower bound on any swap / change-value distance: every op repairs at most
// two mismatches, and only change-values repair histogram imbalance, so
// ops >= (H + D) / 2 with D the histogram excess.
inline std::size_t swap_lower_bound(std::span<const Symbol> a, std::span<const Symbol> b,
                                    std::size_t hamming_distance) {
  std::size_t excess = 0;
  if (std::ranges::all_of(a, [](Symbol v) { return v < 256; }) &&
      std::ranges::all_of(b, [](Symbol v) { return v < 256; })) {
    std::int32_t balance[256] = {};
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) {
        ++balance[a[i]];
        --balance[b[i]];
      }
    for (auto v : balance)
      excess += v > 0 ? static_cast<std::size_t>(v) : 0;
  } else {
    std::vector<Symbol> from, to;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) {
        from.push_back(a[i]);
        to.push_back(b[i]);
      }
    std::sort(from.begin(), from.end());
    std::sort(to.begin(), to.end());
    // D = mismatches whose value has no partner in the other multiset.
    std::size_t common = 0;
    for (std::size_t x = 0, y = 0; x < from.size() && y < to.size();) {
      if (from[x] == to[y]) {
        ++common, ++x, ++y;
      } else if (from[x] < to[y]) {
        ++x;
      } else {
        ++y;
      }
    }
    excess = from.size() - common;
  }
  return (hamming_distance + excess + 1) / 2;
}

namespace detail {

// Rest of swap_distance_within once the Hamming distance is known.
inline std::optional<std::size_t> swap_distance_given_hamming(std::span<const Symbol> a,
                                                              std::span<const Symbol> b,
                                                              std::size_t h, std::size_t bound,
                                                              const CostModel& cost) {
  if (h == 0)
    return 0;
  if (swap_lower_bound(a, b, h) > bound)
    return std::nullopt;
  const std::size_t d = greedy_swap_decompose(a, b, cost, nullptr);
  if (d > bound)
    return std::nullopt;
  return d;
}

// Number of nonzero bytes in x.
inline unsigned nonzero_bytes(std::uint64_t x) {
  constexpr std::uint64_t low7 = 0x7F7F7F7F7F7F7F7Full;
  const std::uint64_t t = (((x & low7) + low7) | x) & ~low7;
  return static_cast<unsigned>(std::popcount(t));
}

} // namespace detail

// Symbols of width <= 8 laid out one per byte, eight per word, zero padded:
// a compact form for fast Hamming scans.
inline std::vector<std::uint64_t> byte_lanes(std::span<const Symbol> s) {
  std::vector<std::uint64_t> w((s.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] > 0xFF)
      throw InvalidArgument("byte_lanes: symbol wider than a byte");
    w[i / 8] |= std::uint64_t{s[i]} << (8 * (i % 8));
  }
  return w;
}

inline std::optional<std::size_t> hamming_within_lanes(std::span<const std::uint64_t> a,
                                                       std::span<const std::uint64_t> b,
                                                       std::size_t bound) {
  std::size_t d = 0, i = 0;
  for (; i + 2 <= a.size(); i += 2) {
    d += detail::nonzero_bytes(a[i] ^ b[i]) + detail::nonzero_bytes(a[i + 1] ^ b[i + 1]);
    if (d > bound)
      return std::nullopt;
  }
  if (i < a.size())
    d += detail::nonzero_bytes(a[i] ^ b[i]);
  if (d > bound)
    return std::nullopt;
  return d;
}

// Greedy swap distance if it is <= bound, else nullopt. Cheap rejections run
// first: Hamming (each op repairs at most two mismatches), then the
// histogram lower bound.
inline std::optional<std::size_t> swap_distance_within(std::span<const Symbol> a,
                                                       std::span<const Symbol> b,
                                                       std::size_t bound,
                                                       const CostModel& cost) {
  const auto h = hamming_within(a, b, 2 * bound);
  if (!h)
    return std::nullopt;
  return detail::swap_distance_given_hamming(a, b, *h, bound, cost);
}

namespace detail {

inline std::uint64_t encode_small(std::span<const Symbol> s, unsigned k) {
  std::uint64_t code = 0;
  for (Symbol v : s)
    code = (code << k) | v;
  return code;
}

inline void check_oracle_instance(const SymbolString& a, const SymbolString& b) {
  require_same_shape(a, b, "swap_distance_exact");
  if (a.size() > 8 || a.k() > 4)
    throw InstanceTooLarge("swap_distance_exact: needs length <= 8 and k <= 4 (got length " +
                           std::to_string(a.size()) + ", k=" + std::to_string(a.k()) + ")");
}

template <typename Visit>
void for_each_neighbour(std::uint64_t code, std::size_t n, unsigned k, Visit&& visit) {
  const std::uint64_t mask = max_symbol(k);
  auto sym = [&](std::size_t i) { return (code >> (k * (n - 1 - i))) & mask; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto si = sym(i), sj = sym(j);
      if (si == sj)
        continue;
      const unsigned shi = static_cast<unsigned>(k * (n - 1 - i));
      const unsigned shj = static_cast<unsigned>(k * (n - 1 - j));
      std::uint64_t c = code & ~(mask << shi) & ~(mask << shj);
      c |= (sj << shi) | (si << shj);
      visit(c);
    }
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned sh = static_cast<unsigned>(k * (n - 1 - i));
    const auto cur = sym(i);
    for (std::uint64_t v = 0; v <= mask; ++v)
      if (v != cur)
        visit((code & ~(mask << sh)) | (v << sh));
  }
}

} // namespace detail

// Exact minimum number of Swap / ChangeValue ops by breadth-first search over
// strings. nullopt when the minimum exceeds `limit`. Test oracle only.
inline std::optional<std::size_t> swap_distance_exact(const SymbolString& a,
                                                      const SymbolString& b,
                                                      std::size_t limit) {
  detail::check_oracle_instance(a, b);
  const std::size_t n = a.size();
  const unsigned k = a.k();
  const auto src = detail::encode_small(a.view(), k);
  const auto dst = detail::encode_small(b.view(), k);
  if (src == dst)
    return 0;
  const std::uint64_t mask = max_symbol(k);
  auto ham_to_dst = [&](std::uint64_t c) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < n; ++i)
      d += ((c ^ dst) >> (k * i) & mask) != 0;
    return d;
  };
  std::unordered_set<std::uint64_t> seen{src};
  std::vector<std::uint64_t> frontier{src}, next;
  for (std::size_t depth = 1; depth <= limit; ++depth) {
    next.clear();
    for (auto c : frontier) {
      bool found = false;
      detail::for_each_neighbour(c, n, k, [&](std::uint64_t nb) {
        if (found)
          return;
        if (nb == dst) {
          found = true;
          return;
        }
        // Each op fixes at most two positions.
        if ((ham_to_dst(nb) + 1) / 2 > limit - depth)
          return;
        if (seen.insert(nb).second)
          next.push_back(nb);
      });
      if (found)
        return depth;
    }
    if (next.empty())
      break;
    frontier.swap(next);
  }
  return std::nullopt;
}

// Exact distances from `a` to every string of its length and width, indexed
// by the big-endian k-bit encoding. Requires (2^k)^n <= 2^20.
inline std::vector<std::uint8_t> swap_distances_from(const SymbolString& a) {
  const std::size_t n = a.size();
  const unsigned k = a.k();
  if (n * k > 20 || k > 4)
    throw InstanceTooLarge("swap_distances_from: state space exceeds 2^20");
  const std::size_t states = std::size_t{1} << (n * k);
  constexpr std::uint8_t kUnseen = 0xFF;
  std::vector<std::uint8_t> dist(states, kUnseen);
  std::deque<std::uint64_t> queue;
  const auto src = detail::encode_small(a.view(), k);
  dist[src] = 0;
  queue.push_back(src);
  while (!queue.empty()) {
    const auto c = queue.front();
    queue.pop_front();
    detail::for_each_neighbour(c, n, k, [&](std::uint64_t nb) {
      if (dist[nb] == kUnseen) {
        dist[nb] = static_cast<std::uint8_t>(dist[c] + 1);
        queue.push_back(nb);
      }
    });
  }
  return dist;
}

// Damerau-Levenshtein distance (Lowrance-Wagner, unit costs): insert, delete,
// substitute and transposition of adjacent symbols, where edits between the
// transposed symbols are allowed.
inline std::size_t damerau_levenshtein(const SymbolString& a, const SymbolString& b) {
  if (a.k() != b.k())
    throw InvalidArgument("damerau_levenshtein: symbol widths differ");
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0)
    return n + m;
  std::vector<Symbol> vals(a.begin(), a.end());
  vals.insert(vals.end(), b.begin(), b.end());
  detail::ValueIndex vid;
  vid.build(vals);
  std::vector<std::size_t> last_row(vid.size(), 0);  // last row in a holding the value

  const std::size_t inf = n + m;
  const std::size_t w = m + 2;
  std::vector<std::size_t> d((n + 2) * w);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * w + j]; };
  at(0, 0) = inf;
  for (std::size_t i = 0; i <= n; ++i) {
    at(i + 1, 0) = inf;
    at(i + 1, 1) = i;
  }
  for (std::size_t j = 0; j <= m; ++j) {
    at(0, j + 1) = inf;
    at(1, j + 1) = j;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t last_match_col = 0;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t i1 = last_row[vid(b[j - 1])];
      const std::size_t j1 = last_match_col;
      const std::size_t sub = a[i - 1] == b[j - 1] ? 0 : 1;
      if (sub == 0)
        last_match_col = j;
      at(i + 1, j + 1) = std::min({at(i, j) + sub, at(i + 1, j) + 1, at(i, j + 1) + 1,
                                   at(i1, j1) + (i - i1 - 1) + 1 + (j - j1 - 1)});
    }
    last_row[vid(a[i - 1])] = i;
  }
  return at(n + 1, m + 1);
}

inline SymbolString apply_script(const SymbolString& a, const EditScript& s) {
  std::vector<Symbol> cur(a.begin(), a.end());
  const auto limit = max_symbol(a.k());
  for (std::size_t t = 0; t < s.ops.size(); ++t) {
    const auto where = " (op " + std::to_string(t) + ")";
    if (const auto* sw = std::get_if<Swap>(&s.ops[t])) {
      if (sw->i >= cur.size() || sw->j >= cur.size() || sw->i == sw->j)
        throw CorruptionError("swap positions invalid" + where);
      std::swap(cur[sw->i], cur[sw->j]);
    } else {
      const auto& cv = std::get<ChangeValue>(s.ops[t]);
      if (cv.pos >= cur.size())
        throw CorruptionError("change-value position out of range" + where);
      if (cur[cv.pos] != cv.old_value)
        throw CorruptionError("change-value old symbol does not match" + where);
      if (cv.new_value > limit || cv.new_value == cv.old_value)
        throw CorruptionError("change-value new symbol invalid" + where);
      cur[cv.pos] = static_cast<Symbol>(cv.new_value);
    }
  }
  return SymbolString(a.k(), std::move(cur));
}

inline EditScript invert_script(const EditScript& s) {
  EditScript inv;
  inv.ops.reserve(s.ops.size());
  for (auto it = s.ops.rbegin(); it != s.ops.rend(); ++it) {
    if (const auto* cv = std::get_if<ChangeValue>(&*it))
      inv.ops.emplace_back(ChangeValue{cv->pos, cv->new_value, cv->old_value});
    else
      inv.ops.push_back(*it);
  }
  return inv;
}

} // namespace ygg
