#include <ygg/metrics.hpp>

#include <gtest/gtest.h>

#include <map>
#include <queue>
#include <set>

using namespace ygg;

namespace {

SymbolString random_string(Rng& rng, unsigned k, std::size_t n) {
  std::vector<Symbol> v(n);
  for (auto& s : v)
    s = static_cast<Symbol>(rng.below(max_symbol(k) + 1));
  return SymbolString(k, std::move(v));
}

// b = a with a few random swaps and value changes.
SymbolString perturb(Rng& rng, const SymbolString& a, std::size_t ops) {
  std::vector<Symbol> v(a.begin(), a.end());
  for (std::size_t t = 0; t < ops && !v.empty(); ++t) {
    if (rng.chance(0.5)) {
      std::swap(v[rng.below(v.size())], v[rng.below(v.size())]);
    } else {
      v[rng.below(v.size())] = static_cast<Symbol>(rng.below(max_symbol(a.k()) + 1));
    }
  }
  return SymbolString(a.k(), std::move(v));
}

// Shortest edit sequence (insert, delete, substitute, adjacent transposition)
// by breadth-first search over strings. Tiny inputs only.
std::size_t edit_search(const std::vector<Symbol>& a, const std::vector<Symbol>& b,
                        unsigned k) {
  const Symbol top = static_cast<Symbol>(max_symbol(k));
  const std::size_t cap = std::max(a.size(), b.size()) + 1;
  std::map<std::vector<Symbol>, std::size_t> dist{{a, 0}};
  std::queue<std::vector<Symbol>> q;
  q.push(a);
  while (!q.empty()) {
    auto cur = q.front();
    q.pop();
    const auto d = dist[cur];
    if (cur == b)
      return d;
    auto visit = [&](std::vector<Symbol> nb) {
      if (nb.size() <= cap && dist.emplace(nb, d + 1).second)
        q.push(std::move(nb));
    };
    for (std::size_t i = 0; i <= cur.size(); ++i)
      for (Symbol v = 0; v <= top; ++v) {
        auto nb = cur;
        nb.insert(nb.begin() + static_cast<std::ptrdiff_t>(i), v);
        visit(std::move(nb));
      }
    for (std::size_t i = 0; i < cur.size(); ++i) {
      auto del = cur;
      del.erase(del.begin() + static_cast<std::ptrdiff_t>(i));
      visit(std::move(del));
      for (Symbol v = 0; v <= top; ++v)
        if (v != cur[i]) {
          auto sub = cur;
          sub[i] = v;
          visit(std::move(sub));
        }
      if (i + 1 < cur.size()) {
        auto tr = cur;
        std::swap(tr[i], tr[i + 1]);
        visit(std::move(tr));
      }
    }
  }
  return SIZE_MAX;
}

} // namespace

TEST(Hamming, Basics) {
  EXPECT_EQ(hamming(SymbolString(8, {4, 6, 1, 3}), SymbolString(8, {4, 7, 1, 3})), 1u);
  EXPECT_EQ(hamming(SymbolString(8, {}), SymbolString(8, {})), 0u);
  EXPECT_THROW(hamming(SymbolString(8, {1}), SymbolString(8, {1, 2})), InvalidArgument);
  EXPECT_THROW(hamming(SymbolString(8, {1}), SymbolString(4, {1})), InvalidArgument);
}

TEST(Hamming, MetricLaws) {
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = rng.below(40);
    auto a = random_string(rng, 2, n), b = random_string(rng, 2, n), c = random_string(rng, 2, n);
    EXPECT_EQ(hamming(a, b), hamming(b, a));
    EXPECT_EQ(hamming(a, a), 0u);
    EXPECT_LE(hamming(a, c), hamming(a, b) + hamming(b, c));
  }
}

TEST(Hamming, BoundedAndLaneVariantsAgree) {
  Rng rng(2);
  for (int t = 0; t < 500; ++t) {
    const unsigned k = 1u << rng.below(4);
    const std::size_t n = rng.below(200);
    auto a = random_string(rng, k, n);
    auto b = perturb(rng, a, rng.below(30));
    const auto h = hamming(a, b);
    const std::size_t bound = rng.below(40);
    const auto within = hamming_within(a.view(), b.view(), bound);
    const auto lanes = hamming_within_lanes(byte_lanes(a.view()), byte_lanes(b.view()), bound);
    if (h <= bound) {
      EXPECT_EQ(within, h);
      EXPECT_EQ(lanes, h);
    } else {
      EXPECT_FALSE(within);
      EXPECT_FALSE(lanes);
    }
  }
  EXPECT_THROW(byte_lanes(SymbolString(16, {256}).view()), InvalidArgument);
}

TEST(SwapScript, SingleTransposition) {
  auto s = swap_script(SymbolString(8, {1, 2}), SymbolString(8, {2, 1}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(std::get<Swap>(s.ops[0]), (Swap{0, 1}));
}

TEST(SwapScript, ThreeCycleTakesTwoSwaps) {
  const SymbolString a(2, {1, 2, 3}), b(2, {3, 1, 2});
  auto s = swap_script(a, b);
  EXPECT_EQ(s.size(), 2u);
  for (const auto& op : s.ops)
    EXPECT_TRUE(std::holds_alternative<Swap>(op));
  EXPECT_EQ(apply_script(a, s), b);
  EXPECT_EQ(swap_distance_exact(a, b, 5), 2u);
}

TEST(SwapScript, IdenticalIsEmpty) {
  const SymbolString a(8, {9, 9, 9});
  EXPECT_TRUE(swap_script(a, a).empty());
  EXPECT_EQ(swap_distance(a, a), 0u);
}

TEST(SwapScript, ChangeValueWhenNoPartner) {
  const SymbolString a(8, {1, 2, 3}), b(8, {1, 2, 7});
  auto s = swap_script(a, b);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(std::get<ChangeValue>(s.ops[0]), (ChangeValue{2, 3, 7}));
}

TEST(SwapScript, ApplyLawAndBounds) {
  Rng rng(3);
  for (int t = 0; t < 2000; ++t) {
    const unsigned k = 1u << rng.below(6);
    const std::size_t n = 1 + rng.below(64);
    auto a = random_string(rng, k, n);
    auto b = rng.chance(0.5) ? perturb(rng, a, rng.below(12)) : random_string(rng, k, n);
    const auto cost = CostModel::for_length(k, n);
    auto s = swap_script(a, b, cost);
    ASSERT_EQ(apply_script(a, s), b);
    EXPECT_EQ(s.size(), swap_distance(a, b, cost));
    const auto h = hamming(a, b);
    EXPECT_LE(s.size(), h);
    EXPECT_LE(swap_lower_bound(a.view(), b.view(), h), s.size());
    EXPECT_GE(2 * s.size(), h);
  }
}

TEST(SwapScript, InverseRestoresOriginal) {
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    auto a = random_string(rng, 4, 1 + rng.below(30));
    auto b = perturb(rng, a, rng.below(10));
    auto s = swap_script(a, b);
    EXPECT_EQ(apply_script(b, invert_script(s)), a);
  }
}

TEST(SwapScript, BoundedDistanceMatchesGreedy) {
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const unsigned k = rng.chance(0.5) ? 8 : 16;
    auto a = random_string(rng, k, 1 + rng.below(128));
    auto b = perturb(rng, a, rng.below(40));
    const auto cost = CostModel::for_length(k, a.size());
    const auto d = swap_distance(a, b, cost);
    const std::size_t bound = rng.below(30);
    const auto within = swap_distance_within(a.view(), b.view(), bound, cost);
    if (d <= bound)
      EXPECT_EQ(within, d);
    else
      EXPECT_FALSE(within);
  }
}

TEST(SwapScript, GreedyNeverBeatsExact) {
  Rng rng(6);
  for (int t = 0; t < 300; ++t) {
    auto a = random_string(rng, 2, 1 + rng.below(6));
    auto b = random_string(rng, 2, a.size());
    const auto exact = swap_distance_exact(a, b, 8);
    ASSERT_TRUE(exact);
    EXPECT_LE(*exact, swap_distance(a, b));
    EXPECT_LE(swap_lower_bound(a.view(), b.view(), hamming(a, b)), *exact);
  }
}

TEST(SwapScript, ExhaustiveTableMatchesSearch) {
  const SymbolString a(2, {0, 1, 2, 3});
  const auto dist = swap_distances_from(a);
  ASSERT_EQ(dist.size(), 256u);
  for (std::uint64_t code = 0; code < 256; code += 7) {
    std::vector<Symbol> v(4);
    for (std::size_t i = 0; i < 4; ++i)
      v[i] = static_cast<Symbol>((code >> (2 * (3 - i))) & 3);
    EXPECT_EQ(swap_distance_exact(a, SymbolString(2, v), 8), dist[code]);
  }
}

TEST(SwapScript, ExactLimitsAndGuards) {
  const SymbolString a(2, {0, 0, 0, 0}), b(2, {1, 2, 3, 1});
  EXPECT_EQ(swap_distance_exact(a, b, 4), 4u);
  EXPECT_FALSE(swap_distance_exact(a, b, 3));
  EXPECT_THROW(swap_distance_exact(SymbolString(8, {1}), SymbolString(8, {2}), 2),
               InstanceTooLarge);
  EXPECT_THROW(swap_distances_from(SymbolString(4, std::vector<Symbol>(6, 0))), InstanceTooLarge);
}

TEST(CostModel, OpBits) {
  Params p;
  p.k = 8;
  p.n_o = 1024;
  const auto c = CostModel::for_params(p);
  EXPECT_EQ(c.swap_bits(), 20u);
  EXPECT_EQ(c.change_bits(), 18u);
  EXPECT_EQ(c.max_op_bits(), 20u);
  EditScript s;
  s.ops = {Swap{0, 1}, ChangeValue{2, 0, 1}};
  EXPECT_EQ(s.bits(c), 38u);
}

TEST(ApplyScript, MalformedOpsAreCorruption) {
  const SymbolString a(8, {1, 2, 3});
  auto run = [&](EditOp op) {
    EditScript s;
    s.ops = {op};
    return apply_script(a, s);
  };
  EXPECT_THROW(run(Swap{0, 3}), CorruptionError);
  EXPECT_THROW(run(Swap{1, 1}), CorruptionError);
  EXPECT_THROW(run(ChangeValue{3, 0, 1}), CorruptionError);
  EXPECT_THROW(run(ChangeValue{0, 9, 4}), CorruptionError);
  EXPECT_THROW(run(ChangeValue{0, 1, 256}), CorruptionError);
  EXPECT_THROW(run(ChangeValue{0, 1, 1}), CorruptionError);
}

TEST(DamerauLevenshtein, Examples) {
  auto str = [](const char* s) {
    std::vector<Symbol> v;
    for (; *s; ++s)
      v.push_back(static_cast<unsigned char>(*s));
    return SymbolString(8, v);
  };
  EXPECT_EQ(damerau_levenshtein(str("ca"), str("ac")), 1u);
  EXPECT_EQ(damerau_levenshtein(str("ca"), str("abc")), 2u);
  EXPECT_EQ(damerau_levenshtein(str("kitten"), str("sitting")), 3u);
  EXPECT_EQ(damerau_levenshtein(str(""), str("abc")), 3u);
  EXPECT_EQ(damerau_levenshtein(SymbolString(8, {1, 2, 3, 4}), SymbolString(8, {1, 3, 2})), 2u);
}

TEST(DamerauLevenshtein, MatchesEditSearch) {
  Rng rng(7);
  for (int t = 0; t < 150; ++t) {
    auto a = random_string(rng, 1, rng.below(6));
    auto b = random_string(rng, 1, rng.below(6));
    ASSERT_EQ(damerau_levenshtein(a, b), edit_search(a.symbols(), b.symbols(), 1))
        << "t=" << t;
  }
  for (int t = 0; t < 40; ++t) {
    auto a = random_string(rng, 2, rng.below(5));
    auto b = random_string(rng, 2, rng.below(5));
    ASSERT_EQ(damerau_levenshtein(a, b), edit_search(a.symbols(), b.symbols(), 2));
  }
}

TEST(DamerauLevenshtein, BoundedByHammingAndSymmetric) {
  Rng rng(8);
  for (int t = 0; t < 500; ++t) {
    auto a = random_string(rng, 4, rng.below(30));
    auto b = perturb(rng, a, rng.below(8));
    EXPECT_LE(damerau_levenshtein(a, b), hamming(a, b));
    EXPECT_EQ(damerau_levenshtein(a, b), damerau_levenshtein(b, a));
  }
}

// A swap can exchange distant positions in one op while DL needs two edits,
// so DL <= swap distance does not hold in general.
TEST(DamerauLevenshtein, CanExceedSwapDistance) {
  const SymbolString a(2, {1, 2, 3}), b(2, {3, 2, 1});
  EXPECT_EQ(damerau_levenshtein(a, b), 2u);
  EXPECT_EQ(swap_distance(a, b), 1u);
  EXPECT_EQ(swap_distance_exact(a, b, 4), 1u);
}
