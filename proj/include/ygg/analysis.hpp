#pragma once

// Closed-form compression ratios, the preimage count behind the uncertainty
// metric, and the most-probable-string score. All arithmetic is exact:
// bit counts are integers, ratios are rationals, decimals appear only when a
// value is rendered.

#include <ygg/errors.hpp>
#include <ygg/symstring.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

namespace ygg {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// d.ddd x 10^exponent, computed from digit counts and integer division.
struct Scientific {
  std::string digits;  // significant digits, no point
  long exponent = 0;
  bool negative = false;

  double mantissa() const {
    if (digits.empty())
      return 0.0;
    return std::stod(digits.substr(0, 1) + "." + digits.substr(1)) * (negative ? -1 : 1);
  }

  std::string str() const {
    if (digits.empty())
      return "0";
    std::string s = negative ? "-" : "";
    s += digits.substr(0, 1);
    if (digits.size() > 1)
      s += "." + digits.substr(1);
    return s + "e" + std::to_string(exponent);
  }
};

namespace detail {

inline BigInt pow10(long e) {
  BigInt r = 1;
  for (long i = 0; i < e; ++i)
    r *= 10;
  return r;
}

inline long decimal_digits(const BigInt& v) { return static_cast<long>(v.str().size()); }

} // namespace detail

// Rounds half up to `sig` significant digits.
inline Scientific to_scientific(const Rational& q, unsigned sig = 3) {
  Scientific out;
  if (q == 0)
    return out;
  if (sig == 0)
    throw InvalidArgument("to_scientific needs at least one digit");
  BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  if (num < 0) {
    out.negative = true;
    num = -num;
  }
  // Find e with 10^e <= num/den < 10^(e+1).
  long e = detail::decimal_digits(num) - detail::decimal_digits(den);
  auto at_least = [&](long exp) {  // num/den >= 10^exp
    return exp >= 0 ? num >= den * detail::pow10(exp) : num * detail::pow10(-exp) >= den;
  };
  while (!at_least(e))
    --e;
  while (at_least(e + 1))
    ++e;
  const long shift = static_cast<long>(sig) - 1 - e;
  BigInt scaled_num = shift >= 0 ? num * detail::pow10(shift) : num;
  BigInt scaled_den = shift >= 0 ? den : den * detail::pow10(-shift);
  BigInt m = (2 * scaled_num + scaled_den) / (2 * scaled_den);
  if (m == detail::pow10(sig)) {
    m /= 10;
    ++e;
  }
  out.digits = m.str();
  out.exponent = e;
  return out;
}

inline Scientific to_scientific(const BigInt& v, unsigned sig = 3) {
  return to_scientific(Rational(v), sig);
}

// Fixed-point rendering with `places` decimals, rounded half away from zero.
inline std::string to_decimal(const Rational& q, unsigned places = 6) {
  BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  const bool neg = num < 0;
  if (neg)
    num = -num;
  const BigInt scale = detail::pow10(places);
  const BigInt m = (2 * num * scale + den) / (2 * den);
  std::string digits = m.str();
  if (digits.size() <= places)
    digits.insert(0, places + 1 - digits.size(), '0');
  std::string s = digits.substr(0, digits.size() - places);
  if (places > 0)
    s += "." + digits.substr(digits.size() - places);
  return (neg && m != 0 ? "-" : "") + s;
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// ---------------------------------------------------------------------------
// Compression ratios

struct RatioReport {
  Rational ucr, ccr, gcr;
  std::optional<Params> params;
  std::optional<Rational> r;
  std::optional<std::uint64_t> n_f, n_b;
  std::uint64_t client_bits = 0, cloud_bits = 0, db_bits = 0;
};

struct UcrFormula {
  Rational value;
  bool below_one = false;  // s_h + x (ceil(log2 n_o) + k) < k n_o
};

namespace detail {
inline void check_formula_params(const Params& p);
}

inline UcrFormula ucr_formula(const Params& p) {
  detail::check_formula_params(p);
  const std::uint64_t x = p.deletions();
  const std::uint64_t client = x * (p.pos_bits() + p.k) + p.s_h;
  return {Rational(client, p.original_bits()), client < p.original_bits()};
}

struct CcrFormula {
  Rational value;
  // CCR <= 1 iff r <= r_threshold (or r >= it when `threshold_is_lower`);
  // absent when k n_b == 2 tau ceil(log2 n_o).
  std::optional<Rational> r_threshold;
  bool threshold_is_lower = false;
  bool at_most_one = false;
};

namespace detail {

// The formulas also make sense without identifier overhead, so s_h = 0 is
// accepted here even though stores require s_h >= 1.
inline void check_formula_params(const Params& p) {
  Params q = p;
  q.s_h = std::max(p.s_h, 1u);
  q.validate();
}

inline void check_fraction(const Rational& r) {
  if (r < 0 || r > 1)
    throw InvalidArgument("base fraction r must lie in [0, 1]");
}

} // namespace detail

// Closed-form cloud ratio: every deduplicated string is charged tau swaps.
inline CcrFormula ccr_formula(const Params& p, const Rational& r) {
  detail::check_formula_params(p);
  detail::check_fraction(r);
  const BigInt swap_cost = BigInt(2) * p.tau * p.pos_bits();
  const BigInt base = BigInt(p.k) * p.n_b;
  CcrFormula out;
  out.value = (Rational(p.s_h) + Rational(swap_cost) + r * Rational(base - swap_cost)) /
              Rational(p.original_bits());
  out.at_most_one = out.value <= 1;
  const BigInt denom = base - swap_cost;
  if (denom != 0) {
    const BigInt k_x = BigInt(p.k) * p.deletions();
    out.r_threshold = Rational(1) - Rational(BigInt(p.s_h) - k_x) / Rational(denom);
    out.threshold_is_lower = denom < 0;
  }
  return out;
}

inline Rational gcr_formula(const Params& p, const Rational& r) {
  return ucr_formula(p).value + ccr_formula(p, r).value;
}

// The global ratio written out as one fraction:
// (2 s_h + k x + (2 tau + x) L + r (k n_b - 2 tau L)) / (k n_o).
inline Rational gcr_closed_form(const Params& p, const Rational& r) {
  detail::check_formula_params(p);
  detail::check_fraction(r);
  const BigInt L = p.pos_bits();
  const BigInt x = p.deletions();
  const BigInt tau = p.tau;
  const BigInt k = p.k;
  const Rational numer = Rational(2 * BigInt(p.s_h) + k * x + (2 * tau + x) * L) +
                         r * Rational(k * p.n_b - 2 * tau * L);
  return numer / Rational(p.original_bits());
}

inline RatioReport formula_report(const Params& p, const Rational& r) {
  RatioReport rep;
  rep.ucr = ucr_formula(p).value;
  rep.ccr = ccr_formula(p, r).value;
  rep.gcr = rep.ucr + rep.ccr;
  rep.params = p;
  rep.r = r;
  return rep;
}

// Measured ratios; db_bits is the raw size N_f k n_o.
inline RatioReport measured_ratios(std::uint64_t client_bits, std::uint64_t cloud_bits,
                                   std::uint64_t db_bits) {
  if (db_bits == 0)
    throw InvalidArgument("measured_ratios: database size is zero");
  RatioReport rep;
  rep.client_bits = client_bits;
  rep.cloud_bits = cloud_bits;
  rep.db_bits = db_bits;
  rep.ucr = Rational(client_bits, db_bits);
  rep.ccr = Rational(cloud_bits, db_bits);
  rep.gcr = rep.ucr + rep.ccr;
  return rep;
}

// ---------------------------------------------------------------------------
// Uncertainty

struct PreimageCount {
  BigInt count;       // sum_{j=0}^{x} C(n_o, j+n_b) (2^k - 1)^(x-j)
  BigInt first_term;  // C(n_o, n_b) (2^k - 1)^x, a lower bound
};

inline void check_uncertainty_args(unsigned k, std::uint64_t n_o, std::uint64_t n_b) {
  check_symbol_width(k);
  if (n_b > n_o)
    throw InvalidArgument("n_b must not exceed n_o");
}

// Number of length-n_o strings over 2^k symbols that contain a given length
// n_b string as a subsequence.
inline PreimageCount n_preimages(unsigned k, std::uint64_t n_o, std::uint64_t n_b) {
  check_uncertainty_args(k, n_o, n_b);
  const std::uint64_t x = n_o - n_b;
  const BigInt q = (BigInt(1) << k) - 1;

  // powers[i] = q^i
  std::vector<BigInt> powers(x + 1);
  powers[0] = 1;
  for (std::uint64_t i = 1; i <= x; ++i)
    powers[i] = powers[i - 1] * q;

  // binom = C(n_o, n_b), advanced to C(n_o, n_b + j) in the loop.
  BigInt binom = 1;
  const std::uint64_t m = std::min(n_b, n_o - n_b);
  for (std::uint64_t i = 1; i <= m; ++i)
    binom = binom * (n_o - m + i) / i;

  PreimageCount out;
  out.first_term = binom * powers[x];
  for (std::uint64_t j = 0; j <= x; ++j) {
    out.count += binom * powers[x - j];
    const std::uint64_t c = n_b + j;
    if (c < n_o)
      binom = binom * (n_o - c) / (c + 1);
  }
  return out;
}

struct UncertaintyReport {
  BigInt n_preimages;
  BigInt lower_bound;
  Rational u_metric;  // 1 / n_preimages
  Scientific preimages_sci;
  Scientific u_sci;
};

inline UncertaintyReport uncertainty(unsigned k, std::uint64_t n_o, std::uint64_t n_b,
                                     unsigned sig = 3) {
  auto pc = n_preimages(k, n_o, n_b);
  UncertaintyReport rep;
  rep.u_metric = Rational(BigInt(1), pc.count);
  rep.preimages_sci = to_scientific(pc.count, sig);
  rep.u_sci = to_scientific(rep.u_metric, sig);
  rep.n_preimages = std::move(pc.count);
  rep.lower_bound = std::move(pc.first_term);
  return rep;
}

namespace detail {

inline bool is_subsequence_of_code(std::span<const Symbol> base, std::uint64_t code,
                                   std::size_t n, unsigned k) {
  const std::uint64_t mask = max_symbol(k);
  std::size_t matched = 0;
  for (std::size_t i = 0; i < n && matched < base.size(); ++i) {
    const auto sym = (code >> (k * (n - 1 - i))) & mask;
    if (sym == base[matched])
      ++matched;
  }
  return matched == base.size();
}

} // namespace detail

// Counts distinct length-n_o strings containing `base` as a subsequence by
// brute force: full enumeration when (2^k)^n_o <= 2^24, otherwise by growing
// the set of supersequences one insertion at a time (capped at 10^7).
inline std::uint64_t supersequence_count_oracle(const SymbolString& base, std::size_t n_o) {
  const unsigned k = base.k();
  if (base.size() > n_o)
    throw InvalidArgument("supersequence oracle: base longer than target length");
  if (base.size() == n_o)
    return 1;
  if (std::uint64_t{k} * n_o <= 24) {
    const std::uint64_t states = std::uint64_t{1} << (k * n_o);
    std::uint64_t count = 0;
    for (std::uint64_t code = 0; code < states; ++code)
      count += detail::is_subsequence_of_code(base.view(), code, n_o, k);
    return count;
  }
  if (std::uint64_t{k} * n_o > 64)
    throw InstanceTooLarge("supersequence oracle: strings do not fit a 64-bit code");

  constexpr std::size_t kCap = 10'000'000;
  const std::uint64_t alphabet = std::uint64_t{1} << k;
  std::unordered_set<std::uint64_t> level;
  std::uint64_t seed = 0;
  for (Symbol s : base)
    seed = (seed << k) | s;
  level.insert(seed);
  for (std::size_t len = base.size(); len < n_o; ++len) {
    std::unordered_set<std::uint64_t> next;
    for (auto code : level) {
      for (std::size_t at = 0; at <= len; ++at) {
        const unsigned low_bits = static_cast<unsigned>(k * (len - at));
        const std::uint64_t low = low_bits == 0 ? 0 : code & ((std::uint64_t{1} << low_bits) - 1);
        const std::uint64_t high = low_bits >= 64 ? 0 : code >> low_bits;
        for (std::uint64_t v = 0; v < alphabet; ++v) {
          next.insert((((high << k) | v) << low_bits) | low);
          if (next.size() > kCap)
            throw InstanceTooLarge("supersequence oracle: more than 10^7 distinct strings");
        }
      }
    }
    level.swap(next);
  }
  return level.size();
}

// ---------------------------------------------------------------------------
// Most probable string

class SymbolDistribution {
public:
  static SymbolDistribution uniform(unsigned k) {
    check_symbol_width(k);
    SymbolDistribution d;
    d.k_ = k;
    d.uniform_ = true;
    return d;
  }

  static SymbolDistribution from_counts(unsigned k, const std::map<Symbol, std::uint64_t>& counts) {
    check_symbol_width(k);
    std::uint64_t total = 0;
    for (const auto& [s, c] : counts) {
      if (s > max_symbol(k))
        throw InvalidArgument("distribution symbol out of range");
      total += c;
    }
    if (total == 0)
      throw InvalidArgument("distribution has no mass");
    SymbolDistribution d;
    d.k_ = k;
    for (const auto& [s, c] : counts)
      if (c > 0)
        d.probs_[s] = Rational(c, total);
    return d;
  }

  static SymbolDistribution from_probabilities(unsigned k, std::map<Symbol, Rational> probs) {
    check_symbol_width(k);
    Rational sum = 0;
    for (const auto& [s, p] : probs) {
      if (s > max_symbol(k) || p < 0)
        throw InvalidArgument("invalid probability entry");
      sum += p;
    }
    if (sum != 1)
      throw InvalidArgument("probabilities must sum to 1");
    SymbolDistribution d;
    d.k_ = k;
    d.probs_ = std::move(probs);
    return d;
  }

  unsigned k() const { return k_; }
  bool is_uniform() const { return uniform_; }

  Rational p(Symbol s) const {
    if (uniform_)
      return Rational(BigInt(1), BigInt(1) << k_);
    auto it = probs_.find(s);
    return it == probs_.end() ? Rational(0) : it->second;
  }

  const std::map<Symbol, Rational>& support() const { return probs_; }

private:
  unsigned k_ = 8;
  bool uniform_ = false;
  std::map<Symbol, Rational> probs_;
};

// Longest run of each symbol present in s.
inline std::map<Symbol, std::size_t> longest_runs(const SymbolString& s) {
  std::map<Symbol, std::size_t> runs;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i + 1;
    while (j < s.size() && s[j] == s[i])
      ++j;
    auto& best = runs[s[i]];
    best = std::max(best, j - i);
    i = j;
  }
  return runs;
}

struct MostProbable {
  Symbol symbol = 0;
  Rational score;
  std::size_t longest_run = 0;
  bool degenerate = false;  // no deletions: the score reduces to l_i
};

// max_i 1/2 p_i^x (x+1)(2 l_i + x), x = n_o - n_b, l_i the longest run of i
// in the base. Ties go to the smallest symbol.
inline MostProbable most_probable_string_score(const SymbolString& base,
                                               const SymbolDistribution& dist, std::size_t n_o) {
  if (base.empty())
    throw InvalidArgument("most_probable_string_score: empty base");
  if (dist.k() != base.k())
    throw InvalidArgument("most_probable_string_score: distribution width differs from base");
  if (n_o < base.size())
    throw InvalidArgument("most_probable_string_score: n_o shorter than base");
  const std::uint64_t x = n_o - base.size();
  const auto runs = longest_runs(base);

  std::set<Symbol> candidates;
  for (const auto& [s, l] : runs)
    candidates.insert(s);
  if (dist.is_uniform()) {
    // All absent symbols score alike; the smallest stands in for them.
    for (std::uint64_t s = 0; s <= max_symbol(base.k()); ++s)
      if (!runs.contains(static_cast<Symbol>(s))) {
        candidates.insert(static_cast<Symbol>(s));
        break;
      }
  } else {
    for (const auto& [s, p] : dist.support())
      candidates.insert(s);
  }

  MostProbable best;
  best.degenerate = x == 0;
  bool first = true;
  for (Symbol s : candidates) {
    auto it = runs.find(s);
    const std::uint64_t l = it == runs.end() ? 0 : it->second;
    Rational px = 1;
    const Rational p = dist.p(s);
    for (std::uint64_t e = 0; e < x; ++e)
      px *= p;
    const Rational score = Rational(1, 2) * px * Rational((x + 1) * (2 * l + x));
    if (first || score > best.score) {
      best.symbol = s;
      best.score = score;
      best.longest_run = l;
      first = false;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Policy diagnostics

struct PolicyReport {
  unsigned k = 8;
  std::map<Symbol, std::uint64_t> histogram;
  std::uint64_t total_symbols = 0;
  Rational tv_from_uniform;                     // how far from uniform symbols are
  std::vector<std::size_t> adjacent_equal;      // per base, equal neighbour pairs
  std::size_t adjacent_equal_total = 0;
};

inline PolicyReport policy_reports(const std::vector<SymbolString>& bases) {
  if (bases.empty())
    throw InvalidArgument("policy_reports: empty corpus");
  PolicyReport rep;
  rep.k = bases.front().k();
  for (const auto& b : bases) {
    if (b.k() != rep.k)
      throw InvalidArgument("policy_reports: bases disagree on k");
    for (Symbol s : b)
      ++rep.histogram[s];
    rep.total_symbols += b.size();
    std::size_t eq = 0;
    for (std::size_t i = 1; i < b.size(); ++i)
      eq += b[i] == b[i - 1];
    rep.adjacent_equal.push_back(eq);
    rep.adjacent_equal_total += eq;
  }
  if (rep.total_symbols == 0)
    throw InvalidArgument("policy_reports: corpus has no symbols");
  const Rational u(BigInt(1), BigInt(1) << rep.k);
  Rational sum = 0;
  for (const auto& [s, c] : rep.histogram) {
    const Rational d = Rational(c, rep.total_symbols) - u;
    sum += d < 0 ? Rational(-d) : d;
  }
  const BigInt unseen = (BigInt(1) << rep.k) - rep.histogram.size();
  sum += Rational(unseen) * u;
  rep.tv_from_uniform = sum / 2;
  return rep;
}

} // namespace ygg
