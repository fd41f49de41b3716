// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance            all eight
//   acceptance --only N   just criterion N (exit status reflects it)

#include <ygg/ygg.hpp>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace ygg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (detail.tellp() > 0)
        detail << "; ";
      detail << "failed: " << what;
      pass = false;
    }
  }
};

SymbolString random_string(Rng& rng, unsigned k, std::size_t n) {
  std::vector<Symbol> v(n);
  for (auto& s : v)
    s = static_cast<Symbol>(rng.below(max_symbol(k) + 1));
  return SymbolString(k, std::move(v));
}

SymbolString perturb(Rng& rng, const SymbolString& a, std::size_t ops) {
  std::vector<Symbol> v(a.begin(), a.end());
  for (std::size_t t = 0; t < ops; ++t) {
    if (rng.chance(0.5))
      std::swap(v[rng.below(v.size())], v[rng.below(v.size())]);
    else
      v[rng.below(v.size())] = static_cast<Symbol>(rng.below(max_symbol(a.k()) + 1));
  }
  return SymbolString(a.k(), std::move(v));
}

SymbolString decode(std::uint64_t code, std::size_t n, unsigned k) {
  std::vector<Symbol> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = static_cast<Symbol>((code >> (k * (n - 1 - i))) & max_symbol(k));
  return SymbolString(k, std::move(v));
}

ExperimentConfig quiet() {
  ExperimentConfig cfg;
  cfg.log = [](const std::string&) {};
  return cfg;
}

// Table values: exact exponent, mantissa within 0.02.
Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  struct Row {
    unsigned k;
    std::uint64_t n_b, n_o;
    double mantissa;
    long exponent;
  };
  const Row rows[] = {{4, 10, 15, 2.35, 9},
                      {8, 10, 15, 3.24, 15},
                      {2, 100, 150, 1.72, 64},
                      {8, 500, 1000, 5.05, 1502}};
  for (const auto& r : rows) {
    const auto sci = to_scientific(n_preimages(r.k, r.n_o, r.n_b).count, 6);
    o.detail << "(" << r.k << "," << r.n_b << "," << r.n_o << ")=" << sci.str() << " ";
    o.require(sci.exponent == r.exponent && std::abs(sci.mantissa() - r.mantissa) <= 0.02,
              "row k=" + std::to_string(r.k) + " n_b=" + std::to_string(r.n_b));
  }
  const auto small = n_preimages(2, 15, 10).count;
  o.detail << "(2,10,15)=" << small << " ";
  o.require(small == 853570, "(2,10,15) exact value");
  const double s = seconds_since(t0);
  o.detail << "in " << s << " s";
  o.require(s < 1.0, "time budget 1 s");
  return o;
}

// Brute-force supersequence counts against the closed form.
Outcome criterion2() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(2);
  int instances = 0, mismatches = 0;
  for (; instances < 150; ++instances) {
    const unsigned k = rng.chance(0.5) ? 1 : 2;
    const std::size_t n_b = 1 + rng.below(8);
    const std::size_t n_o = n_b + rng.below(12 - n_b + 1);
    const auto base = random_string(rng, k, n_b);
    if (BigInt(supersequence_count_oracle(base, n_o)) != n_preimages(k, n_o, n_b).count)
      ++mismatches;
  }
  const double s = seconds_since(t0);
  o.detail << instances << " instances, " << mismatches << " mismatches, " << s << " s";
  o.require(mismatches == 0, "oracle equality");
  o.require(s < 60.0, "time budget 60 s");
  return o;
}

// Client deletions + cloud dedup + decompress + local reconstruction.
Outcome criterion3() {
  Outcome o;
  Rng rng(3);
  std::size_t total = 0, failures = 0;
  for (unsigned k : {2u, 4u, 8u, 16u}) {
    Params p;
    p.k = k;
    p.n_o = 64;
    p.n_b = 56;
    p.tau = 6;
    ClientStore client(p);
    CloudStore cloud(p);
    cloud.set_tau(p.tau);
    const auto policy = cloud.setup();
    std::vector<SymbolString> seeds;
    for (int i = 0; i < 8; ++i)
      seeds.push_back(random_string(rng, k, p.n_o));
    std::vector<std::pair<std::uint64_t, SymbolString>> uploaded;
    for (int c = 0; c < 2500; ++c) {
      // Near-duplicates so the swap branch is exercised, plus fresh strings.
      auto f = rng.chance(0.7) ? perturb(rng, seeds[rng.below(seeds.size())], rng.below(4))
                               : random_string(rng, k, p.n_o);
      auto up = client.upload(policy, f, rng);
      cloud.compress(up.id, up.base);
      uploaded.emplace_back(up.id, std::move(f));
    }
    const auto reloaded = CloudStore::load(cloud.save());
    for (const auto& [id, f] : uploaded) {
      ++total;
      const auto resp = reloaded.decompress(id);
      if (!resp || client.get(id, *resp) != f)
        ++failures;
    }
  }
  o.detail << total << " chunks, " << failures << " failures";
  o.require(total >= 10'000, "chunk count");
  o.require(failures == 0, "bit-exact round trip");
  return o;
}

Outcome criterion4() {
  Outcome o;
  Rng rng(4);
  std::size_t dl_violations = 0, hamming_violations = 0, apply_failures = 0, pairs = 0;
  std::string example;
  for (unsigned k : {2u, 4u}) {
    for (int t = 0; t < 1000; ++t, ++pairs) {
      const std::size_t n = 1 + rng.below(24);
      auto a = random_string(rng, k, n);
      auto b = rng.chance(0.5) ? perturb(rng, a, rng.below(6)) : random_string(rng, k, n);
      const auto swap = swap_distance(a, b);
      const auto dl = damerau_levenshtein(a, b);
      if (dl > swap) {
        ++dl_violations;
        if (example.empty())
          example = "k=" + std::to_string(k) + " n=" + std::to_string(n) + " DL=" +
                    std::to_string(dl) + " swap=" + std::to_string(swap);
      }
      hamming_violations += swap > hamming(a, b);
      apply_failures += apply_script(a, swap_script(a, b)) != b;
    }
  }
  std::size_t exhaustive = 0, bfs_violations = 0;
  for (unsigned k : {1u, 2u})
    for (std::size_t n = 1; n <= 5; ++n) {
      const std::uint64_t states = std::uint64_t{1} << (k * n);
      for (std::uint64_t ca = 0; ca < states; ++ca) {
        const auto a = decode(ca, n, k);
        const auto dist = swap_distances_from(a);
        for (std::uint64_t cb = 0; cb < states; ++cb, ++exhaustive)
          bfs_violations += dist[cb] > swap_distance(a, decode(cb, n, k));
      }
    }
  o.detail << pairs << " random pairs: DL>swap " << dl_violations << ", swap>Hamming "
           << hamming_violations << ", apply failures " << apply_failures << "; " << exhaustive
           << " exhaustive pairs: BFS>greedy " << bfs_violations;
  if (!example.empty())
    o.detail << "; e.g. " << example;
  o.require(hamming_violations == 0, "swap <= Hamming");
  o.require(apply_failures == 0, "apply law");
  o.require(bfs_violations == 0, "BFS <= greedy");
  // Standard DL counts a far transposition as two edits; a swap is one op.
  o.require(dl_violations == 0, "DL <= swap (not a law for arbitrary-position swaps)");
  return o;
}

Outcome criterion5() {
  Outcome o;
  Rng rng(5);
  std::size_t draws = 0, formula_failures = 0;
  for (; draws < 1000; ++draws) {
    Params p;
    p.k = 1u << rng.below(6);
    p.n_o = 1 + rng.below(4096);
    p.n_b = 1 + rng.below(p.n_o);
    p.tau = rng.below(200);
    p.s_h = static_cast<unsigned>(1 + rng.below(65535));
    const Rational r(rng.below(1001), 1000);
    formula_failures += gcr_formula(p, r) != ucr_formula(p).value + ccr_formula(p, r).value;
    formula_failures += gcr_formula(p, r) != gcr_closed_form(p, r);
  }
  auto cfg = quiet();
  cfg.synthetic.lines = 3000;
  cfg.ks = {2, 4, 8};
  cfg.base_sizes = {896, 960};
  cfg.taus = {0, 4, 16, 48};
  cfg.verify = true;
  cfg.threads = 4;
  const auto res = sweep(cfg);
  std::size_t measured_failures = 0;
  for (const auto& row : res.rows)
    measured_failures += row.gcr != row.ucr + row.ccr;
  o.detail << draws << " draws, " << formula_failures << " formula failures; " << res.rows.size()
           << " pipeline runs, " << measured_failures << " measured failures";
  o.require(formula_failures == 0, "formula sum law");
  o.require(measured_failures == 0 && !res.rows.empty(), "measured sum law");
  return o;
}

Outcome criterion6() {
  Outcome o;
  auto cfg = quiet();
  cfg.synthetic.lines = 4000;
  cfg.ks = {2, 4, 8, 16};
  cfg.base_sizes = {896, 960};
  cfg.taus = {0, 2, 8, 24, 64};
  cfg.threads = 4;
  std::size_t rows = 0, op_violations = 0, bound_violations = 0;
  for (auto strategy : {DeletionStrategy::UniformRandom, DeletionStrategy::RunBreaking}) {
    cfg.strategy = strategy;
    const auto res = sweep(cfg);
    for (const auto& row : res.rows) {
      ++rows;
      op_violations += row.max_deviation_ops > row.tau;
      bound_violations += row.cloud_bits > row.bound_bits;
    }
  }
  o.detail << rows << " rows, " << op_violations << " over tau, " << bound_violations
           << " over the bound";
  o.require(rows > 0, "rows produced");
  o.require(op_violations == 0, "deviation ops <= tau");
  o.require(bound_violations == 0, "cloud bits <= bound");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto t0 = Clock::now();
  auto cfg = quiet();
  cfg.ks = {8};
  cfg.base_sizes = {960};
  cfg.taus = {0, 8, 12, 16, 20, 24, 28, 32, 40, 48, 64, 96, 120};
  cfg.strategy = DeletionStrategy::RunBreaking;
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  Corpus corpus;
  corpus.files.push_back({"synthetic.log", synthesize_corpus(cfg.synthetic)});
  const auto res = sweep(corpus, cfg);
  const double s = seconds_since(t0);
  o.require(corpus.total_bytes() >= 10'000'000, "corpus of at least 10 MB");
  o.require(res.groups.size() == 1, "one (k, n_b) group");
  if (res.groups.size() != 1)
    return o;
  const auto& g = res.groups[0];
  const double best = static_cast<double>(g.best_tau), median = static_cast<double>(g.tau_heuristic);
  o.detail << corpus.total_bytes() << " bytes; gcr by tau:";
  for (const auto& row : res.rows)
    o.detail << " " << row.tau << "=" << to_decimal(row.gcr, 4);
  o.detail << "; best tau " << g.best_tau << ", median swap " << g.tau_heuristic << ", " << s
           << " s";
  o.require(g.ucr_constant, "(a) UCR constant in tau");
  o.require(g.interior_minimum, "(b) interior minimum");
  o.require(median > 0 && std::abs(best - median) <= 0.5 * median, "(c) best tau near median");
  o.require(s < 600.0, "time budget 600 s");
  return o;
}

Outcome criterion8() {
  Outcome o;
  Rng rng(8);
  Params p;
  p.k = 8;
  p.n_o = 64;
  p.n_b = 60;
  p.tau = 4;
  ClientStore client(p);
  CloudStore cloud(p);
  cloud.set_tau(p.tau);
  const auto seed = random_string(rng, 8, 64);
  std::vector<std::uint64_t> ids;
  for (int i = 0; i < 200; ++i) {
    auto up = client.upload(cloud.setup(), perturb(rng, seed, rng.below(5)), rng);
    cloud.compress(up.id, up.base);
    ids.push_back(up.id);
  }
  client.add_file("f", {ids, ids.size() * 512});
  const auto cb = client.save(), sb = cloud.save();
  o.require(ClientStore::load(cb).save() == cb, "client save/load/save");
  o.require(CloudStore::load(sb).save() == sb, "cloud save/load/save");

  auto throws_corruption = [](auto&& f) {
    try {
      f();
    } catch (const CorruptionError&) {
      return true;
    } catch (...) {
    }
    return false;
  };
  auto bad_client = cb, bad_cloud = sb;
  bad_client[0] ^= 0xFF;
  bad_cloud[0] ^= 0xFF;
  o.require(throws_corruption([&] { ClientStore::load(bad_client); }), "client bad magic");
  o.require(throws_corruption([&] { CloudStore::load(bad_cloud); }), "cloud bad magic");

  // Cut the cloud store inside the op list of a record that has ops.
  std::size_t cuts = 0, rejected = 0;
  for (std::size_t cut = sb.size() - 1; cut > sb.size() - 200; --cut, ++cuts)
    rejected += throws_corruption([&] { CloudStore::load(std::span(sb).first(cut)); });
  o.require(rejected == cuts, "truncated op list");
  o.detail << "client " << cb.size() << " bytes, cloud " << sb.size() << " bytes, " << rejected
           << "/" << cuts << " truncations rejected";
  return o;
}

} // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--only N]\n";
      return 1;
    }
  }
  const std::function<Outcome()> criteria[] = {criterion1, criterion2, criterion3, criterion4,
                                               criterion5, criterion6, criterion7, criterion8};
  if (only < 0 || only > 8) {
    std::cerr << "criterion must be 1..8\n";
    return 1;
  }
  bool all = true;
  for (int n = 1; n <= 8; ++n) {
    if (only && n != only)
      continue;
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail.str()
              << ")" << std::endl;
    all &= o.pass;
  }
  return all ? 0 : 1;
}
