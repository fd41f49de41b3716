#pragma once

// Experiment driver: corpus ingestion and synthesis, the full
// upload -> compress -> get pipeline, and (k, n_b, tau) sweeps rendered as CSV.

#include <ygg/analysis.hpp>
#include <ygg/client.hpp>
#include <ygg/cloud.hpp>
#include <ygg/errors.hpp>
#include <ygg/io.hpp>
#include <ygg/policy.hpp>
#include <ygg/symstring.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ygg {

// ---------------------------------------------------------------------------
// Corpus

struct CorpusFile {
  std::string name;
  Bytes data;
};

struct Corpus {
  std::vector<CorpusFile> files;

  std::uint64_t total_bytes() const {
    std::uint64_t n = 0;
    for (const auto& f : files)
      n += f.data.size();
    return n;
  }
};

// Every regular file below `dir`, named by its relative path, in path order.
inline Corpus load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw InvalidArgument("corpus directory " + dir.string() + " does not exist");
  std::vector<fs::path> paths;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file())
      paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  Corpus c;
  for (const auto& p : paths)
    c.files.push_back({fs::relative(p, dir).generic_string(), io::read_file(p)});
  return c;
}

// HDFS-style log generator. Every template carries default field values;
// each line picks a template and, per field group, replaces the defaults with
// fresh random values with the given probability. Lines are padded with
// spaces to `record_bytes` (0 keeps natural lengths).
struct SyntheticCorpusSpec {
  std::size_t lines = 82'000;   // 82,000 records of 128 bytes: just over 10 MiB
  std::size_t templates = 16;
  double template_skew = 3.0;   // Zipf exponent of template popularity, 0 = uniform
  double timestamp_rate = 1.0;  // timestamp and pid
  double block_rate = 1.0;      // block id and size
  double host_rate = 1.0;       // hosts and port
  std::size_t record_bytes = 128;
  std::uint64_t seed = 0;

  void validate() const {
    for (double r : {timestamp_rate, block_rate, host_rate})
      if (!(r >= 0.0 && r <= 1.0))
        throw InvalidArgument("mutation rates must lie in [0, 1]");
    if (templates == 0)
      throw InvalidArgument("synthetic corpus needs at least one template");
    if (!(template_skew >= 0.0))
      throw InvalidArgument("template_skew must be non-negative");
    if (record_bytes != 0 && record_bytes < 32)
      throw InvalidArgument("record_bytes must be 0 or at least 32");
  }
};

namespace detail {

struct LogFields {
  std::string timestamp, pid, block, size, host, host2, port;
};

struct LogTemplate {
  std::string level, component, format, extra;
  LogFields fields;
};

inline std::string digits(Rng& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i)
    s.push_back(static_cast<char>('0' + (i == 0 ? 1 + rng.below(9) : rng.below(10))));
  return s;
}

inline std::string two(std::uint64_t v) {
  char buf[4];
  std::snprintf(buf, sizeof buf, "%02u", static_cast<unsigned>(v % 100));
  return buf;
}

inline void fresh_timestamp(Rng& rng, LogFields& f) {
  f.timestamp = "0811" + two(9 + rng.below(3)) + " " + two(rng.below(24)) + two(rng.below(60)) +
                two(rng.below(60));
  f.pid = std::to_string(rng.below(1000));
}

inline void fresh_block(Rng& rng, LogFields& f) {
  f.block = std::string(rng.chance(0.5) ? "-" : "") + digits(rng, 18 + rng.below(2));
  f.size = digits(rng, 8);
}

inline void fresh_hosts(Rng& rng, LogFields& f) {
  auto host = [&] {
    return "10.251." + std::to_string(rng.below(256)) + "." + std::to_string(rng.below(256));
  };
  f.host = host();
  f.host2 = host();
  f.port = digits(rng, 5);
}

inline const std::array<const char*, 10>& log_formats() {
  static const std::array<const char*, 10> f = {
      "Receiving block blk_{B} src: /{H}:{P} dest: /{G}:50010",
      "PacketResponder {X} for block blk_{B} terminating",
      "Received block blk_{B} of size {S} from /{H}",
      "BLOCK* NameSystem.addStoredBlock: blockMap updated: {H}:50010 is added to blk_{B}",
      "BLOCK* NameSystem.allocateBlock: /user/root/rand/_task_{X}/part-{X}. blk_{B}",
      "Verification succeeded for blk_{B}",
      "Deleting block blk_{B} file /mnt/hadoop/dfs/data/current/subdir{X}",
      "{H}:50010:Transmitted block blk_{B} to /{G}:50010",
      "writeBlock blk_{B} received exception java.io.IOException",
      "Served block blk_{B} to /{H}",
  };
  return f;
}

inline std::string render_line(const LogTemplate& t, const LogFields& v) {
  std::string out = v.timestamp + " " + v.pid + " " + t.level + " " + t.component + ": ";
  for (std::size_t i = 0; i < t.format.size(); ++i) {
    if (t.format[i] == '{' && i + 2 < t.format.size() && t.format[i + 2] == '}') {
      switch (t.format[i + 1]) {
      case 'B': out += v.block; break;
      case 'H': out += v.host; break;
      case 'G': out += v.host2; break;
      case 'P': out += v.port; break;
      case 'S': out += v.size; break;
      case 'X': out += t.extra; break;
      default: out += t.format.substr(i, 3);
      }
      i += 2;
    } else {
      out.push_back(t.format[i]);
    }
  }
  return out;
}

} // namespace detail

inline Bytes synthesize_corpus(const SyntheticCorpusSpec& spec) {
  spec.validate();
  static constexpr std::array<const char*, 6> kComponents = {
      "dfs.DataNode$DataXceiver", "dfs.DataNode$PacketResponder", "dfs.FSNamesystem",
      "dfs.DataNode",             "dfs.DataBlockScanner",         "dfs.FSDataset"};
  Rng rng(spec.seed);
  Rng pool_rng = rng.fork(1);
  std::vector<detail::LogTemplate> templates(spec.templates);
  for (auto& t : templates) {
    const auto& formats = detail::log_formats();
    t.format = formats[pool_rng.below(formats.size())];
    t.component = kComponents[pool_rng.below(kComponents.size())];
    t.level = pool_rng.chance(0.9) ? "INFO" : "WARN";
    t.extra = std::to_string(pool_rng.below(64));
    detail::fresh_timestamp(pool_rng, t.fields);
    detail::fresh_block(pool_rng, t.fields);
    detail::fresh_hosts(pool_rng, t.fields);
  }

  std::vector<double> cumulative(templates.size());
  double total = 0;
  for (std::size_t i = 0; i < templates.size(); ++i)
    cumulative[i] = total += std::pow(static_cast<double>(i + 1), -spec.template_skew);

  // Keep at least this much padding so every record ends in a long run.
  constexpr std::size_t kMinPad = 16;
  Rng line_rng = rng.fork(2);
  Bytes out;
  out.reserve(spec.lines * (spec.record_bytes ? spec.record_bytes : 100));
  for (std::size_t i = 0; i < spec.lines; ++i) {
    const auto pick = std::upper_bound(cumulative.begin(), cumulative.end(),
                                       line_rng.unit() * total) - cumulative.begin();
    const auto& t = templates[std::min<std::size_t>(pick, templates.size() - 1)];
    detail::LogFields v = t.fields;
    if (line_rng.chance(spec.timestamp_rate))
      detail::fresh_timestamp(line_rng, v);
    if (line_rng.chance(spec.block_rate))
      detail::fresh_block(line_rng, v);
    if (line_rng.chance(spec.host_rate))
      detail::fresh_hosts(line_rng, v);
    std::string line = detail::render_line(t, v);
    if (spec.record_bytes != 0) {
      line.resize(std::min(line.size(), spec.record_bytes - 1 - kMinPad));
      line.resize(spec.record_bytes - 1, ' ');
    }
    line.push_back('\n');
    out.insert(out.end(), line.begin(), line.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

enum class SizeUnits { Bits, Symbols };

inline SizeUnits parse_units(std::string_view s) {
  if (s == "bits")
    return SizeUnits::Bits;
  if (s == "symbols")
    return SizeUnits::Symbols;
  throw InvalidArgument("unknown size unit \"" + std::string(s) + "\"");
}

struct ExperimentConfig {
  std::optional<std::filesystem::path> corpus_dir;  // else the synthetic corpus
  SyntheticCorpusSpec synthetic;
  std::size_t chunk_size = 1024;
  std::vector<unsigned> ks = {8};
  std::vector<std::size_t> base_sizes = {960};
  std::vector<std::size_t> taus = {0};
  SizeUnits units = SizeUnits::Bits;
  unsigned s_h = 64;
  DeletionStrategy strategy = DeletionStrategy::UniformRandom;
  std::uint64_t seed = 0;
  bool verify = false;
  std::size_t heuristic_sample = 2000;
  unsigned threads = 1;
  std::optional<std::filesystem::path> out;
  std::function<void(const std::string&)> log = [](const std::string& m) {
    std::clog << m << '\n';
  };

  void validate() const {
    if (ks.empty() || base_sizes.empty() || taus.empty())
      throw InvalidArgument("sweep grid is empty");
    for (unsigned k : ks)
      check_symbol_width(k);
    if (chunk_size == 0)
      throw InvalidArgument("chunk size must be positive");
  }
};

// Symbol counts for one grid point, or the reason it has none.
struct GridShape {
  std::optional<Params> params;
  std::string skip_reason;
};

inline GridShape resolve_shape(const ExperimentConfig& cfg, unsigned k, std::size_t base) {
  GridShape g;
  std::size_t n_o = cfg.chunk_size, n_b = base;
  if (cfg.units == SizeUnits::Bits) {
    if (cfg.chunk_size % k != 0 || base % k != 0) {
      g.skip_reason = "k=" + std::to_string(k) + ": chunk " + std::to_string(cfg.chunk_size) +
                      " bits / base " + std::to_string(base) +
                      " bits are not whole symbol counts";
      return g;
    }
    n_o /= k;
    n_b /= k;
  }
  Params p;
  p.k = k;
  p.n_o = n_o;
  p.n_b = n_b;
  p.s_h = cfg.s_h;
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    g.skip_reason = "k=" + std::to_string(k) + ", base " + std::to_string(base) + ": " + e.what();
    return g;
  }
  g.params = p;
  return g;
}

// ---------------------------------------------------------------------------
// Pipeline

struct UploadedChunk {
  std::uint64_t id = 0;
  SymbolString original;
  SymbolString base;
};

// Client side of one (k, n_b) group: every chunk uploaded once. Shared by
// all tau values so UCR cannot drift across them.
struct PreparedClient {
  Params params;
  ClientStore client;
  std::vector<UploadedChunk> chunks;

  std::uint64_t db_bits() const { return std::uint64_t{chunks.size()} * params.original_bits(); }
};

inline PreparedClient prepare_client(const Corpus& corpus, const Params& params,
                                     DeletionStrategy strategy, std::uint64_t seed) {
  params.validate();
  PreparedClient pc{params, ClientStore(params), {}};
  Rng rng(Rng::mix_seed(seed, (std::uint64_t{params.k} << 32) | params.n_b));
  const Policy policy{params.k, params.n_o, params.n_b, strategy};
  for (const auto& file : corpus.files) {
    auto cf = chunk(file.data, params);
    FileEntry entry;
    entry.original_bit_length = cf.original_bit_length;
    for (auto& c : cf.chunks) {
      auto up = pc.client.upload(policy, c, rng);
      entry.chunk_ids.push_back(up.id);
      pc.chunks.push_back({up.id, std::move(c), std::move(up.base)});
    }
    pc.client.add_file(file.name, std::move(entry));
  }
  return pc;
}

inline CloudStore run_cloud(const PreparedClient& pc, std::size_t tau) {
  CloudStore cloud(pc.params);
  cloud.set_tau(tau);
  for (const auto& c : pc.chunks)
    cloud.compress(c.id, c.base);
  return cloud;
}

// First chunk id whose round trip does not return the original, if any.
inline std::optional<std::uint64_t> find_mismatch(const PreparedClient& pc,
                                                  const CloudStore& cloud) {
  for (const auto& c : pc.chunks) {
    auto resp = cloud.decompress(c.id);
    if (!resp || pc.client.get(c.id, *resp) != c.original)
      return c.id;
  }
  return std::nullopt;
}

struct SweepRow {
  unsigned k = 0;
  std::size_t n_o = 0, n_b = 0, tau = 0;
  std::uint64_t n_f = 0, n_b_count = 0;
  Rational r, ucr, ccr, gcr, ucr_formula, ccr_bound;
  std::size_t median_swap = 0;
  std::uint64_t wall_ms = 0;
  // Not in the CSV; kept for the conservation checks.
  std::uint64_t client_bits = 0, cloud_bits = 0, bound_bits = 0, db_bits = 0;
  std::size_t max_deviation_ops = 0;
};

inline SweepRow measure_row(const PreparedClient& pc, const CloudStore& cloud, std::size_t tau) {
  SweepRow row;
  row.k = pc.params.k;
  row.n_o = pc.params.n_o;
  row.n_b = pc.params.n_b;
  row.tau = tau;
  row.n_f = cloud.records().size();
  row.n_b_count = cloud.bases().size();
  row.db_bits = pc.db_bits();
  row.client_bits = pc.client.storage_bits();
  row.cloud_bits = cloud.storage_bits();
  row.bound_bits = cloud.storage_bound_bits();
  const auto m = measured_ratios(row.client_bits, row.cloud_bits, row.db_bits);
  row.ucr = m.ucr;
  row.ccr = m.ccr;
  row.gcr = m.gcr;
  row.r = row.n_f ? Rational(row.n_b_count, row.n_f) : Rational(0);
  row.ucr_formula = ucr_formula(pc.params).value;
  row.ccr_bound = Rational(row.bound_bits, row.db_bits);
  for (const auto& [id, rec] : cloud.records())
    row.max_deviation_ops = std::max(row.max_deviation_ops, rec.deviation.size());
  return row;
}

// Median swap distance between stored bases of the tau = 0 store, i.e.
// between distinct uploaded bases.
inline std::size_t group_tau_heuristic(const CloudStore& tau0, std::size_t sample,
                                       std::uint64_t seed) {
  if (tau0.bases().size() < 2)
    return 0;
  Rng rng(Rng::mix_seed(seed, 0x7461755f68657572ull));
  return tau0.tau_heuristic(sample, rng);
}

namespace detail {

inline std::uint64_t elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::steady_clock::now() - t0)
                                        .count());
}

inline Corpus corpus_for(const ExperimentConfig& cfg) {
  if (cfg.corpus_dir)
    return load_corpus(*cfg.corpus_dir);
  Corpus c;
  c.files.push_back({"synthetic.log", synthesize_corpus(cfg.synthetic)});
  return c;
}

} // namespace detail

inline SweepRow run_pipeline(const Corpus& corpus, const ExperimentConfig& cfg, unsigned k,
                             std::size_t base, std::size_t tau) {
  const auto shape = resolve_shape(cfg, k, base);
  if (!shape.params)
    throw InvalidArgument(shape.skip_reason);
  const auto t0 = std::chrono::steady_clock::now();
  auto pc = prepare_client(corpus, *shape.params, cfg.strategy, cfg.seed);
  auto cloud = run_cloud(pc, tau);
  if (cfg.verify)
    if (auto bad = find_mismatch(pc, cloud))
      throw VerificationError("round trip mismatch for chunk id " + std::to_string(*bad));
  auto row = measure_row(pc, cloud, tau);
  if (tau == 0) {
    row.median_swap = group_tau_heuristic(cloud, cfg.heuristic_sample, cfg.seed);
  } else {
    row.median_swap = group_tau_heuristic(run_cloud(pc, 0), cfg.heuristic_sample, cfg.seed);
  }
  row.wall_ms = detail::elapsed_ms(t0);
  return row;
}

inline SweepRow run_pipeline(const ExperimentConfig& cfg, unsigned k, std::size_t base,
                             std::size_t tau) {
  return run_pipeline(detail::corpus_for(cfg), cfg, k, base, tau);
}

// ---------------------------------------------------------------------------
// Sweep

struct GroupSummary {
  unsigned k = 0;
  std::size_t n_o = 0, n_b = 0;
  std::size_t best_tau = 0;  // smallest tau reaching the minimum GCR
  Rational best_gcr;
  std::size_t tau_heuristic = 0;
  bool interior_minimum = false;  // best GCR strictly below both grid endpoints
  bool ucr_constant = true;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<GroupSummary> groups;
  std::vector<std::string> skipped;
};

namespace detail {

inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& f) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lk(mu);
          if (!failure)
            failure = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& th : pool)
    th.join();
  if (failure)
    std::rethrow_exception(failure);
}

inline GroupSummary summarize(const std::vector<const SweepRow*>& rows, std::size_t heuristic) {
  GroupSummary g;
  const auto& first = *rows.front();
  g.k = first.k;
  g.n_o = first.n_o;
  g.n_b = first.n_b;
  g.tau_heuristic = heuristic;
  const SweepRow* best = rows.front();
  for (const auto* r : rows) {
    if (r->gcr < best->gcr)
      best = r;
    if (r->ucr != first.ucr)
      g.ucr_constant = false;
  }
  g.best_tau = best->tau;
  g.best_gcr = best->gcr;
  g.interior_minimum = rows.size() >= 3 && best->gcr < rows.front()->gcr && best->gcr < rows.back()->gcr;
  return g;
}

} // namespace detail

// Rows come out in grid order (k, then base size, then tau ascending),
// independent of the thread count.
inline SweepResult sweep(const Corpus& corpus, const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::size_t> taus = cfg.taus;
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

  SweepResult result;
  std::vector<Params> shapes;
  for (unsigned k : cfg.ks)
    for (auto base : cfg.base_sizes) {
      auto s = resolve_shape(cfg, k, base);
      if (s.params) {
        shapes.push_back(*s.params);
      } else {
        cfg.log("skipping " + s.skip_reason);
        result.skipped.push_back(s.skip_reason);
      }
    }

  std::vector<std::optional<PreparedClient>> prepared(shapes.size());
  std::vector<std::size_t> heuristics(shapes.size(), 0);
  std::mutex log_mu;
  auto log = [&](const std::string& m) {
    std::lock_guard lk(log_mu);
    cfg.log(m);
  };
  detail::parallel_for(shapes.size(), cfg.threads, [&](std::size_t g) {
    try {
      prepared[g] = prepare_client(corpus, shapes[g], cfg.strategy, cfg.seed);
      heuristics[g] = group_tau_heuristic(run_cloud(*prepared[g], 0), cfg.heuristic_sample, cfg.seed);
    } catch (const Error& e) {
      prepared[g].reset();
      log("skipping k=" + std::to_string(shapes[g].k) + ", n_b=" + std::to_string(shapes[g].n_b) +
          ": " + e.what());
    }
  });

  const std::size_t n_tasks = shapes.size() * taus.size();
  std::vector<std::optional<SweepRow>> rows(n_tasks);
  detail::parallel_for(n_tasks, cfg.threads, [&](std::size_t t) {
    const auto g = t / taus.size();
    const auto tau = taus[t % taus.size()];
    if (!prepared[g])
      return;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      auto cloud = run_cloud(*prepared[g], tau);
      if (cfg.verify)
        if (auto bad = find_mismatch(*prepared[g], cloud))
          throw VerificationError("round trip mismatch for chunk id " + std::to_string(*bad));
      auto row = measure_row(*prepared[g], cloud, tau);
      row.median_swap = heuristics[g];
      row.wall_ms = detail::elapsed_ms(t0);
      rows[t] = std::move(row);
    } catch (const VerificationError&) {
      throw;
    } catch (const Error& e) {
      log("row k=" + std::to_string(shapes[g].k) + ", n_b=" + std::to_string(shapes[g].n_b) +
          ", tau=" + std::to_string(tau) + " skipped: " + e.what());
    }
  });

  for (std::size_t g = 0; g < shapes.size(); ++g) {
    std::vector<const SweepRow*> group;
    for (std::size_t i = 0; i < taus.size(); ++i)
      if (const auto& r = rows[g * taus.size() + i])
        group.push_back(&*r);
    if (!group.empty())
      result.groups.push_back(detail::summarize(group, heuristics[g]));
  }
  for (auto& r : rows)
    if (r)
      result.rows.push_back(std::move(*r));
  return result;
}

inline SweepResult sweep(const ExperimentConfig& cfg) { return sweep(detail::corpus_for(cfg), cfg); }

// ---------------------------------------------------------------------------
// Rendering

inline constexpr std::string_view kCsvSchema = "schema=ygg-sweep-v1";

inline void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kCsvSchema << '\n'
      << "k,n_o_sym,n_b_sym,tau,n_f,n_b_count,r,ucr,ccr,gcr,ucr_formula,ccr_bound,median_swap,"
         "wall_ms\n";
  for (const auto& r : rows)
    out << r.k << ',' << r.n_o << ',' << r.n_b << ',' << r.tau << ',' << r.n_f << ','
        << r.n_b_count << ',' << to_decimal(r.r) << ',' << to_decimal(r.ucr) << ','
        << to_decimal(r.ccr) << ',' << to_decimal(r.gcr) << ',' << to_decimal(r.ucr_formula)
        << ',' << to_decimal(r.ccr_bound) << ',' << r.median_swap << ',' << r.wall_ms << '\n';
}

inline std::string render_summary(const SweepResult& res) {
  std::ostringstream s;
  for (const auto& g : res.groups)
    s << "k=" << g.k << " n_o=" << g.n_o << " n_b=" << g.n_b << ": best tau " << g.best_tau
      << " (gcr " << to_decimal(g.best_gcr) << "), median swap distance " << g.tau_heuristic
      << (g.interior_minimum ? ", interior minimum" : ", minimum at a grid endpoint") << '\n';
  for (const auto& why : res.skipped)
    s << "skipped: " << why << '\n';
  return s.str();
}

} // namespace ygg
