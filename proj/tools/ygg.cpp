// ygg: command line front end for the dual-deduplication pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 verification failure, 3 corrupt store.

#include <ygg/ygg.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ygg;

namespace {

constexpr int kUsage = 1;
constexpr int kVerify = 2;
constexpr int kCorrupt = 3;

struct Shared {
  unsigned k = 8;
  std::size_t chunk_bits = 1024;
  std::size_t base_bits = 960;
  std::size_t tau = 0;
  std::uint64_t seed = 0;
  unsigned sh_bits = 64;
  std::string units = "bits";
  std::string strategy = "uniform";
  std::string out;
};

void add_shape(CLI::App* app, Shared& s) {
  app->add_option("--k", s.k, "Symbol width in bits (1, 2, 4, 8, 16 or 32)");
  app->add_option("--chunk-bits", s.chunk_bits, "Chunk size (n_o) in the chosen units");
  app->add_option("--base-bits", s.base_bits, "Base size (n_b) in the chosen units");
  app->add_option("--sh-bits", s.sh_bits, "Bits charged per file identifier");
  app->add_option("--units", s.units, "How sizes are read: bits or symbols")
      ->check(CLI::IsMember({"bits", "symbols"}));
}

void add_run(CLI::App* app, Shared& s) {
  app->add_option("--tau", s.tau, "Max swap / change-value ops per deviation");
  app->add_option("--seed", s.seed, "RNG seed");
  app->add_option("--strategy", s.strategy, "Deletion strategy: uniform or runbreaking")
      ->check(CLI::IsMember({"uniform", "runbreaking"}));
  app->add_option("--out", s.out, "Output path");
}

Params params_of(const Shared& s) {
  ExperimentConfig cfg;
  cfg.chunk_size = s.chunk_bits;
  cfg.units = parse_units(s.units);
  cfg.s_h = s.sh_bits;
  check_symbol_width(s.k);
  auto shape = resolve_shape(cfg, s.k, s.base_bits);
  if (!shape.params)
    throw InvalidArgument(shape.skip_reason);
  Params p = *shape.params;
  p.tau = s.tau;
  return p;
}

// Base file: what the client ships to the cloud.
//   "YGGB" u8 version, params, u64 count, count x (u64 id, packed base)
constexpr std::string_view kBaseMagic = "YGGB";

Bytes save_bases(const Params& p, const std::vector<std::pair<std::uint64_t, SymbolString>>& bases) {
  io::Writer w;
  w.raw(kBaseMagic);
  w.u8(1);
  io::write_params(w, p);
  w.u64(bases.size());
  for (const auto& [id, b] : bases) {
    w.u64(id);
    w.raw(pack(b));
  }
  return w.take();
}

std::pair<Params, std::vector<std::pair<std::uint64_t, SymbolString>>> load_bases(
    std::span<const Byte> bytes) {
  io::Reader r(bytes);
  r.expect_magic(kBaseMagic, 1);
  const Params p = io::read_params(r);
  const auto each = 8 + packed_size(p.n_b, p.k);
  const auto n = r.count(each, "base count");
  std::vector<std::pair<std::uint64_t, SymbolString>> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto id = r.u64("base id");
    out.emplace_back(id, unpack(r.raw(each - 8, "packed base"), p.k, p.n_b));
  }
  r.expect_end();
  return {p, std::move(out)};
}

Corpus read_input(const fs::path& in) {
  if (fs::is_directory(in))
    return load_corpus(in);
  Corpus c;
  c.files.push_back({in.filename().string(), io::read_file(in)});
  return c;
}

std::string grouped(const BigInt& v) {
  const std::string d = v.str();
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i > 0 && (d.size() - i) % 3 == 0)
      out.push_back(',');
    out.push_back(d[i]);
  }
  return out;
}

// Decimal digits only; cpp_int's string constructor would read "025" as octal.
BigInt parse_digits(const std::string& s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw InvalidArgument("not a non-negative integer: \"" + s + "\"");
  BigInt v = 0;
  for (char c : s)
    v = v * 10 + (c - '0');
  return v;
}

Rational parse_fraction(const std::string& s) {
  try {
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      const BigInt den = parse_digits(s.substr(slash + 1));
      if (den == 0)
        throw InvalidArgument("zero denominator");
      return Rational(parse_digits(s.substr(0, slash))) / Rational(den);
    }
    const auto dot = s.find('.');
    if (dot == std::string::npos)
      return Rational(parse_digits(s));
    const std::string whole = dot == 0 ? "0" : s.substr(0, dot);
    const std::string frac = s.substr(dot + 1);
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i)
      scale *= 10;
    return Rational(parse_digits(whole + frac)) / Rational(scale);
  } catch (const InvalidArgument&) {
    throw InvalidArgument("cannot parse \"" + s + "\" as a fraction");
  }
}

// "0,8,16" or "0:8:64" (start:step:stop) or a mix: "0,4:4:32,64".
std::vector<std::size_t> parse_grid(const std::string& spec) {
  std::vector<std::size_t> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty())
      continue;
    try {
      const auto c1 = item.find(':');
      if (c1 == std::string::npos) {
        out.push_back(std::stoull(item));
        continue;
      }
      const auto c2 = item.find(':', c1 + 1);
      if (c2 == std::string::npos)
        throw InvalidArgument("range needs start:step:stop");
      const auto start = std::stoull(item.substr(0, c1));
      const auto step = std::stoull(item.substr(c1 + 1, c2 - c1 - 1));
      const auto stop = std::stoull(item.substr(c2 + 1));
      if (step == 0)
        throw InvalidArgument("range step must be positive");
      for (auto v = start; v <= stop; v += step)
        out.push_back(v);
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad grid entry \"" + item + "\"");
    }
  }
  return out;
}

void write_output(const std::string& path, std::span<const Byte> bytes) {
  if (path.empty() || path == "-")
    std::cout.write(reinterpret_cast<const char*>(bytes.data()),
                    static_cast<std::streamsize>(bytes.size()));
  else
    io::write_file(path, bytes);
}

// ---------------------------------------------------------------------------

int cmd_gen(const SyntheticCorpusSpec& spec, const std::string& out) {
  auto bytes = synthesize_corpus(spec);
  write_output(out, bytes);
  if (!out.empty() && out != "-")
    std::cerr << "wrote " << bytes.size() << " bytes to " << out << '\n';
  return 0;
}

int cmd_upload(const Shared& s, const std::string& in, const std::string& client_path) {
  const Params p = params_of(s);
  const auto corpus = read_input(in);
  auto pc = prepare_client(corpus, p, parse_strategy(s.strategy), s.seed);
  std::vector<std::pair<std::uint64_t, SymbolString>> bases;
  for (auto& c : pc.chunks)
    bases.emplace_back(c.id, std::move(c.base));
  io::write_file(client_path, pc.client.save());
  io::write_file(s.out.empty() ? "bases.ygb" : s.out, save_bases(p, bases));
  std::cout << "uploaded " << bases.size() << " chunks from " << corpus.files.size()
            << " file(s); client store " << client_path << '\n';
  return 0;
}

int cmd_compress(const Shared& s, const std::string& bases_path, const std::string& cloud_path) {
  auto [p, bases] = load_bases(io::read_file(bases_path));
  auto cloud = fs::exists(cloud_path) ? CloudStore::load(io::read_file(cloud_path)) : CloudStore(p);
  if (cloud.params().k != p.k || cloud.params().n_o != p.n_o || cloud.params().n_b != p.n_b)
    throw InvalidArgument("base file shape does not match the cloud store");
  cloud.set_tau(s.tau);
  for (const auto& [id, b] : bases)
    cloud.compress(id, b);
  io::write_file(cloud_path, cloud.save());
  std::cout << "compressed " << bases.size() << " bases; store holds " << cloud.bases().size()
            << " bases for " << cloud.records().size() << " records\n";
  return 0;
}

SymbolString fetch(const ClientStore& client, const CloudStore& cloud, std::uint64_t id) {
  auto resp = cloud.decompress(id);
  if (!resp)
    throw NotFound("cloud store has no record for id " + std::to_string(id));
  return client.get(id, *resp);
}

int cmd_get(const std::string& client_path, const std::string& cloud_path,
            std::optional<std::uint64_t> id, const std::string& file, const std::string& out) {
  const auto client = ClientStore::load(io::read_file(client_path));
  const auto cloud = CloudStore::load(io::read_file(cloud_path));
  if (id) {
    write_output(out, pack(fetch(client, cloud, *id)));
    return 0;
  }
  auto it = client.files().find(file);
  if (it == client.files().end())
    throw NotFound("client store has no file \"" + file + "\"");
  ChunkedFile cf;
  cf.original_bit_length = it->second.original_bit_length;
  for (auto cid : it->second.chunk_ids)
    cf.chunks.push_back(fetch(client, cloud, cid));
  write_output(out, dechunk(cf));
  return 0;
}

int cmd_ratios(const Shared& s, const std::string& r_text, const std::string& client_path,
               const std::string& cloud_path) {
  if (!client_path.empty() || !cloud_path.empty()) {
    if (client_path.empty() || cloud_path.empty())
      throw InvalidArgument("measured ratios need both --client and --cloud");
    const auto client = ClientStore::load(io::read_file(client_path));
    const auto cloud = CloudStore::load(io::read_file(cloud_path));
    const auto db = std::uint64_t{client.records().size()} * client.params().original_bits();
    const auto m = measured_ratios(client.storage_bits(), cloud.storage_bits(), db);
    std::cout << "measured  UCR " << to_decimal(m.ucr) << "  CCR " << to_decimal(m.ccr) << "  GCR "
              << to_decimal(m.gcr) << "  (N_f " << cloud.records().size() << ", N_b "
              << cloud.bases().size() << ")\n";
    return 0;
  }
  const Params p = params_of(s);
  const Rational r = parse_fraction(r_text);
  const auto u = ucr_formula(p);
  const auto c = ccr_formula(p, r);
  std::cout << "k=" << p.k << " n_o=" << p.n_o << " n_b=" << p.n_b << " tau=" << p.tau
            << " s_h=" << p.s_h << " r=" << to_decimal(r) << '\n'
            << "UCR " << to_decimal(u.value) << (u.below_one ? "  (< 1)" : "  (>= 1)") << '\n'
            << "CCR " << to_decimal(c.value) << (c.at_most_one ? "  (<= 1)" : "  (> 1)") << '\n'
            << "GCR " << to_decimal(gcr_formula(p, r)) << '\n';
  if (c.r_threshold)
    std::cout << "CCR <= 1 iff r " << (c.threshold_is_lower ? ">= " : "<= ")
              << to_decimal(*c.r_threshold) << '\n';
  return 0;
}

int cmd_uncertainty(const Shared& s, bool table, bool exact) {
  auto show = [&](unsigned k, std::size_t n_b, std::size_t n_o) {
    const auto rep = uncertainty(k, n_o, n_b);
    std::cout << "k=" << k << " n_b=" << n_b << " n_o=" << n_o << "  U_p = ";
    if (exact || rep.n_preimages < BigInt("1000000000000000000000000000000"))
      std::cout << grouped(rep.n_preimages) << " (" << rep.preimages_sci.str() << ")";
    else
      std::cout << rep.preimages_sci.str();
    std::cout << "  uncertainty " << rep.u_sci.str() << "  lower bound "
              << to_scientific(rep.lower_bound).str() << '\n';
  };
  if (table) {
    for (auto [n_b, n_o] : {std::pair<std::size_t, std::size_t>{10, 15}, {100, 150}, {500, 1000}})
      for (unsigned k : {2u, 4u, 8u})
        show(k, n_b, n_o);
    return 0;
  }
  const Params p = params_of(s);
  show(p.k, p.n_b, p.n_o);
  return 0;
}

int cmd_sweep(const Shared& s, const std::string& ks, const std::string& base_grid,
              const std::string& taus, const std::string& corpus_dir,
              const SyntheticCorpusSpec& synth, bool verify, unsigned threads) {
  ExperimentConfig cfg;
  cfg.chunk_size = s.chunk_bits;
  cfg.units = parse_units(s.units);
  cfg.s_h = s.sh_bits;
  cfg.strategy = parse_strategy(s.strategy);
  cfg.seed = s.seed;
  cfg.verify = verify;
  cfg.threads = threads;
  cfg.synthetic = synth;
  if (!corpus_dir.empty())
    cfg.corpus_dir = corpus_dir;
  cfg.ks.clear();
  for (auto k : parse_grid(ks))
    cfg.ks.push_back(static_cast<unsigned>(k));
  cfg.base_sizes = parse_grid(base_grid);
  cfg.taus = parse_grid(taus);
  cfg.validate();
  const auto res = sweep(cfg);
  if (s.out.empty() || s.out == "-") {
    write_csv(std::cout, res.rows);
  } else {
    std::ofstream f(s.out);
    write_csv(f, res.rows);
    if (!f)
      throw InvalidArgument("cannot write " + s.out);
  }
  std::cerr << render_summary(res);
  return 0;
}

int cmd_verify(const std::string& client_path, const std::string& cloud_path,
               const std::string& corpus) {
  const auto client = ClientStore::load(io::read_file(client_path));
  const auto cloud = CloudStore::load(io::read_file(cloud_path));
  std::optional<Corpus> originals;
  if (!corpus.empty())
    originals = read_input(corpus);
  std::size_t chunks = 0;
  for (const auto& [name, entry] : client.files()) {
    ChunkedFile cf;
    cf.original_bit_length = entry.original_bit_length;
    for (auto id : entry.chunk_ids) {
      auto resp = cloud.decompress(id);
      if (!resp)
        throw VerificationError("cloud store has no record for chunk id " + std::to_string(id));
      cf.chunks.push_back(client.get(id, *resp));
      ++chunks;
    }
    const auto bytes = dechunk(cf);
    if (originals) {
      auto it = std::find_if(originals->files.begin(), originals->files.end(),
                             [&](const CorpusFile& f) { return f.name == name; });
      if (it == originals->files.end())
        throw VerificationError("file \"" + name + "\" is missing from the corpus");
      if (it->data != bytes)
        throw VerificationError("file \"" + name + "\" does not round trip");
    }
  }
  std::cout << "verified " << client.files().size() << " file(s), " << chunks << " chunks\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-aware dual deduplication: client transforms, cloud generalized "
               "deduplication, ratio and uncertainty analysis"};
  app.require_subcommand(1);
  Shared s;

  SyntheticCorpusSpec synth;
  double mutation = -1;
  auto add_synth = [&](CLI::App* a) {
    a->add_option("--lines", synth.lines, "Log lines to generate");
    a->add_option("--templates", synth.templates, "Distinct line templates");
    a->add_option("--skew", synth.template_skew, "Zipf exponent of template popularity");
    a->add_option("--mutation", mutation, "Set every per-field mutation rate")
        ->check(CLI::Range(0.0, 1.0));
    a->add_option("--record-bytes", synth.record_bytes, "Pad lines to this width (0: natural)");
  };

  auto* gen = app.add_subcommand("gen", "Write a synthetic HDFS-style log corpus");
  add_synth(gen);
  gen->add_option("--seed", synth.seed, "RNG seed");
  gen->add_option("--out", s.out, "Output file (stdout if omitted)");

  std::string in, client_path = "client.ygc", cloud_path = "cloud.ygs", bases_path = "bases.ygb";
  auto* upload = app.add_subcommand("upload", "Client side: chunk, delete, write bases + client store");
  add_shape(upload, s);
  add_run(upload, s);
  upload->add_option("--in", in, "Input file or directory")->required();
  upload->add_option("--client", client_path, "Client store to write");

  auto* compress = app.add_subcommand("compress", "Cloud side: deduplicate a base file into a store");
  add_run(compress, s);
  compress->add_option("--bases", bases_path, "Base file from upload");
  compress->add_option("--cloud", cloud_path, "Cloud store (created if missing)");

  std::optional<std::uint64_t> get_id;
  std::string get_file;
  auto* get = app.add_subcommand("get", "Reconstruct a chunk (--id) or a whole file (--file)");
  get->add_option("--client", client_path, "Client store");
  get->add_option("--cloud", cloud_path, "Cloud store");
  auto* id_opt = get->add_option("--id", get_id, "Chunk id; writes the packed chunk");
  auto* file_opt = get->add_option("--file", get_file, "File name as stored by upload");
  id_opt->excludes(file_opt);
  get->add_option("--out", s.out, "Output file (stdout if omitted)");

  std::string r_text = "1", ratio_client, ratio_cloud;
  auto* ratios = app.add_subcommand("ratios", "Closed-form or measured compression ratios");
  add_shape(ratios, s);
  ratios->add_option("--tau", s.tau, "Ops charged per deduplicated string");
  ratios->add_option("--r", r_text, "Base fraction N_b/N_f, e.g. 0.25 or 1/4");
  ratios->add_option("--client", ratio_client, "Client store (measured mode)");
  ratios->add_option("--cloud", ratio_cloud, "Cloud store (measured mode)");

  bool table = false, exact = false;
  auto* unc = app.add_subcommand("uncertainty", "Preimage counts and the uncertainty metric");
  add_shape(unc, s);
  unc->add_flag("--table", table, "Regenerate the nine-row reference table");
  unc->add_flag("--exact", exact, "Always print every digit");

  std::string ks, base_grid, taus = "0,8,12,16,20,24,28,32,40,48,64,96,120",
              corpus_dir;
  bool verify = false;
  unsigned threads = 1;
  auto* sw = app.add_subcommand("sweep", "Run the pipeline over a (k, n_b, tau) grid, emit CSV");
  add_shape(sw, s);
  add_run(sw, s);
  add_synth(sw);
  auto* ks_opt = sw->add_option("--ks", ks, "Grid of k values, e.g. 2,4,8 (default: --k)");
  auto* bg_opt = sw->add_option("--bases-grid", base_grid,
                                "Grid of base sizes, e.g. 896:32:992 (default: --base-bits)");
  sw->add_option("--taus", taus, "Grid of tau values, e.g. 0:8:64");
  sw->add_option("--corpus", corpus_dir, "Corpus directory (synthetic corpus if omitted)");
  sw->add_flag("--verify", verify, "Round-trip every chunk of every run");
  sw->add_option("--threads", threads, "Worker threads over grid points");

  std::string verify_corpus;
  auto* ver = app.add_subcommand("verify", "Audit a client + cloud store pair end to end");
  ver->add_option("--client", client_path, "Client store");
  ver->add_option("--cloud", cloud_path, "Cloud store");
  ver->add_option("--corpus", verify_corpus, "Original file or directory to compare against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  if (mutation >= 0)
    synth.timestamp_rate = synth.block_rate = synth.host_rate = mutation;

  try {
    if (gen->parsed())
      return cmd_gen(synth, s.out);
    if (upload->parsed())
      return cmd_upload(s, in, client_path);
    if (compress->parsed())
      return cmd_compress(s, bases_path, cloud_path);
    if (get->parsed()) {
      if (!get_id && get_file.empty())
        throw InvalidArgument("get needs --id or --file");
      return cmd_get(client_path, cloud_path, get_id, get_file, s.out);
    }
    if (ratios->parsed())
      return cmd_ratios(s, r_text, ratio_client, ratio_cloud);
    if (unc->parsed())
      return cmd_uncertainty(s, table, exact);
    if (sw->parsed()) {
      if (ks_opt->count() == 0)
        ks = std::to_string(s.k);
      if (bg_opt->count() == 0)
        base_grid = std::to_string(s.base_bits);
    }
    if (sw->parsed())
      return cmd_sweep(s, ks, base_grid, taus, corpus_dir, synth, verify, threads);
    if (ver->parsed())
      return cmd_verify(client_path, cloud_path, verify_corpus);
  } catch (const VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return kVerify;
  } catch (const CorruptionError& e) {
    std::cerr << "corrupt store: " << e.what() << '\n';
    return kCorrupt;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
