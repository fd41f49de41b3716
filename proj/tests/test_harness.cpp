#include <ygg/harness.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace ygg;

namespace {

SyntheticCorpusSpec small_spec(std::size_t lines = 2000) {
  SyntheticCorpusSpec s;
  s.lines = lines;
  s.seed = 7;
  return s;
}

Corpus as_corpus(Bytes data) {
  Corpus c;
  c.files.push_back({"data", std::move(data)});
  return c;
}

ExperimentConfig quiet_config() {
  ExperimentConfig cfg;
  cfg.log = [](const std::string&) {};
  cfg.synthetic = small_spec();
  return cfg;
}

} // namespace

TEST(Synthetic, Deterministic) {
  EXPECT_EQ(synthesize_corpus(small_spec()), synthesize_corpus(small_spec()));
  auto other = small_spec();
  other.seed = 8;
  EXPECT_NE(synthesize_corpus(small_spec()), synthesize_corpus(other));
}

TEST(Synthetic, FixedRecordLength) {
  const auto bytes = synthesize_corpus(small_spec(500));
  ASSERT_EQ(bytes.size(), 500u * 128);
  for (std::size_t i = 127; i < bytes.size(); i += 128)
    EXPECT_EQ(bytes[i], '\n');
  EXPECT_GE(SyntheticCorpusSpec{}.lines * SyntheticCorpusSpec{}.record_bytes, 10'000'000u);
}

TEST(Synthetic, ZeroRatesRepeatTemplates) {
  auto s = small_spec(1000);
  s.timestamp_rate = s.block_rate = s.host_rate = 0.0;
  const auto bytes = synthesize_corpus(s);
  std::set<std::string> lines;
  for (std::size_t i = 0; i < bytes.size(); i += 128)
    lines.emplace(bytes.begin() + static_cast<std::ptrdiff_t>(i),
                  bytes.begin() + static_cast<std::ptrdiff_t>(i + 128));
  EXPECT_LE(lines.size(), s.templates);
}

TEST(Synthetic, MutationAddsBases) {
  auto fixed = small_spec(1500);
  fixed.timestamp_rate = fixed.block_rate = fixed.host_rate = 0.0;
  auto cfg = quiet_config();
  // Canonical bases, so a repeated line always yields the same base.
  cfg.strategy = DeletionStrategy::RunBreaking;
  const auto a = run_pipeline(as_corpus(synthesize_corpus(fixed)), cfg, 8, 960, 0);
  const auto b = run_pipeline(as_corpus(synthesize_corpus(small_spec(1500))), cfg, 8, 960, 0);
  EXPECT_LE(a.n_b_count, fixed.templates);
  EXPECT_LT(Rational(a.n_b_count, a.n_f), Rational(b.n_b_count, b.n_f));
}

TEST(Synthetic, InvalidSpecs) {
  auto s = small_spec();
  s.block_rate = 1.5;
  EXPECT_THROW(synthesize_corpus(s), InvalidArgument);
  s = small_spec();
  s.templates = 0;
  EXPECT_THROW(synthesize_corpus(s), InvalidArgument);
  s = small_spec();
  s.record_bytes = 10;
  EXPECT_THROW(synthesize_corpus(s), InvalidArgument);
}

TEST(Config, ResolveShape) {
  auto cfg = quiet_config();
  const auto ok = resolve_shape(cfg, 8, 960);
  ASSERT_TRUE(ok.params);
  EXPECT_EQ(ok.params->n_o, 128u);
  EXPECT_EQ(ok.params->n_b, 120u);
  EXPECT_FALSE(resolve_shape(cfg, 16, 952).params);  // not a whole symbol count
  EXPECT_FALSE(resolve_shape(cfg, 8, 2048).params);  // base longer than the chunk
  cfg.units = SizeUnits::Symbols;
  EXPECT_EQ(resolve_shape(cfg, 8, 960).params->n_o, 1024u);
  EXPECT_THROW(parse_units("bytes"), InvalidArgument);
  cfg.taus.clear();
  EXPECT_THROW(sweep(as_corpus({1, 2, 3}), cfg), InvalidArgument);
}

TEST(Pipeline, UniqueRandomChunksAllBecomeBases) {
  Rng rng(1);
  Bytes data(64 * 200);
  for (auto& b : data)
    b = static_cast<Byte>(rng.below(256));
  auto cfg = quiet_config();
  cfg.chunk_size = 512;
  cfg.verify = true;
  const auto row = run_pipeline(as_corpus(data), cfg, 8, 480, 0);
  EXPECT_EQ(row.n_f, 200u);
  EXPECT_EQ(row.n_b_count, row.n_f);
  EXPECT_EQ(row.r, 1);
}

TEST(Pipeline, DuplicateChunksShareOneBase) {
  // Identical runs of one byte: every deletion pattern leaves the same base.
  Bytes data(128 * 50, 'a');
  auto cfg = quiet_config();
  cfg.verify = true;
  const auto row = run_pipeline(as_corpus(data), cfg, 8, 960, 0);
  EXPECT_EQ(row.n_f, 50u);
  EXPECT_EQ(row.n_b_count, 1u);
  Params p;
  p.k = 8;
  p.n_o = 128;
  p.n_b = 120;
  p.s_h = 64;
  // One base, and per record an id plus a one-bit pointer.
  EXPECT_EQ(row.cloud_bits, 960u + 50u * (64 + 1));
  EXPECT_EQ(row.ucr, ucr_formula(p).value);
}

TEST(Pipeline, VerifyCatchesTampering) {
  const auto corpus = as_corpus(synthesize_corpus(small_spec(300)));
  Params p;
  p.k = 8;
  p.n_o = 128;
  p.n_b = 120;
  auto pc = prepare_client(corpus, p, DeletionStrategy::UniformRandom, 1);
  const auto cloud = run_cloud(pc, 8);
  EXPECT_FALSE(find_mismatch(pc, cloud));
  auto& victim = pc.chunks[17].original;
  std::vector<Symbol> v(victim.begin(), victim.end());
  v[0] ^= 1;
  victim = SymbolString(8, v);
  EXPECT_EQ(find_mismatch(pc, cloud), pc.chunks[17].id);
}

TEST(Sweep, RatiosAndConservation) {
  auto cfg = quiet_config();
  cfg.taus = {0, 4, 16, 64};
  cfg.strategy = DeletionStrategy::RunBreaking;
  cfg.verify = true;
  const auto res = sweep(as_corpus(synthesize_corpus(small_spec())), cfg);
  ASSERT_EQ(res.rows.size(), 4u);
  ASSERT_EQ(res.groups.size(), 1u);
  EXPECT_TRUE(res.groups[0].ucr_constant);
  for (const auto& r : res.rows) {
    EXPECT_EQ(r.gcr, r.ucr + r.ccr);
    EXPECT_EQ(r.ucr, res.rows[0].ucr);
    EXPECT_EQ(r.ucr, r.ucr_formula);  // homogeneous store, same s_h
    EXPECT_LE(r.cloud_bits, r.bound_bits);
    EXPECT_LE(r.max_deviation_ops, r.tau);
  }
  EXPECT_EQ(res.rows[0].n_b_count, run_pipeline(as_corpus(synthesize_corpus(small_spec())), cfg,
                                                8, 960, 0)
                                       .n_b_count);
}

TEST(Sweep, ThreadCountDoesNotChangeRows) {
  auto cfg = quiet_config();
  cfg.ks = {4, 8};
  cfg.base_sizes = {896, 960};
  cfg.taus = {0, 8, 32};
  const auto corpus = as_corpus(synthesize_corpus(small_spec(800)));
  const auto one = sweep(corpus, cfg);
  cfg.threads = 4;
  const auto four = sweep(corpus, cfg);
  ASSERT_EQ(one.rows.size(), 12u);
  ASSERT_EQ(one.rows.size(), four.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    EXPECT_EQ(one.rows[i].k, four.rows[i].k);
    EXPECT_EQ(one.rows[i].tau, four.rows[i].tau);
    EXPECT_EQ(one.rows[i].gcr, four.rows[i].gcr);
    EXPECT_EQ(one.rows[i].median_swap, four.rows[i].median_swap);
  }
}

TEST(Sweep, SkipsBadShapes) {
  auto cfg = quiet_config();
  cfg.ks = {8, 16};
  cfg.base_sizes = {968};
  const auto res = sweep(as_corpus(synthesize_corpus(small_spec(200))), cfg);
  EXPECT_EQ(res.rows.size(), 1u);
  EXPECT_EQ(res.skipped.size(), 1u);
}

TEST(Output, CsvHeader) {
  auto cfg = quiet_config();
  const auto res = sweep(as_corpus(synthesize_corpus(small_spec(200))), cfg);
  std::ostringstream out;
  write_csv(out, res.rows);
  std::istringstream in(out.str());
  std::string schema, header, row;
  std::getline(in, schema);
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(schema, kCsvSchema);
  EXPECT_EQ(header,
            "k,n_o_sym,n_b_sym,tau,n_f,n_b_count,r,ucr,ccr,gcr,ucr_formula,ccr_bound,median_swap,"
            "wall_ms");
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 13);
  EXPECT_NE(render_summary(res).find("best tau"), std::string::npos);
}

TEST(Corpus, LoadDirectory) {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "ygg_corpus_test";
  fs::remove_all(dir);
  fs::create_directories(dir / "sub");
  io::write_file(dir / "b.log", Bytes{1, 2});
  io::write_file(dir / "sub" / "a.log", Bytes{3});
  const auto c = load_corpus(dir);
  ASSERT_EQ(c.files.size(), 2u);
  EXPECT_EQ(c.files[0].name, "b.log");
  EXPECT_EQ(c.files[1].name, "sub/a.log");
  EXPECT_EQ(c.total_bytes(), 3u);
  fs::remove_all(dir);
  EXPECT_THROW(load_corpus(dir), InvalidArgument);
}
