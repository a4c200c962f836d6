#include "bitcipher/common.hpp"
#include "bitcipher/cli.hpp"
#include "bitcipher/conll.hpp"
#include "bitcipher/export.hpp"
#include "bitcipher/manifest.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <regex>
#include <sstream>

using namespace bitcipher;
using namespace testing_support;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

EmbeddingSet small_set() {
  EmbeddingSet s;
  s.vocab = Vocabulary({"alpha", "beta"});
  s.embedding.rows = oracle::gaussian(3, 3, 1);
  return s;
}

}  // namespace

TEST(Export, TextHeaderAndRoundTrip) {
  const auto s = small_set();
  std::stringstream text;
  export_embeddings(text, s.vocab, s.embedding, EmbeddingFormat::Text);
  EXPECT_EQ(first_line(text.str()), "3 3");
  const auto back = import_embeddings(text);
  EXPECT_EQ(back.vocab.tokens(), s.vocab.tokens());
  EXPECT_LT((back.embedding.rows - s.embedding.rows).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Export, BinaryIsExactForFloat32) {
  auto s = small_set();
  s.embedding.rows = s.embedding.rows.cast<float>().cast<double>();
  std::stringstream bin;
  export_embeddings(bin, s.vocab, s.embedding, EmbeddingFormat::Binary);
  EXPECT_EQ(bin.str().substr(0, 4), "BCEM");
  const auto back = import_embeddings(bin);
  EXPECT_EQ(back.vocab.tokens(), s.vocab.tokens());
  EXPECT_EQ(back.embedding.rows, s.embedding.rows);
}

TEST(Export, EscapingRoundTripsAndCollisionsThrow) {
  for (std::string t : {"a b", "tab\there", "back\\slash", "nl\n", "plain"}) {
    EXPECT_EQ(unescape_token(escape_token(t)), t);
    EXPECT_EQ(escape_token(t).find_first_of(" \t\n"), std::string::npos);
  }
  EXPECT_THROW(unescape_token("bad\\q"), InputError);
  EXPECT_THROW(unescape_token("dangling\\"), InputError);

  EmbeddingSet s;
  s.vocab = Vocabulary({"x y", "<oov>"});
  s.embedding.rows = Matrix::Zero(3, 2);
  std::stringstream out;
  EXPECT_THROW(export_embeddings(out, s.vocab, s.embedding, EmbeddingFormat::Text), InputError);
}

TEST(Export, TextWithoutOovGetsZeroRow) {
  std::stringstream in("2 2\nfoo 1 2\nbar 3 4\n");
  const auto s = import_embeddings(in);
  ASSERT_EQ(s.embedding.rows.rows(), 3);
  EXPECT_TRUE(s.embedding.rows.row(2).isZero());
  EXPECT_EQ(s.row_of("bar"), 1u);
}

TEST(Export, ShapeMismatchIsRejected) {
  auto s = small_set();
  s.embedding.rows = Matrix::Zero(5, 3);
  std::stringstream out;
  EXPECT_ANY_THROW(export_embeddings(out, s.vocab, s.embedding, EmbeddingFormat::Text));
}

TEST(Manifest, Sha256OfKnownStrings) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Manifest, JsonRoundTrip) {
  TempDir dir("manifest");
  write_file(dir / "in.txt", "abc");
  Manifest m;
  m.command = "count";
  m.argv = {"count", "in.txt", "-o", "x"};
  m.config = {{"bits", 25}};
  m.add_input(dir / "in.txt");
  m.save(dir / "m.json");
  const auto back = Manifest::load(dir / "m.json");
  EXPECT_EQ(back.to_json(), m.to_json());
  EXPECT_EQ(back.inputs.begin()->second, sha256_hex("abc"));
}

TEST(Cli, CountMatchesGoldenTable) {
  TempDir dir("cli_count");
  const auto out = (dir / "t.freq").string();
  const auto r = cli({"count", (kData / "tiny_corpus.txt").string(), "-o", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(out), read_file(kData / "tiny_corpus.freq"));
  EXPECT_TRUE(fs::exists(out + ".manifest.json"));

  write_gzip(dir / "c.txt.gz", read_file(kData / "tiny_corpus.txt"));
  const auto gz = (dir / "gz.freq").string();
  ASSERT_EQ(cli({"count", (dir / "c.txt.gz").string(), "-o", gz}).code, 0);
  EXPECT_EQ(read_file(gz), read_file(out));
}

TEST(Cli, MissingInputIsUsageError) {
  TempDir dir("cli_missing");
  const auto r = cli({"count", "/nonexistent/corpus.txt", "-o", (dir / "x").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("error"), std::string::npos);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({}).code, kExitUsage);
}

TEST(Cli, EmbedDimensionFollowsModeAndRadius) {
  TempDir dir("cli_embed");
  const auto corpus = (kData / "tiny_corpus.txt").string();
  const auto cat = (dir / "cat.txt").string();
  auto r = cli({"embed", corpus, "-o", cat, "--bits", "25", "--radius", "4", "--mode", "cat"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(first_line(read_file(cat)).find(" 200"), std::string::npos);

  std::string text;
  for (int i = 0; i < 31; ++i) text += "w" + std::to_string(i) + (i % 8 == 7 ? "\n" : " ");
  write_file(dir / "c31.txt", text);
  const auto sum = (dir / "sum.txt").string();
  r = cli({"embed", (dir / "c31.txt").string(), "-o", sum, "--bits", "5", "--mode", "sum"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(read_file(sum)), "32 5");

  r = cli({"embed", (dir / "c31.txt").string(), "-o", sum, "--bits", "4"});
  EXPECT_EQ(r.code, 0) << r.err;  // truncates to capacity and says so
  EXPECT_NE(r.err.find("16 of 31 token types exceed"), std::string::npos) << r.err;
}

TEST(Cli, ManifestsAreReproducible) {
  TempDir dir("cli_repro");
  const auto corpus = (kData / "tiny_corpus.txt").string();
  const auto out = (dir / "e.bin").string();
  const std::vector<std::string> args = {"embed", corpus, "-o", out, "--bits", "8", "--format", "binary",
                                         "--postproc", "--threads", "3"};
  ASSERT_EQ(cli(args).code, 0);
  const auto m1 = read_file(out + ".manifest.json");
  const auto e1 = read_file(out);
  auto args1 = args;
  args1.back() = "1";
  ASSERT_EQ(cli(args1).code, 0);
  EXPECT_EQ(read_file(out), e1);
  ASSERT_EQ(cli(args).code, 0);
  EXPECT_EQ(read_file(out + ".manifest.json"), m1);

  const auto r = cli({"replay", out + ".manifest.json"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("match", 0), 0u) << r.out;
}

TEST(Cli, ProbeReportsAndIsSeeded) {
  TempDir dir("cli_probe");
  const auto emb = (dir / "e.txt").string();
  ASSERT_EQ(cli({"embed", (kData / "tiny_corpus.txt").string(), "-o", emb, "--bits", "6"}).code, 0);
  write_file(dir / "train.conll", "the DT\ncat NN\nsat VB\n\nthe DT\ndog NN\n\n");
  write_file(dir / "test.conll", "the DT\ncat NN\n\n");
  const std::vector<std::string> base = {"probe", emb, "--train", (dir / "train.conll").string(), "--dev",
                                         (dir / "test.conll").string(), "--test",
                                         (dir / "test.conll").string(), "--epochs", "20", "--seed", "7"};
  const auto a = cli(base);
  ASSERT_EQ(a.code, 0) << a.err;
  const std::regex line(R"(^(dev|test): +\d{1,3}\.\d{2} \(\d{1,3}\.\d{2}\)$)");
  std::istringstream lines(a.out);
  int matched = 0;
  for (std::string l; std::getline(lines, l);) matched += std::regex_match(l, line);
  EXPECT_EQ(matched, 2) << a.out;
  EXPECT_EQ(cli(base).out, a.out);

  auto wrong = base;
  wrong.insert(wrong.end(), {"--expect-dim", "99"});
  const auto w = cli(wrong);
  EXPECT_EQ(w.code, kExitUsage);
  EXPECT_NE(w.err.find("--expect-dim"), std::string::npos) << w.err;
}

TEST(Cli, ExportConvertsFormats) {
  TempDir dir("cli_export");
  const auto txt = (dir / "e.txt").string(), bin = (dir / "e.bin").string(), back = (dir / "back.txt").string();
  ASSERT_EQ(cli({"embed", (kData / "tiny_corpus.txt").string(), "-o", txt, "--bits", "6"}).code, 0);
  ASSERT_EQ(cli({"export", txt, "-o", bin, "--format", "binary"}).code, 0);
  ASSERT_EQ(cli({"export", bin, "-o", back, "--format", "text"}).code, 0);
  const auto a = import_embeddings(fs::path(txt)), b = import_embeddings(fs::path(back));
  EXPECT_EQ(a.vocab.tokens(), b.vocab.tokens());
  EXPECT_LT((a.embedding.rows - b.embedding.rows).cwiseAbs().maxCoeff(), 1e-5);
}
