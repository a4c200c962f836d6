#include "bitcipher/common.hpp"
#include "bitcipher/frequency.hpp"
#include "bitcipher/tokenizer.hpp"
#include "bitcipher/vocabulary.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

using namespace bitcipher;
using namespace testing_support;

namespace {

FrequencyTable count(const std::vector<std::vector<std::string>>& docs, unsigned threads = 1) {
  return count_frequencies(std::span<const std::vector<std::string>>(docs), threads);
}

std::vector<std::vector<std::string>> random_docs(std::size_t n_docs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(0, 30), word(0, 40);
  std::vector<std::vector<std::string>> docs(n_docs);
  for (auto& d : docs) {
    const int n = len(rng);
    for (int i = 0; i < n; ++i) d.push_back("w" + std::to_string(word(rng) * word(rng) / 40));
  }
  return docs;
}

}  // namespace

TEST(Tokenizer, SplitsPunctuationAndLowercases) {
  const auto toks = stream_tokens("The cat sat.");
  const std::vector<DocToken> want = {{0, "the"}, {0, "cat"}, {0, "sat"}, {0, "."}};
  EXPECT_EQ(toks, want);
}

TEST(Tokenizer, EmptyInputIsEmptyStream) {
  EXPECT_TRUE(stream_tokens("").empty());
  EXPECT_TRUE(stream_tokens("\n\n  \n").empty());
}

TEST(Tokenizer, EachLineIsADocument) {
  const auto toks = stream_tokens("a b\nb c");
  ASSERT_EQ(toks.size(), 4u);
  EXPECT_EQ(toks[0].doc, 0u);
  EXPECT_EQ(toks[1].doc, 0u);
  EXPECT_EQ(toks[2].doc, 1u);
  EXPECT_EQ(toks[3].doc, 1u);
}

TEST(Tokenizer, BlankLineBoundaryGroupsBlocks) {
  TokenizerConfig cfg;
  cfg.boundary = DocumentBoundary::BlankLine;
  const auto docs = read_documents(std::string_view("a b\nc\n\n\nd\n"), cfg);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0], (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(docs[1], (std::vector<std::string>{"d"}));
}

TEST(Tokenizer, BlankLinesDoNotConsumeDocumentIds) {
  const auto toks = stream_tokens("x\n\ny\n");
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[1].doc, 1u);
}

TEST(Tokenizer, FlagsKeepCaseAndPunctuation) {
  TokenizerConfig cfg;
  cfg.lowercase = false;
  cfg.split_punctuation = false;
  std::vector<std::string> out;
  tokenize_line("Hello, World!", cfg, out);
  EXPECT_EQ(out, (std::vector<std::string>{"Hello,", "World!"}));
}

TEST(Tokenizer, MultibyteTextPassesThrough) {
  std::vector<std::string> out;
  tokenize_line("Café NAÏVE", {}, out);
  EXPECT_EQ(out, (std::vector<std::string>{"café", "naÏve"}));
}

TEST(Tokenizer, InvalidUtf8ReportsByteOffset) {
  EXPECT_EQ(find_invalid_utf8("ok"), std::nullopt);
  EXPECT_EQ(find_invalid_utf8("ab\xff"), 2u);
  EXPECT_EQ(find_invalid_utf8("\xc3\xa9x\xc3"), 3u);  // truncated sequence
  EXPECT_EQ(find_invalid_utf8("\xc0\x80"), 0u);       // overlong NUL
  try {
    stream_tokens("fine\nbad \xfe here\n");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset 9"), std::string::npos) << e.what();
  }
}

TEST(Tokenizer, GzipIsTransparent) {
  TempDir dir("tok_gz");
  const std::string text = read_file(kData / "tiny_corpus.txt");
  write_file(dir / "plain.txt", text);
  write_gzip(dir / "packed.txt.gz", text);
  EXPECT_EQ(read_documents(dir / "plain.txt"), read_documents(dir / "packed.txt.gz"));
  EXPECT_EQ(read_documents(dir / "plain.txt"), read_documents(std::string_view(text)));
}

TEST(Counting, HandExample) {
  const std::vector<DocToken> stream = {{0, "a"}, {0, "a"}, {1, "a"}, {1, "b"}};
  const auto t = count_frequencies(stream);
  EXPECT_EQ(t.find("a"), (TokenCounts{3, 2}));
  EXPECT_EQ(t.find("b"), (TokenCounts{1, 1}));
  EXPECT_EQ(t.total_tokens(), 4u);
  EXPECT_EQ(t.total_documents(), 2u);
}

TEST(Counting, SingleToken) {
  const std::vector<DocToken> stream = {{0, "x"}};
  const auto t = count_frequencies(stream);
  EXPECT_EQ(t.find("x"), (TokenCounts{1, 1}));
  EXPECT_EQ(t.total_tokens(), 1u);
}

TEST(Counting, EmptyStream) {
  const auto t = count_frequencies(std::span<const DocToken>{});
  EXPECT_EQ(t.distinct(), 0u);
  EXPECT_EQ(t.total_tokens(), 0u);
  EXPECT_EQ(t.total_documents(), 0u);
}

TEST(Counting, MatchesBruteForceRecount) {
  const auto docs = random_docs(10, 77);
  std::map<std::string, std::uint64_t> f, d;
  std::uint64_t m = 0;
  for (const auto& doc : docs) {
    for (const auto& t : doc) ++f[t];
    for (const auto& t : std::set<std::string>(doc.begin(), doc.end())) ++d[t];
    m += doc.size();
  }
  const auto t = count(docs);
  ASSERT_EQ(t.distinct(), f.size());
  for (const auto& [tok, n] : f) EXPECT_EQ(t.find(tok), (TokenCounts{n, d[tok]})) << tok;
  EXPECT_EQ(t.total_tokens(), m);
  EXPECT_EQ(t.total_documents(), 10u);
}

TEST(Counting, TableInvariantsHold) {
  const auto t = count(random_docs(200, 3));
  std::uint64_t sum = 0;
  for (const auto& [tok, c] : t.counts()) {
    EXPECT_LE(1u, c.document_count);
    EXPECT_LE(c.document_count, c.frequency);
    EXPECT_LE(c.frequency, t.total_tokens());
    EXPECT_LE(c.document_count, t.total_documents());
    sum += c.frequency;
  }
  EXPECT_EQ(sum, t.total_tokens());
}

TEST(Counting, ShardMergeEqualsSinglePass) {
  const auto docs = random_docs(300, 11);
  const auto whole = count(docs);
  for (std::size_t cut : {0, 1, 150, 299, 300}) {
    FrequencyTable merged = count({docs.begin(), docs.begin() + cut});
    merged.merge(count({docs.begin() + cut, docs.end()}));
    EXPECT_EQ(merged, whole) << "cut " << cut;
  }
  // merge order does not matter
  FrequencyTable a = count({docs.begin(), docs.begin() + 100});
  FrequencyTable b = count({docs.begin() + 100, docs.end()});
  FrequencyTable ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  EXPECT_EQ(ab, ba);
}

TEST(Counting, ThreadCountInvariant) {
  const auto docs = random_docs(500, 5);
  const auto one = count(docs, 1);
  for (unsigned threads : {2u, 3u, 8u, 64u}) EXPECT_EQ(count(docs, threads), one) << threads;
}

TEST(Counting, SaveLoadRoundTrip) {
  const auto t = count(random_docs(50, 9));
  std::stringstream s;
  t.save(s);
  EXPECT_EQ(FrequencyTable::load(s), t);
}

TEST(Counting, LoadRejectsMalformedRows) {
  std::stringstream s("#M=3 D=1\na\t3\n");
  EXPECT_THROW(FrequencyTable::load(s), InputError);
  std::stringstream no_header("a\t1\t1\n");
  EXPECT_THROW(FrequencyTable::load(no_header), InputError);
}

TEST(Counting, MatchesGoldenFromIndependentCounter) {
  const auto t = count(read_documents(kData / "tiny_corpus.txt"));
  std::ostringstream s;
  t.save(s);
  EXPECT_EQ(s.str(), read_file(kData / "tiny_corpus.freq"));
}

TEST(Vocabulary, TiesBreakLexicographically) {
  FrequencyTable t;
  t.set("c", {3, 1});
  t.set("a", {5, 1});
  t.set("b", {3, 1});
  t.set_totals(11, 1);
  const auto v = build_vocabulary(t, 5);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(v.rank_of("b"), 2u);
  EXPECT_EQ(v.rank_of("zzz"), v.oov_rank());
  EXPECT_EQ(v.oov_rank(), 4u);
}

TEST(Vocabulary, FiveBitsHoldThirtyOneTokens) {
  FrequencyTable t;
  for (int i = 0; i < 40; ++i) t.set("t" + std::to_string(100 + i), {static_cast<std::uint64_t>(100 - i), 1});
  t.set_totals(4000, 1);
  const auto v = build_vocabulary(t, 5);
  EXPECT_EQ(v.size(), 31u);
  EXPECT_EQ(v.truncated(), 9u);
  EXPECT_TRUE(v.contains("t130"));
  for (int i = 31; i < 40; ++i) {
    EXPECT_EQ(v.rank_of("t" + std::to_string(100 + i)), v.oov_rank());
  }
}

TEST(Vocabulary, MaxVocabCaps) {
  FrequencyTable t;
  t.set("x", {3, 1});
  t.set("y", {2, 1});
  t.set("z", {1, 1});
  t.set_totals(6, 1);
  const auto v = build_vocabulary(t, 8, 2);
  EXPECT_EQ(v.size(), 2u);
  EXPECT_FALSE(v.contains("z"));
}

TEST(Vocabulary, EmptyVocabularyIsAnError) {
  FrequencyTable empty;
  EXPECT_THROW(build_vocabulary(empty, 5), InputError);
  FrequencyTable one;
  one.set("x", {1, 1});
  one.set_totals(1, 1);
  EXPECT_THROW(build_vocabulary(one, 0), InputError);
  EXPECT_THROW(build_vocabulary(one, 5, 0), InputError);
}

TEST(Vocabulary, CapacityNeverExceeded) {
  const auto t = count(random_docs(400, 21));
  for (unsigned b = 1; b <= 12; ++b) {
    const auto v = build_vocabulary(t, b);
    EXPECT_LE(v.size(), cipher_capacity(b));
    EXPECT_EQ(v.size(), std::min<std::size_t>(t.distinct(), cipher_capacity(b)));
  }
  EXPECT_EQ(cipher_capacity(64), ~std::uint64_t{0});
  EXPECT_EQ(cipher_capacity(200), ~std::uint64_t{0});
}

TEST(Vocabulary, RankingIsThreadInvariantAndBijective) {
  const auto docs = random_docs(300, 31);
  const auto a = build_vocabulary(count(docs, 1), 16);
  const auto b = build_vocabulary(count(docs, 7), 16);
  EXPECT_EQ(a.tokens(), b.tokens());
  for (std::uint64_t r = 1; r <= a.size(); ++r) EXPECT_EQ(a.rank_of(a.token_at(r)), r);
}
