#include "bitcipher/cli.hpp"

#include "bitcipher/conll.hpp"
#include "bitcipher/export.hpp"
#include "bitcipher/manifest.hpp"
#include "bitcipher/pipeline.hpp"
#include "bitcipher/probe.hpp"
#include "bitcipher/tokenizer.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace bitcipher {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TokenizerFlags {
  bool no_lowercase = false;
  bool no_split_punct = false;
  std::string boundary = "line";

  void attach(CLI::App* app) {
    app->add_flag("--no-lowercase", no_lowercase, "Keep token case");
    app->add_flag("--no-split-punct", no_split_punct, "Keep punctuation attached to words");
    app->add_option("--boundary", boundary, "Document boundary: line | blank-line")
        ->check(CLI::IsMember({"line", "blank-line"}));
  }
  TokenizerConfig config() const {
    return {!no_lowercase, !no_split_punct, parse_document_boundary(boundary)};
  }
};

json tokenizer_json(const TokenizerConfig& c) {
  return {{"lowercase", c.lowercase},
          {"split_punctuation", c.split_punctuation},
          {"boundary", to_string(c.boundary)}};
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw InputError("no such file: '" + path + "'");
}

fs::path manifest_path(const std::string& explicit_path, const std::string& out) {
  return explicit_path.empty() ? fs::path(out + ".manifest.json") : fs::path(explicit_path);
}

json meta_json(const EmbeddingMeta& m) {
  return {{"bits", m.bits},
          {"radius", m.radius},
          {"mode", m.mode},
          {"log", m.log_weighting},
          {"include_center", m.include_center},
          {"noise_mode", m.noise_mode},
          {"corpus_digest", m.corpus_digest},
          {"postprocessing", m.postprocessing}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_json(const PostprocReport& r) {
  return {{"steps", r.steps},
          {"epsilon", r.epsilon},
          {"condition_before", finite_or_null(r.condition_before)},
          {"condition_after", finite_or_null(r.condition_after)},
          {"degenerate_directions", r.degenerate_directions},
          {"rank_deficient", r.rank_deficient},
          {"zero_rows", r.zero_rows},
          {"normalized_rows", r.normalized_rows}};
}

// ---------------------------------------------------------------- count

struct CountArgs {
  std::string corpus, out, manifest;
  TokenizerFlags tok;
  unsigned threads = 1;
};

int cmd_count(const CountArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  require_file(a.corpus);
  const auto config = a.tok.config();
  const auto docs = read_documents(fs::path(a.corpus), config);
  const auto table = count_frequencies(docs, a.threads);
  {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw InputError("cannot write '" + a.out + "'");
    table.save(f);
  }
  Manifest m;
  m.command = "count";
  m.argv = argv;
  m.config = {{"tokenizer", tokenizer_json(config)}};
  m.add_input(a.corpus);
  m.add_output(a.out);
  m.save(manifest_path(a.manifest, a.out));
  out << "counted " << table.total_tokens() << " tokens, " << table.distinct() << " types, "
      << table.total_documents() << " documents\n";
  return kExitOk;
}

// ---------------------------------------------------------------- embed

struct EmbedArgs {
  std::string corpus, freq, out, manifest, cipher_out;
  TokenizerFlags tok;
  unsigned bits = 25;
  unsigned radius = 4;
  std::string mode = "sum";
  bool log = false;
  std::string dtype = "unigram";
  bool include_center = false;
  bool postproc = false;
  double epsilon = kDefaultWhitenEpsilon;
  std::string centering = "column";
  std::optional<std::size_t> max_vocab;
  std::string format = "text";
  unsigned threads = 1;
};

int cmd_embed(const EmbedArgs& a, const std::vector<std::string>& argv, std::ostream& out,
              std::ostream& err) {
  require_file(a.corpus);
  if (a.bits == 0) throw InputError("--bits must be at least 1");
  if (a.radius == 0) throw InputError("--radius must be at least 1");
  const auto tok = a.tok.config();
  const auto docs = read_documents(fs::path(a.corpus), tok);

  FrequencyTable table;
  if (!a.freq.empty()) {
    require_file(a.freq);
    std::ifstream f(a.freq);
    table = FrequencyTable::load(f);
  } else {
    table = count_frequencies(docs, a.threads);
  }

  EmbedOptions opt;
  opt.bits = a.bits;
  opt.context = {a.radius, parse_context_mode(a.mode), a.log, a.include_center};
  opt.noise = parse_noise_mode(a.dtype);
  opt.max_vocab = a.max_vocab;
  opt.postprocess = a.postproc;
  opt.postproc = {a.epsilon,
                  a.centering == "row" ? CenteringMode::Row : CenteringMode::Column};
  opt.threads = a.threads;

  auto result = run_embed(docs, table, opt);
  if (result.vocab.truncated() > 0) {
    err << "warning: " << result.vocab.truncated() << " of " << table.distinct()
        << " token types exceed the vocabulary cap (2^" << a.bits << " - 1 = "
        << cipher_capacity(a.bits) << (a.max_vocab ? ", --max-vocab " + std::to_string(*a.max_vocab) : "")
        << ") and map to " << kOovToken << '\n';
  }
  result.embedding.meta.corpus_digest = sha256_file(a.corpus);
  const auto format = parse_embedding_format(a.format);
  export_embeddings(fs::path(a.out), result.vocab, result.embedding, format);
  if (!a.cipher_out.empty()) {
    std::ofstream f(a.cipher_out, std::ios::binary);
    if (!f) throw InputError("cannot write '" + a.cipher_out + "'");
    save_cipher(f, result.cipher, opt.noise);
  }

  Manifest m;
  m.command = "embed";
  m.argv = argv;
  m.config = {{"tokenizer", tokenizer_json(tok)},
              {"bits", a.bits},
              {"radius", a.radius},
              {"mode", a.mode},
              {"log", a.log},
              {"dtype", a.dtype},
              {"include_center", a.include_center},
              {"postproc", a.postproc},
              {"epsilon", a.epsilon},
              {"centering", a.centering},
              {"max_vocab", a.max_vocab ? json(*a.max_vocab) : json(nullptr)},
              {"format", a.format},
              {"vocab_size", result.vocab.size()},
              {"truncated_types", result.vocab.truncated()},
              {"dimension", result.embedding.dimension()},
              {"embedding", meta_json(result.embedding.meta)}};
  if (result.postproc_report) m.config["postproc_report"] = report_json(*result.postproc_report);
  m.add_input(a.corpus);
  if (!a.freq.empty()) m.add_input(a.freq);
  m.add_output(a.out);
  if (!a.cipher_out.empty()) m.add_output(a.cipher_out);
  m.save(manifest_path(a.manifest, a.out));

  out << "embedded " << result.vocab.size() << " tokens (+" << kOovToken << ") into "
      << result.embedding.dimension() << " dimensions\n";
  return kExitOk;
}

// ---------------------------------------------------------------- postproc

struct PostprocArgs {
  std::string in, out, manifest;
  double epsilon = kDefaultWhitenEpsilon;
  std::string centering = "column";
  std::string format = "text";
};

int cmd_postproc(const PostprocArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  require_file(a.in);
  auto set = import_embeddings(fs::path(a.in));
  PostprocReport report;
  const auto processed = postprocess(
      set.embedding,
      {a.epsilon, a.centering == "row" ? CenteringMode::Row : CenteringMode::Column}, &report);
  export_embeddings(fs::path(a.out), set.vocab, processed, parse_embedding_format(a.format));

  Manifest m;
  m.command = "postproc";
  m.argv = argv;
  m.config = {{"epsilon", a.epsilon},
              {"centering", a.centering},
              {"format", a.format},
              {"report", report_json(report)}};
  m.add_input(a.in);
  m.add_output(a.out);
  m.save(manifest_path(a.manifest, a.out));
  if (report.rank_deficient) {
    out << "note: covariance is rank deficient (" << report.degenerate_directions
        << " degenerate directions), epsilon-regularized\n";
  }
  out << "post-processed " << processed.rows.rows() << " rows: ";
  for (std::size_t i = 0; i < report.steps.size(); ++i) out << (i ? ", " : "") << report.steps[i];
  out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- probe

struct ProbeArgs {
  std::string embeddings, train, dev, test, metrics, manifest;
  std::size_t token_col = 0, label_col = 1;
  std::optional<std::size_t> expect_dim;
  ProbeHyperparams hp;
  bool no_lowercase = false;
};

json metrics_json(const ProbeMetrics& m) {
  json labels = json::array();
  for (const auto& s : m.per_label) {
    labels.push_back({{"label", s.label},
                      {"precision", s.precision},
                      {"recall", s.recall},
                      {"f1", s.f1},
                      {"support", s.support}});
  }
  return {{"accuracy", m.accuracy},
          {"f1", m.macro_f1},
          {"f1_average", "macro"},
          {"tokens", m.tokens},
          {"per_label", labels}};
}

int cmd_probe(ProbeArgs a, const std::vector<std::string>& argv, std::ostream& out) {
  for (const auto* p : {&a.embeddings, &a.train, &a.test}) require_file(*p);
  if (!a.dev.empty()) require_file(a.dev);
  const auto set = import_embeddings(fs::path(a.embeddings));
  const auto dim = static_cast<std::size_t>(set.embedding.rows.cols());
  if (a.expect_dim && *a.expect_dim != dim) {
    throw InputError("embedding file '" + a.embeddings + "' has dimension " + std::to_string(dim) +
                     " but --expect-dim is " + std::to_string(*a.expect_dim));
  }
  a.hp.lowercase_tokens = !a.no_lowercase;
  const auto train = load_conll(a.train, a.token_col, a.label_col, "train");
  const auto dev = a.dev.empty() ? LabeledTokenDataset{}
                                 : load_conll(a.dev, a.token_col, a.label_col, "dev");
  const auto test = load_conll(a.test, a.token_col, a.label_col, "test");

  const auto trained = train_probe(set, train, dev, a.hp);
  auto test_metrics = evaluate_probe(trained.model, set, test);
  test_metrics.loss_curve = trained.loss_curve;
  test_metrics.dev_accuracy_curve = trained.dev_accuracy_curve;
  test_metrics.best_epoch = trained.best_epoch;

  if (!a.dev.empty()) {
    out << "dev:  " << format_acc_f1(evaluate_probe(trained.model, set, dev)) << '\n';
  }
  out << "test: " << format_acc_f1(test_metrics) << '\n';

  if (!a.metrics.empty()) {
    const auto& hp = a.hp;
    json j = {{"test", metrics_json(test_metrics)},
              {"loss_curve", trained.loss_curve},
              {"dev_accuracy_curve", trained.dev_accuracy_curve},
              {"best_epoch", trained.best_epoch},
              {"hyperparameters",
               {{"hidden", hp.hidden},
                {"dropout", hp.dropout},
                {"leaky_slope", hp.leaky_slope},
                {"learning_rate", hp.learning_rate},
                {"momentum", hp.momentum},
                {"batch_size", hp.batch_size},
                {"epochs", hp.epochs},
                {"patience", hp.patience},
                {"seed", hp.seed},
                {"optimizer", "sgd-momentum"}}},
              {"embedding_dimension", dim}};
    if (!a.dev.empty()) j["dev"] = metrics_json(evaluate_probe(trained.model, set, dev));
    {
      std::ofstream f(a.metrics);
      if (!f) throw InputError("cannot write '" + a.metrics + "'");
      f << j.dump(2) << '\n';
    }
    Manifest m;
    m.command = "probe";
    m.argv = argv;
    m.config = j["hyperparameters"];
    m.add_input(a.embeddings);
    m.add_input(a.train);
    if (!a.dev.empty()) m.add_input(a.dev);
    m.add_input(a.test);
    m.add_output(a.metrics);
    m.save(manifest_path(a.manifest, a.metrics));
  }
  return kExitOk;
}

// ---------------------------------------------------------------- export

struct ExportArgs {
  std::string in, out, format = "text", manifest;
};

int cmd_export(const ExportArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  require_file(a.in);
  const auto set = import_embeddings(fs::path(a.in));
  export_embeddings(fs::path(a.out), set.vocab, set.embedding, parse_embedding_format(a.format));
  Manifest m;
  m.command = "export";
  m.argv = argv;
  m.config = {{"format", a.format}};
  m.add_input(a.in);
  m.add_output(a.out);
  m.save(manifest_path(a.manifest, a.out));
  out << "wrote " << set.embedding.rows.rows() << " x " << set.embedding.rows.cols() << " ("
      << a.format << ") to " << a.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- replay

int cmd_replay(const std::string& path, std::ostream& out, std::ostream& err) {
  require_file(path);
  const auto m = Manifest::load(path);
  for (const auto& [file, digest] : m.inputs) {
    if (!fs::is_regular_file(file)) throw InputError("manifest input missing: '" + file + "'");
    if (sha256_file(file) != digest) {
      err << "warning: input '" << file << "' changed since the manifest was written\n";
    }
  }
  std::vector<std::string> argv;
  for (std::size_t i = 0; i < m.argv.size(); ++i) {
    if (m.argv[i] == "--manifest") {
      ++i;
      continue;
    }
    if (!m.argv[i].starts_with("--manifest=")) argv.push_back(m.argv[i]);
  }
  // keep the recorded manifest untouched; the re-run writes its own copy aside
  argv.push_back("--manifest");
  argv.push_back(path + ".replay.json");
  std::ostringstream sink;
  const int code = run_cli(argv, sink, err);
  fs::remove(path + ".replay.json");
  if (code != kExitOk) return code;

  bool all_match = true;
  for (const auto& [file, digest] : m.outputs) {
    const bool match = fs::is_regular_file(file) && sha256_file(file) == digest;
    out << (match ? "match    " : "MISMATCH ") << file << '\n';
    all_match = all_match && match;
  }
  return all_match ? kExitOk : kExitInternal;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"bitcipher: deterministic bit-cipher word embeddings", "bitcipher"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CountArgs count;
  auto* c = app.add_subcommand("count", "Count unigram and document frequencies");
  c->add_option("corpus", count.corpus, "UTF-8 corpus (plain or gzip)")->required();
  c->add_option("-o,--out", count.out, "Frequency table output")->required();
  c->add_option("--manifest", count.manifest, "Manifest path (default <out>.manifest.json)");
  c->add_option("--threads", count.threads, "Worker threads")->check(CLI::PositiveNumber);
  count.tok.attach(c);

  EmbedArgs embed;
  auto* e = app.add_subcommand("embed", "Build cipher embeddings from a corpus");
  e->add_option("corpus", embed.corpus, "UTF-8 corpus (plain or gzip)")->required();
  e->add_option("--freq", embed.freq, "Frequency table from `count` (default: count the corpus)");
  e->add_option("-o,--out", embed.out, "Embedding output")->required();
  e->add_option("--manifest", embed.manifest, "Manifest path (default <out>.manifest.json)");
  e->add_option("--bits", embed.bits, "Cipher bits b");
  e->add_option("--radius", embed.radius, "Context window radius r");
  e->add_option("--mode", embed.mode, "sum | cat")->check(CLI::IsMember({"sum", "cat"}));
  e->add_flag("--log", embed.log, "Weight co-occurrence counts by log(1 + count)");
  e->add_option("--dtype", embed.dtype, "Noise fidelity: unigram | df")
      ->check(CLI::IsMember({"unigram", "df"}));
  e->add_flag("--include-center", embed.include_center, "Sum mode: add the center token's vector");
  e->add_flag("--postproc", embed.postproc, "Whiten, center and L2-normalize the result");
  e->add_option("--epsilon", embed.epsilon, "Whitening regularizer for degenerate directions");
  e->add_option("--centering", embed.centering, "column | row")
      ->check(CLI::IsMember({"column", "row"}));
  e->add_option("--max-vocab", embed.max_vocab, "Vocabulary cap");
  e->add_option("--format", embed.format, "text | binary")->check(CLI::IsMember({"text", "binary"}));
  e->add_option("--threads", embed.threads, "Worker threads")->check(CLI::PositiveNumber);
  e->add_option("--cipher-out", embed.cipher_out, "Also write the binary cipher");
  embed.tok.attach(e);

  PostprocArgs post;
  auto* p = app.add_subcommand("postproc", "Whiten, center and L2-normalize an embedding file");
  p->add_option("input", post.in, "Embedding file (text or binary)")->required();
  p->add_option("-o,--out", post.out, "Output file")->required();
  p->add_option("--manifest", post.manifest, "Manifest path (default <out>.manifest.json)");
  p->add_option("--epsilon", post.epsilon, "Whitening regularizer for degenerate directions");
  p->add_option("--centering", post.centering, "column | row")
      ->check(CLI::IsMember({"column", "row"}));
  p->add_option("--format", post.format, "text | binary")->check(CLI::IsMember({"text", "binary"}));

  ProbeArgs probe;
  auto* pr = app.add_subcommand("probe", "Train and evaluate an MLP tagging probe");
  pr->add_option("embeddings", probe.embeddings, "Embedding file (text or binary)")->required();
  pr->add_option("--train", probe.train, "Training CoNLL file")->required();
  pr->add_option("--dev", probe.dev, "Development CoNLL file (checkpoint selection)");
  pr->add_option("--test", probe.test, "Test CoNLL file")->required();
  pr->add_option("--token-col", probe.token_col, "Token column (0-based)");
  pr->add_option("--label-col", probe.label_col, "Label column (0-based)");
  pr->add_option("--expect-dim", probe.expect_dim, "Fail unless the embeddings have this dimension");
  pr->add_option("--metrics", probe.metrics, "Write JSON metrics here");
  pr->add_option("--manifest", probe.manifest, "Manifest path (default <metrics>.manifest.json)");
  pr->add_option("--hidden", probe.hp.hidden, "Hidden units");
  pr->add_option("--dropout", probe.hp.dropout, "Dropout rate");
  pr->add_option("--leaky-slope", probe.hp.leaky_slope, "LeakyReLU negative slope");
  pr->add_option("--lr", probe.hp.learning_rate, "Learning rate");
  pr->add_option("--momentum", probe.hp.momentum, "SGD momentum");
  pr->add_option("--batch", probe.hp.batch_size, "Mini-batch size");
  pr->add_option("--epochs", probe.hp.epochs, "Maximum epochs");
  pr->add_option("--patience", probe.hp.patience, "Early-stopping patience (epochs)");
  pr->add_option("--seed", probe.hp.seed, "Random seed");
  pr->add_flag("--no-lowercase", probe.no_lowercase, "Look tokens up without lowercasing");

  ExportArgs exp;
  auto* x = app.add_subcommand("export", "Convert an embedding file between text and binary");
  x->add_option("input", exp.in, "Embedding file (text or binary)")->required();
  x->add_option("-o,--out", exp.out, "Output file")->required();
  x->add_option("--format", exp.format, "text | binary")->check(CLI::IsMember({"text", "binary"}));
  x->add_option("--manifest", exp.manifest, "Manifest path (default <out>.manifest.json)");

  std::string replay_path;
  auto* r = app.add_subcommand("replay", "Re-run the command recorded in a manifest and compare outputs");
  r->add_option("manifest", replay_path, "Manifest JSON")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    return app.exit(pe, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c->parsed()) return cmd_count(count, args, out);
    if (e->parsed()) return cmd_embed(embed, args, out, err);
    if (p->parsed()) return cmd_postproc(post, args, out);
    if (pr->parsed()) return cmd_probe(probe, args, out);
    if (x->parsed()) return cmd_export(exp, args, out);
    if (r->parsed()) return cmd_replay(replay_path, out, err);
  } catch (const InputError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const CapacityError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace bitcipher
