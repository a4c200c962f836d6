#include "bitcipher/cooccurrence.hpp"

#include "bitcipher/binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <queue>
#include <thread>

namespace bitcipher {

std::string to_string(ContextMode mode) { return mode == ContextMode::Sum ? "sum" : "cat"; }

ContextMode parse_context_mode(std::string_view name) {
  if (name == "sum") return ContextMode::Sum;
  if (name == "cat") return ContextMode::Cat;
  throw InputError("unknown aggregation mode '" + std::string(name) + "' (expected sum or cat)");
}

std::size_t ContextConfig::dimension(unsigned bits) const { return slots() * bits; }

std::size_t ContextConfig::slot_of(int offset) const {
  if (mode == ContextMode::Sum) return 0;
  const int r = static_cast<int>(radius);
  return static_cast<std::size_t>(offset < 0 ? offset + r : offset + r - 1);
}

void ContextConfig::validate() const {
  if (radius == 0) throw InputError("radius must be at least 1");
}

EncodedCorpus encode_documents(std::span<const std::vector<std::string>> documents,
                               const Vocabulary& vocab) {
  EncodedCorpus out;
  out.reserve(documents.size());
  for (const auto& doc : documents) {
    auto& ids = out.emplace_back();
    ids.reserve(doc.size());
    for (const auto& t : doc) ids.push_back(static_cast<std::uint32_t>(vocab.row_of(t)));
  }
  return out;
}

void CoocCounts::add(std::uint32_t center, std::int32_t offset, std::uint32_t context,
                     std::uint64_t n) {
  counts_[CoocKey{center, mode_ == ContextMode::Sum ? 0 : offset, context}] += n;
}

void CoocCounts::add_document(std::span<const std::uint32_t> doc) {
  const auto len = static_cast<std::ptrdiff_t>(doc.size());
  const auto r = static_cast<std::ptrdiff_t>(radius_);
  for (std::ptrdiff_t p = 0; p < len; ++p) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, p - r);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(len - 1, p + r);
    for (std::ptrdiff_t q = lo; q <= hi; ++q) {
      if (q != p) add(doc[p], static_cast<std::int32_t>(q - p), doc[q]);
    }
  }
}

void CoocCounts::merge(const CoocCounts& other) {
  if (other.mode_ != mode_ || other.radius_ != radius_) {
    throw DimensionError("cannot merge co-occurrence counts with different mode or radius");
  }
  for (const auto& [k, n] : other.counts_) counts_[k] += n;
}

std::uint64_t CoocCounts::get(std::uint32_t center, std::int32_t offset,
                              std::uint32_t context) const {
  auto it = counts_.find(CoocKey{center, mode_ == ContextMode::Sum ? 0 : offset, context});
  return it == counts_.end() ? 0 : it->second;
}

std::vector<CoocRecord> CoocCounts::sorted() const {
  std::vector<CoocRecord> out;
  out.reserve(counts_.size());
  for (const auto& [k, n] : counts_) out.push_back({k, n});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  return out;
}

CoocCounts CoocCounts::marginalize() const {
  CoocCounts out(ContextMode::Sum, radius_);
  for (const auto& [k, n] : counts_) out.add(k.center, 0, k.context, n);
  return out;
}

CoocCounts accumulate_cooccurrence(const EncodedCorpus& docs, const ContextConfig& config,
                                   unsigned threads) {
  config.validate();
  threads = std::max(1u, std::min<unsigned>(threads, docs.empty() ? 1 : docs.size()));
  std::vector<CoocCounts> shards(threads, CoocCounts(config.mode, config.radius));
  auto work = [&](unsigned s) {
    const std::size_t lo = docs.size() * s / threads;
    const std::size_t hi = docs.size() * (s + 1) / threads;
    for (std::size_t d = lo; d < hi; ++d) shards[s].add_document(docs[d]);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned s = 0; s < threads; ++s) pool.emplace_back(work, s);
  }
  for (unsigned s = 1; s < threads; ++s) shards[0].merge(shards[s]);
  return std::move(shards[0]);
}

namespace {

constexpr char kRunMagic[5] = "BCRN";
constexpr std::uint32_t kRunVersion = 1;

void write_run_header(std::ostream& out, ContextMode mode, unsigned radius, std::uint64_t n) {
  binio::put_magic(out, kRunMagic);
  binio::put<std::uint32_t>(out, kRunVersion);
  binio::put<std::uint8_t>(out, mode == ContextMode::Sum ? 0 : 1);
  binio::put<std::uint32_t>(out, radius);
  binio::put<std::uint64_t>(out, n);
}

void write_record(std::ostream& out, const CoocRecord& rec) {
  binio::put<std::uint32_t>(out, rec.key.center);
  binio::put<std::int32_t>(out, rec.key.offset);
  binio::put<std::uint32_t>(out, rec.key.context);
  binio::put<std::uint64_t>(out, rec.count);
}

class RunReader {
 public:
  explicit RunReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw InputError("cannot open run file '" + path.string() + "'");
    binio::expect_magic(in_, kRunMagic, "co-occurrence run");
    if (auto v = binio::get<std::uint32_t>(in_); v != kRunVersion) {
      throw InputError("unsupported run file version " + std::to_string(v));
    }
    mode_ = binio::get<std::uint8_t>(in_) == 0 ? ContextMode::Sum : ContextMode::Cat;
    radius_ = binio::get<std::uint32_t>(in_);
    remaining_ = binio::get<std::uint64_t>(in_);
  }

  ContextMode mode() const { return mode_; }
  unsigned radius() const { return radius_; }

  bool next(CoocRecord& rec) {
    if (remaining_ == 0) return false;
    --remaining_;
    rec.key.center = binio::get<std::uint32_t>(in_);
    rec.key.offset = binio::get<std::int32_t>(in_);
    rec.key.context = binio::get<std::uint32_t>(in_);
    rec.count = binio::get<std::uint64_t>(in_);
    return true;
  }

 private:
  std::ifstream in_;
  ContextMode mode_ = ContextMode::Sum;
  unsigned radius_ = 0;
  std::uint64_t remaining_ = 0;
};

}  // namespace

void write_run(const std::filesystem::path& path, const CoocCounts& counts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write run file '" + path.string() + "'");
  const auto records = counts.sorted();
  write_run_header(out, counts.mode(), counts.radius(), records.size());
  for (const auto& rec : records) write_record(out, rec);
}

void for_each_record(const std::filesystem::path& run,
                     const std::function<void(const CoocRecord&)>& fn) {
  RunReader reader(run);
  CoocRecord rec;
  while (reader.next(rec)) fn(rec);
}

CoocCounts read_run(const std::filesystem::path& path) {
  RunReader reader(path);
  CoocCounts counts(reader.mode(), reader.radius());
  CoocRecord rec;
  while (reader.next(rec)) counts.add(rec.key.center, rec.key.offset, rec.key.context, rec.count);
  return counts;
}

std::uint64_t merge_runs(std::span<const std::filesystem::path> runs,
                         const std::filesystem::path& out_path) {
  if (runs.empty()) throw InputError("no run files to merge");
  std::vector<std::unique_ptr<RunReader>> readers;
  for (const auto& p : runs) {
    readers.push_back(std::make_unique<RunReader>(p));
    if (readers.back()->mode() != readers.front()->mode() ||
        readers.back()->radius() != readers.front()->radius()) {
      throw DimensionError("run '" + p.string() + "' has a different mode or radius");
    }
  }

  using Head = std::pair<CoocRecord, std::size_t>;
  auto later = [](const Head& a, const Head& b) {
    if (a.first.key != b.first.key) return a.first.key > b.first.key;
    return a.second > b.second;
  };
  std::priority_queue<Head, std::vector<Head>, decltype(later)> heap(later);
  for (std::size_t i = 0; i < readers.size(); ++i) {
    CoocRecord rec;
    if (readers[i]->next(rec)) heap.push({rec, i});
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InputError("cannot write run file '" + out_path.string() + "'");
  // record count is patched in once known
  write_run_header(out, readers.front()->mode(), readers.front()->radius(), 0);

  std::uint64_t written = 0;
  std::optional<CoocRecord> pending;
  while (!heap.empty()) {
    auto [rec, src] = heap.top();
    heap.pop();
    if (pending && pending->key == rec.key) {
      pending->count += rec.count;
    } else {
      if (pending) {
        write_record(out, *pending);
        ++written;
      }
      pending = rec;
    }
    CoocRecord next;
    if (readers[src]->next(next)) heap.push({next, src});
  }
  if (pending) {
    write_record(out, *pending);
    ++written;
  }
  out.seekp(4 + 4 + 1 + 4);
  binio::put<std::uint64_t>(out, written);
  if (!out) throw Error("failed writing merged run '" + out_path.string() + "'");
  return written;
}

namespace {

double weight(std::uint64_t count, bool log_weighting) {
  const auto x = static_cast<double>(count);
  return log_weighting ? std::log1p(x) : x;
}

void check_noisy(const Matrix& noisy) {
  if (noisy.rows() < 1) throw DimensionError("noisy embedding has no rows");
}

EmbeddingMeta meta_for(const Matrix& noisy, const ContextConfig& config) {
  EmbeddingMeta meta;
  meta.bits = static_cast<unsigned>(noisy.cols());
  meta.radius = config.radius;
  meta.mode = to_string(config.mode);
  meta.log_weighting = config.log_weighting;
  meta.include_center = config.mode == ContextMode::Sum && config.include_center;
  return meta;
}

void add_center_vectors(Matrix& rows, const Matrix& noisy, const ContextConfig& config) {
  if (config.mode == ContextMode::Sum && config.include_center) rows += noisy;
}

}  // namespace

EmbeddingMatrix aggregate(const CoocCounts& counts, const Matrix& noisy,
                          const ContextConfig& config) {
  config.validate();
  check_noisy(noisy);
  if (counts.mode() != config.mode || counts.radius() != config.radius) {
    throw DimensionError("co-occurrence counts were built with a different mode or radius");
  }
  const auto bits = noisy.cols();
  const auto n_rows = noisy.rows();
  EmbeddingMatrix out;
  out.meta = meta_for(noisy, config);
  out.rows = Matrix::Zero(n_rows, static_cast<Eigen::Index>(config.dimension(bits)));
  for (const auto& rec : counts.sorted()) {
    if (rec.key.center >= n_rows || rec.key.context >= n_rows) {
      throw DimensionError("co-occurrence id " +
                           std::to_string(std::max(rec.key.center, rec.key.context)) +
                           " outside the " + std::to_string(n_rows) + "-row noisy embedding");
    }
    const auto slot = static_cast<Eigen::Index>(config.slot_of(rec.key.offset));
    out.rows.row(rec.key.center).segment(slot * bits, bits) +=
        weight(rec.count, config.log_weighting) * noisy.row(rec.key.context);
  }
  add_center_vectors(out.rows, noisy, config);
  return out;
}

EmbeddingMatrix embed_corpus(const EncodedCorpus& docs, const Matrix& noisy,
                             const ContextConfig& config, unsigned threads) {
  config.validate();
  check_noisy(noisy);
  const auto bits = noisy.cols();
  const auto n_rows = static_cast<std::size_t>(noisy.rows());
  const auto r = static_cast<std::ptrdiff_t>(config.radius);
  threads = std::max(1u, threads);

  for (const auto& doc : docs) {
    for (auto id : doc) {
      if (id >= n_rows) {
        throw DimensionError("token id " + std::to_string(id) + " outside the " +
                             std::to_string(n_rows) + "-row noisy embedding");
      }
    }
  }

  // Per-center sparse accumulators keyed by (slot << 32 | context). Counting
  // is sharded over documents; integer merges keep the result independent of
  // the thread count.
  using RowCounts = std::unordered_map<std::uint64_t, std::uint64_t>;
  const unsigned count_workers = std::min<unsigned>(threads, docs.empty() ? 1 : docs.size());
  std::vector<std::vector<RowCounts>> shards(count_workers, std::vector<RowCounts>(n_rows));
  auto count = [&](unsigned s) {
    auto& rows = shards[s];
    const std::size_t lo = docs.size() * s / count_workers;
    const std::size_t hi = docs.size() * (s + 1) / count_workers;
    for (std::size_t d = lo; d < hi; ++d) {
      const auto& doc = docs[d];
      const auto len = static_cast<std::ptrdiff_t>(doc.size());
      for (std::ptrdiff_t p = 0; p < len; ++p) {
        auto& row = rows[doc[p]];
        const std::ptrdiff_t lo_q = std::max<std::ptrdiff_t>(0, p - r);
        const std::ptrdiff_t hi_q = std::min<std::ptrdiff_t>(len - 1, p + r);
        for (std::ptrdiff_t q = lo_q; q <= hi_q; ++q) {
          if (q == p) continue;
          const std::uint64_t slot = config.slot_of(static_cast<int>(q - p));
          ++row[(slot << 32) | doc[q]];
        }
      }
    }
  };
  auto run_parallel = [](unsigned workers, const auto& fn) {
    if (workers == 1) {
      fn(0u);
      return;
    }
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(fn, w);
  };
  run_parallel(count_workers, count);

  EmbeddingMatrix out;
  out.meta = meta_for(noisy, config);
  out.rows = Matrix::Zero(static_cast<Eigen::Index>(n_rows),
                          static_cast<Eigen::Index>(config.dimension(bits)));

  const unsigned agg_workers = static_cast<unsigned>(std::min<std::size_t>(threads, n_rows));
  auto fill = [&](unsigned w) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> entries;
    for (std::size_t c = w; c < n_rows; c += agg_workers) {
      entries.clear();
      for (unsigned s = 0; s < count_workers; ++s) {
        for (const auto& e : shards[s][c]) entries.push_back(e);
      }
      std::sort(entries.begin(), entries.end());
      auto row = out.rows.row(static_cast<Eigen::Index>(c));
      for (std::size_t i = 0; i < entries.size();) {
        const std::uint64_t key = entries[i].first;
        std::uint64_t total = 0;
        for (; i < entries.size() && entries[i].first == key; ++i) total += entries[i].second;
        const auto slot = static_cast<Eigen::Index>(key >> 32);
        const auto context = static_cast<Eigen::Index>(key & 0xffffffffu);
        row.segment(slot * bits, bits) += weight(total, config.log_weighting) * noisy.row(context);
      }
    }
  };
  run_parallel(agg_workers, fill);

  add_center_vectors(out.rows, noisy, config);
  return out;
}

}  // namespace bitcipher
