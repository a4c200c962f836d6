#include "bitcipher/frequency.hpp"

#include "bitcipher/common.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <thread>
#include <unordered_set>

namespace bitcipher {

void FrequencyTable::add_document(std::span<const std::string> tokens) {
  if (tokens.empty()) return;
  std::unordered_map<std::string_view, std::uint64_t> local;
  for (const auto& t : tokens) ++local[t];
  for (const auto& [token, n] : local) {
    auto& c = counts_[std::string(token)];
    c.frequency += n;
    c.document_count += 1;
  }
  total_tokens_ += tokens.size();
  total_documents_ += 1;
}

void FrequencyTable::merge(const FrequencyTable& other) {
  for (const auto& [token, c] : other.counts_) {
    auto& mine = counts_[token];
    mine.frequency += c.frequency;
    mine.document_count += c.document_count;
  }
  total_tokens_ += other.total_tokens_;
  total_documents_ += other.total_documents_;
}

std::optional<TokenCounts> FrequencyTable::find(const std::string& token) const {
  auto it = counts_.find(token);
  if (it == counts_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, TokenCounts>> FrequencyTable::ranked() const {
  std::vector<std::pair<std::string, TokenCounts>> out(counts_.begin(), counts_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second.frequency != b.second.frequency) return a.second.frequency > b.second.frequency;
    return a.first < b.first;
  });
  return out;
}

void FrequencyTable::set(const std::string& token, TokenCounts counts) { counts_[token] = counts; }

void FrequencyTable::set_totals(std::uint64_t tokens, std::uint64_t documents) {
  total_tokens_ = tokens;
  total_documents_ = documents;
}

void FrequencyTable::save(std::ostream& out) const {
  out << "#M=" << total_tokens_ << " D=" << total_documents_ << '\n';
  for (const auto& [token, c] : ranked()) {
    out << token << '\t' << c.frequency << '\t' << c.document_count << '\n';
  }
}

namespace {

std::uint64_t parse_u64(std::string_view s, std::size_t line_no) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("frequency file line " + std::to_string(line_no) + ": bad integer '" +
                     std::string(s) + "'");
  }
  return v;
}

}  // namespace

FrequencyTable FrequencyTable::load(std::istream& in) {
  FrequencyTable table;
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("#M=")) {
    throw InputError("frequency file: missing '#M=<int> D=<int>' header");
  }
  const auto space = line.find(" D=");
  if (space == std::string::npos) throw InputError("frequency file: malformed header");
  table.total_tokens_ = parse_u64(std::string_view(line).substr(3, space - 3), 1);
  table.total_documents_ = parse_u64(std::string_view(line).substr(space + 3), 1);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw InputError("frequency file line " + std::to_string(line_no) +
                       ": expected token<TAB>f<TAB>d");
    }
    const std::string_view view(line);
    TokenCounts c{parse_u64(view.substr(t1 + 1, t2 - t1 - 1), line_no),
                  parse_u64(view.substr(t2 + 1), line_no)};
    if (!table.counts_.emplace(line.substr(0, t1), c).second) {
      throw InputError("frequency file line " + std::to_string(line_no) + ": duplicate token");
    }
  }
  return table;
}

FrequencyTable count_frequencies(std::span<const DocToken> stream) {
  FrequencyTable table;
  std::vector<std::string> doc;
  std::size_t i = 0;
  while (i < stream.size()) {
    const auto id = stream[i].doc;
    doc.clear();
    for (; i < stream.size() && stream[i].doc == id; ++i) doc.push_back(stream[i].token);
    table.add_document(doc);
  }
  return table;
}

FrequencyTable count_frequencies(std::span<const std::vector<std::string>> documents,
                                 unsigned threads) {
  threads = std::max(1u, std::min<unsigned>(threads, documents.size() ? documents.size() : 1));
  std::vector<FrequencyTable> shards(threads);
  auto work = [&](unsigned shard) {
    const std::size_t lo = documents.size() * shard / threads;
    const std::size_t hi = documents.size() * (shard + 1) / threads;
    for (std::size_t d = lo; d < hi; ++d) shards[shard].add_document(documents[d]);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned s = 0; s < threads; ++s) pool.emplace_back(work, s);
  }
  FrequencyTable out = std::move(shards[0]);
  for (unsigned s = 1; s < threads; ++s) out.merge(shards[s]);
  return out;
}

}  // namespace bitcipher
