#include "bitcipher/conll.hpp"

#include "bitcipher/common.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace bitcipher {

std::size_t LabeledTokenDataset::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.size();
  return n;
}

std::optional<std::size_t> LabeledTokenDataset::label_index(const std::string& label) const {
  auto it = std::find(label_set.begin(), label_set.end(), label);
  if (it == label_set.end()) return std::nullopt;
  return static_cast<std::size_t>(it - label_set.begin());
}

void LabeledTokenDataset::add_sequence(std::vector<TaggedToken> sequence) {
  for (const auto& t : sequence) {
    if (!label_index(t.label)) label_set.push_back(t.label);
  }
  sequences.push_back(std::move(sequence));
}

LabeledTokenDataset read_conll(std::istream& in, std::size_t token_column,
                               std::size_t label_column, std::string split) {
  LabeledTokenDataset data;
  data.split = std::move(split);
  std::vector<TaggedToken> current;
  std::optional<std::size_t> width;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> cols;

  auto end_sequence = [&] {
    if (!current.empty()) data.add_sequence(std::move(current));
    current.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    cols.clear();
    std::istringstream fields(line);
    for (std::string f; fields >> f;) cols.push_back(std::move(f));
    if (cols.empty()) {
      end_sequence();
      continue;
    }
    if (cols.front() == "-DOCSTART-") continue;
    if (!width) {
      width = cols.size();
      if (std::max(token_column, label_column) >= *width) {
        throw InputError("CoNLL line " + std::to_string(line_no) + ": has " +
                         std::to_string(*width) + " columns, need column " +
                         std::to_string(std::max(token_column, label_column) + 1));
      }
    } else if (cols.size() != *width) {
      throw InputError("CoNLL line " + std::to_string(line_no) + ": expected " +
                       std::to_string(*width) + " columns, found " + std::to_string(cols.size()));
    }
    current.push_back({cols[token_column], cols[label_column]});
  }
  end_sequence();
  return data;
}

LabeledTokenDataset load_conll(const std::filesystem::path& path, std::size_t token_column,
                               std::size_t label_column, std::string split) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return read_conll(in, token_column, label_column, std::move(split));
}

void write_conll(std::ostream& out, const LabeledTokenDataset& data) {
  for (const auto& seq : data.sequences) {
    for (const auto& t : seq) out << t.token << ' ' << t.label << '\n';
    out << '\n';
  }
}

}  // namespace bitcipher
