#include "mwe/vocab.h"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mwe/errors.h"
#include "text_util.h"

namespace mwe {

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> freqs)
    : words_(std::move(words)), freqs_(std::move(freqs)) {
  if (words_.size() != freqs_.size()) {
    throw std::invalid_argument("Vocabulary: words and freqs differ in length");
  }
  ids_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!ids_.emplace(words_[i], static_cast<WordId>(i)).second) {
      throw std::invalid_argument("Vocabulary: duplicate word '" + words_[i] + "'");
    }
  }
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::id(std::string_view word) const {
  if (auto found = find(word)) return *found;
  throw std::out_of_range("word not in vocabulary: " + std::string(word));
}

const std::string& Vocabulary::word(WordId id) const {
  if (id >= words_.size()) throw std::out_of_range("word id out of range");
  return words_[id];
}

std::uint64_t Vocabulary::freq(WordId id) const {
  if (id >= freqs_.size()) throw std::out_of_range("word id out of range");
  return freqs_[id];
}

RelationRegistry::RelationRegistry(std::vector<std::string> names,
                                   std::vector<std::uint64_t> tuple_counts)
    : names_(std::move(names)), counts_(std::move(tuple_counts)) {
  if (counts_.empty()) counts_.assign(names_.size(), 0);
  if (counts_.size() != names_.size()) {
    throw std::invalid_argument("RelationRegistry: names and counts differ in length");
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!ids_.emplace(names_[i], static_cast<RelationId>(i)).second) {
      throw std::invalid_argument("RelationRegistry: duplicate relation '" + names_[i] + "'");
    }
  }
}

std::optional<RelationId> RelationRegistry::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

RelationId RelationRegistry::id(std::string_view name) const {
  if (auto found = find(name)) return *found;
  throw std::out_of_range("unknown relation: " + std::string(name));
}

const std::string& RelationRegistry::name(RelationId id) const {
  if (id >= names_.size()) throw std::out_of_range("relation id out of range");
  return names_[id];
}

std::uint64_t RelationRegistry::tuple_count(RelationId id) const {
  if (id >= counts_.size()) throw std::out_of_range("relation id out of range");
  return counts_[id];
}

VocabBuild build_vocab(const std::vector<RawTuple>& tuples, std::uint64_t min_count) {
  std::map<std::string, std::uint64_t> word_counts;
  std::map<std::string, std::uint64_t> relation_counts;
  std::size_t malformed = 0;
  for (const RawTuple& t : tuples) {
    if (t.count == 0 || t.head.empty() || t.tail.empty() || t.relation.empty()) {
      ++malformed;
      continue;
    }
    word_counts[t.head] += t.count;
    word_counts[t.tail] += t.count;
    relation_counts[t.relation] += t.count;
  }

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [word, freq] : word_counts) {
    if (freq >= min_count) kept.emplace_back(word, freq);
  }
  // std::map iteration is already lexicographic, so a stable sort on
  // frequency alone yields the (freq desc, word asc) order.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> words;
  std::vector<std::uint64_t> freqs;
  words.reserve(kept.size());
  freqs.reserve(kept.size());
  for (auto& [word, freq] : kept) {
    words.push_back(word);
    freqs.push_back(freq);
  }

  std::vector<std::string> names;
  std::vector<std::uint64_t> counts;
  for (auto& [name, count] : relation_counts) {
    names.push_back(name);
    counts.push_back(count);
  }

  return {Vocabulary(std::move(words), std::move(freqs)),
          RelationRegistry(std::move(names), std::move(counts)), malformed};
}

namespace {

void write_counted(std::ostream& out, const std::string& header_tag, char count_key,
                   const std::vector<std::string>& names,
                   const std::vector<std::uint64_t>& counts) {
  out << header_tag << " v1 " << count_key << '=' << names.size() << '\n';
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << '\t' << counts[i] << '\n';
  }
}

std::pair<std::vector<std::string>, std::vector<std::uint64_t>> read_counted(
    std::istream& in, const std::string& header_tag, char count_key) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(header_tag + ": missing header");
  const std::size_t expected =
      detail::parse_header_count(line, header_tag, std::string(1, count_key));

  std::vector<std::string> names;
  std::vector<std::uint64_t> counts;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty()) continue;
    auto fields = detail::split_tabs(line);
    if (fields.size() != 2) {
      throw FormatError(header_tag + ": line " + std::to_string(line_no) +
                        ": expected 2 tab-separated fields");
    }
    names.emplace_back(fields[0]);
    counts.push_back(detail::parse_u64(fields[1], line_no));
  }
  if (names.size() != expected) {
    throw FormatError(header_tag + ": header declares " + std::to_string(expected) +
                      " entries but file has " + std::to_string(names.size()));
  }
  return {std::move(names), std::move(counts)};
}

}  // namespace

void write_vocab(std::ostream& out, const Vocabulary& vocab) {
  write_counted(out, "#MWE-VOCAB", 'n', vocab.words(), vocab.freqs());
}

Vocabulary read_vocab(std::istream& in) {
  auto [words, freqs] = read_counted(in, "#MWE-VOCAB", 'n');
  return Vocabulary(std::move(words), std::move(freqs));
}

void write_relations(std::ostream& out, const RelationRegistry& relations) {
  std::vector<std::uint64_t> counts;
  for (RelationId r = 0; r < relations.size(); ++r) counts.push_back(relations.tuple_count(r));
  write_counted(out, "#MWE-RELS", 'm', relations.names(), counts);
}

RelationRegistry read_relations(std::istream& in) {
  auto [names, counts] = read_counted(in, "#MWE-RELS", 'm');
  return RelationRegistry(std::move(names), std::move(counts));
}

}  // namespace mwe
