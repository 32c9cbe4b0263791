#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mwe/matrix.h"

namespace mwe {

// One extracted (head, relation, tail) observation with its multiplicity.
struct RawTuple {
  std::string head;
  std::string relation;
  std::string tail;
  std::uint64_t count = 1;

  bool operator==(const RawTuple&) const = default;
};

// Word <-> id bijection. Ids are dense in [0, n) and ordered by
// descending frequency, ties broken lexicographically.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Words must be unique; freqs.size() must equal words.size().
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> freqs);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  std::optional<WordId> find(std::string_view word) const;
  WordId id(std::string_view word) const;  // throws std::out_of_range
  const std::string& word(WordId id) const;
  std::uint64_t freq(WordId id) const;

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& freqs() const { return freqs_; }

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && freqs_ == other.freqs_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> freqs_;
  std::unordered_map<std::string, WordId> ids_;
};

// Relation name <-> id bijection. Closed once built.
class RelationRegistry {
 public:
  RelationRegistry() = default;
  explicit RelationRegistry(std::vector<std::string> names,
                            std::vector<std::uint64_t> tuple_counts = {});

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }

  std::optional<RelationId> find(std::string_view name) const;
  RelationId id(std::string_view name) const;  // throws std::out_of_range
  const std::string& name(RelationId id) const;
  // Total tuple multiplicity seen at build time (0 when unknown).
  std::uint64_t tuple_count(RelationId id) const;

  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const RelationRegistry& other) const {
    return names_ == other.names_ && counts_ == other.counts_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, RelationId> ids_;
};

struct VocabBuild {
  Vocabulary vocab;
  RelationRegistry relations;
  std::size_t malformed = 0;  // records with empty fields or zero count
};

inline constexpr std::uint64_t kDefaultMinCount = 5;

// Counts head and tail occurrences (weighted by count) into one vocabulary
// and keeps words with frequency >= min_count. Relations are kept in
// lexicographic order.
VocabBuild build_vocab(const std::vector<RawTuple>& tuples, std::uint64_t min_count);

// `#MWE-VOCAB v1 n=<n>` header followed by `word<TAB>freq` lines.
void write_vocab(std::ostream& out, const Vocabulary& vocab);
Vocabulary read_vocab(std::istream& in);

// `#MWE-RELS v1 m=<m>` header followed by `name<TAB>count` lines.
void write_relations(std::ostream& out, const RelationRegistry& relations);
RelationRegistry read_relations(std::istream& in);

}  // namespace mwe
