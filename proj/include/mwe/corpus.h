#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mwe/matrix.h"
#include "mwe/vocab.h"

namespace mwe {

// ---------------------------------------------------------------------------
// CoNLL-U ingestion

struct ConlluToken {
  int id = 0;          // 1-based position in the sentence
  std::string form;
  int head = -1;       // 0 = root, -1 = unannotated ("_")
  std::string deprel;
};

using ConlluSentence = std::vector<ConlluToken>;

// Parses a CoNLL-U document. Multiword-token ranges (1-2) and empty nodes
// (1.1) are skipped. Throws FormatError naming the line on a column-count
// or id/head syntax error.
std::vector<ConlluSentence> parse_conllu(std::string_view text);

inline const std::set<std::string>& default_relations() {
  static const std::set<std::string> kRelations = {"nsubj", "dobj", "amod"};
  return kRelations;
}

struct ExtractOptions {
  std::set<std::string> relations = default_relations();
  bool lowercase = false;
};

// Emits (governor form, deprel, dependent form) for every edge whose deprel
// is in options.relations. Each emitted tuple has count 1.
std::vector<RawTuple> extract_tuples(const std::vector<ConlluSentence>& sentences,
                                     const ExtractOptions& options = {});

// Sums counts of identical (head, relation, tail) triples. Output is sorted.
std::vector<RawTuple> merge_tuples(std::vector<RawTuple> tuples);

// ---------------------------------------------------------------------------
// Tuple files: `#MWE-TUPLES v1` then `head<TAB>relation<TAB>tail<TAB>count`.

void write_tuples(std::ostream& out, const std::vector<RawTuple>& tuples);

struct TupleFile {
  std::vector<RawTuple> tuples;
  std::size_t malformed = 0;  // lines skipped for bad column count or count
};

TupleFile read_tuples(std::istream& in);

// ---------------------------------------------------------------------------
// Encoded corpus

struct Tuple {
  WordId head = 0;
  RelationId relation = 0;
  WordId tail = 0;

  bool operator==(const Tuple&) const = default;
};

struct TupleRecord {
  Tuple tuple;
  std::uint64_t count = 0;
};

struct SlotCount {
  WordId word = 0;
  std::uint64_t count = 0;
};

class TupleCorpus {
 public:
  TupleCorpus() = default;
  TupleCorpus(std::vector<TupleRecord> records, std::size_t relation_count);

  const std::vector<TupleRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t relation_count() const { return ranges_.size(); }

  // Records of relation r occupy [first, second) in records().
  std::pair<std::size_t, std::size_t> range(RelationId r) const { return ranges_.at(r); }

  // Per-relation marginal counts of the head or tail slot, sorted by word id.
  const std::vector<SlotCount>& marginal(RelationId r, Role slot) const;

  std::uint64_t total_count() const;
  std::size_t dropped() const { return dropped_; }
  void set_dropped(std::size_t n) { dropped_ = n; }

 private:
  std::vector<TupleRecord> records_;
  std::vector<std::pair<std::size_t, std::size_t>> ranges_;
  std::vector<std::vector<SlotCount>> head_marginals_;
  std::vector<std::vector<SlotCount>> tail_marginals_;
  std::size_t dropped_ = 0;
};

// Encodes raw tuples. Tuples with out-of-vocabulary words are dropped and
// counted in dropped(); duplicates are merged. An unknown relation name
// throws std::out_of_range.
TupleCorpus encode_corpus(const std::vector<RawTuple>& raw, const Vocabulary& vocab,
                          const RelationRegistry& relations);

// ---------------------------------------------------------------------------
// Negative sampling

inline constexpr double kDefaultNegativeExponent = 0.75;
inline constexpr int kMaxResamples = 100;

class NegativeSampler {
 public:
  // exponent 0 gives a uniform distribution over the observed slot support.
  NegativeSampler(const TupleCorpus& corpus, const RelationRegistry& relations,
                  double exponent = kDefaultNegativeExponent);

  // Draws a word for (r, slot) different from `avoid`. Throws TrainingError
  // when the support has a single word or after kMaxResamples collisions.
  WordId draw(RelationId r, Role slot, WordId avoid, std::mt19937_64& rng) const;

  const std::vector<WordId>& support(RelationId r, Role slot) const;
  std::vector<double> probabilities(RelationId r, Role slot) const;
  double exponent() const { return exponent_; }

 private:
  struct Slot {
    std::vector<WordId> words;
    std::vector<double> probs;
    std::vector<double> cumulative;
  };
  const Slot& slot(RelationId r, Role role) const;

  std::vector<std::string> relation_names_;
  std::vector<Slot> slots_;  // index 2*r + role
  double exponent_;
};

struct NegativePair {
  Tuple corrupted_head;  // (h', r, t)
  Tuple corrupted_tail;  // (h, r, t')
};

NegativePair sample_negatives(const Tuple& positive, const NegativeSampler& sampler,
                              std::mt19937_64& rng);

}  // namespace mwe
