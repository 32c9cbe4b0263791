#include "mwe/corpus.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "mwe/errors.h"
#include "text_util.h"

namespace mwe {

namespace {

std::string lowercase_ascii(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::vector<ConlluSentence> parse_conllu(std::string_view text) {
  std::vector<ConlluSentence> sentences;
  ConlluSentence current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    detail::strip_cr(line);

    if (line.empty()) {
      if (!current.empty()) sentences.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (line[0] == '#') continue;

    auto cols = detail::split_tabs(line);
    if (cols.size() != 10) {
      throw FormatError("CoNLL-U line " + std::to_string(line_no) + ": expected 10 columns, got " +
                        std::to_string(cols.size()));
    }
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) {
      continue;  // multiword token range or empty node
    }
    std::int64_t token_id = 0;
    if (!detail::try_parse_i64(id, token_id) || token_id < 1) {
      throw FormatError("CoNLL-U line " + std::to_string(line_no) + ": bad token id '" +
                        std::string(id) + "'");
    }
    std::int64_t head = -1;
    if (cols[6] != "_" && (!detail::try_parse_i64(cols[6], head) || head < 0)) {
      throw FormatError("CoNLL-U line " + std::to_string(line_no) + ": bad head '" +
                        std::string(cols[6]) + "'");
    }
    current.push_back({static_cast<int>(token_id), std::string(cols[1]), static_cast<int>(head),
                       std::string(cols[7])});
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

std::vector<RawTuple> extract_tuples(const std::vector<ConlluSentence>& sentences,
                                     const ExtractOptions& options) {
  std::vector<RawTuple> out;
  for (const ConlluSentence& sentence : sentences) {
    std::map<int, const ConlluToken*> by_id;
    for (const ConlluToken& token : sentence) by_id[token.id] = &token;
    for (const ConlluToken& dependent : sentence) {
      if (dependent.head <= 0 || !options.relations.contains(dependent.deprel)) continue;
      auto governor = by_id.find(dependent.head);
      if (governor == by_id.end()) continue;
      RawTuple t{governor->second->form, dependent.deprel, dependent.form, 1};
      if (options.lowercase) {
        t.head = lowercase_ascii(std::move(t.head));
        t.tail = lowercase_ascii(std::move(t.tail));
      }
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<RawTuple> merge_tuples(std::vector<RawTuple> tuples) {
  std::map<std::tuple<std::string, std::string, std::string>, std::uint64_t> merged;
  for (RawTuple& t : tuples) {
    merged[{std::move(t.head), std::move(t.relation), std::move(t.tail)}] += t.count;
  }
  std::vector<RawTuple> out;
  out.reserve(merged.size());
  for (auto& [key, count] : merged) {
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), count});
  }
  return out;
}

void write_tuples(std::ostream& out, const std::vector<RawTuple>& tuples) {
  out << "#MWE-TUPLES v1\n";
  for (const RawTuple& t : tuples) {
    out << t.head << '\t' << t.relation << '\t' << t.tail << '\t' << t.count << '\n';
  }
}

TupleFile read_tuples(std::istream& in) {
  TupleFile file;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("#MWE-TUPLES: missing header");
  detail::strip_cr(line);
  if (line.rfind("#MWE-TUPLES ", 0) != 0) {
    throw FormatError("#MWE-TUPLES: bad header '" + line + "'");
  }
  if (line != "#MWE-TUPLES v1") {
    throw FormatError("#MWE-TUPLES: unsupported version in '" + line + "'");
  }
  while (std::getline(in, line)) {
    detail::strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = detail::split_tabs(line);
    std::uint64_t count = 0;
    if (fields.size() != 4 || fields[0].empty() || fields[1].empty() || fields[2].empty() ||
        !detail::try_parse_u64(fields[3], count) || count == 0) {
      ++file.malformed;
      continue;
    }
    file.tuples.push_back(
        {std::string(fields[0]), std::string(fields[1]), std::string(fields[2]), count});
  }
  return file;
}

TupleCorpus::TupleCorpus(std::vector<TupleRecord> records, std::size_t relation_count)
    : records_(std::move(records)),
      ranges_(relation_count, {0, 0}),
      head_marginals_(relation_count),
      tail_marginals_(relation_count) {
  std::sort(records_.begin(), records_.end(), [](const TupleRecord& a, const TupleRecord& b) {
    return std::tie(a.tuple.relation, a.tuple.head, a.tuple.tail) <
           std::tie(b.tuple.relation, b.tuple.head, b.tuple.tail);
  });

  std::vector<std::map<WordId, std::uint64_t>> heads(relation_count), tails(relation_count);
  std::size_t i = 0;
  for (RelationId r = 0; r < relation_count; ++r) {
    ranges_[r].first = i;
    while (i < records_.size() && records_[i].tuple.relation == r) {
      const TupleRecord& rec = records_[i];
      heads[r][rec.tuple.head] += rec.count;
      tails[r][rec.tuple.tail] += rec.count;
      ++i;
    }
    ranges_[r].second = i;
  }
  if (i != records_.size()) {
    throw std::invalid_argument("TupleCorpus: relation id out of range");
  }
  for (RelationId r = 0; r < relation_count; ++r) {
    for (auto [w, c] : heads[r]) head_marginals_[r].push_back({w, c});
    for (auto [w, c] : tails[r]) tail_marginals_[r].push_back({w, c});
  }
}

const std::vector<SlotCount>& TupleCorpus::marginal(RelationId r, Role slot) const {
  return slot == Role::kHead ? head_marginals_.at(r) : tail_marginals_.at(r);
}

std::uint64_t TupleCorpus::total_count() const {
  std::uint64_t total = 0;
  for (const TupleRecord& rec : records_) total += rec.count;
  return total;
}

TupleCorpus encode_corpus(const std::vector<RawTuple>& raw, const Vocabulary& vocab,
                          const RelationRegistry& relations) {
  std::map<std::tuple<RelationId, WordId, WordId>, std::uint64_t> merged;
  std::size_t dropped = 0;
  for (const RawTuple& t : raw) {
    const RelationId r = relations.id(t.relation);
    auto head = vocab.find(t.head);
    auto tail = vocab.find(t.tail);
    if (!head || !tail) {
      ++dropped;
      continue;
    }
    merged[{r, *head, *tail}] += t.count;
  }
  std::vector<TupleRecord> records;
  records.reserve(merged.size());
  for (auto& [key, count] : merged) {
    records.push_back({{std::get<1>(key), std::get<0>(key), std::get<2>(key)}, count});
  }
  TupleCorpus corpus(std::move(records), relations.size());
  corpus.set_dropped(dropped);
  return corpus;
}

NegativeSampler::NegativeSampler(const TupleCorpus& corpus, const RelationRegistry& relations,
                                 double exponent)
    : relation_names_(relations.names()), exponent_(exponent) {
  if (relations.size() != corpus.relation_count()) {
    throw std::invalid_argument("NegativeSampler: registry and corpus disagree on relations");
  }
  slots_.resize(2 * corpus.relation_count());
  for (RelationId r = 0; r < corpus.relation_count(); ++r) {
    for (Role role : {Role::kHead, Role::kTail}) {
      Slot& s = slots_[2 * r + static_cast<int>(role)];
      double total = 0.0;
      for (const SlotCount& sc : corpus.marginal(r, role)) {
        s.words.push_back(sc.word);
        const double weight = std::pow(static_cast<double>(sc.count), exponent);
        s.probs.push_back(weight);
        total += weight;
      }
      double running = 0.0;
      for (double& p : s.probs) {
        p /= total;
        running += p;
        s.cumulative.push_back(running);
      }
      if (!s.cumulative.empty()) s.cumulative.back() = 1.0;
    }
  }
}

const NegativeSampler::Slot& NegativeSampler::slot(RelationId r, Role role) const {
  return slots_.at(2 * static_cast<std::size_t>(r) + static_cast<int>(role));
}

const std::vector<WordId>& NegativeSampler::support(RelationId r, Role role) const {
  return slot(r, role).words;
}

std::vector<double> NegativeSampler::probabilities(RelationId r, Role role) const {
  return slot(r, role).probs;
}

WordId NegativeSampler::draw(RelationId r, Role role, WordId avoid, std::mt19937_64& rng) const {
  const Slot& s = slot(r, role);
  if (s.words.size() < 2) {
    throw TrainingError("cannot corrupt the " + std::string(role_name(role)) +
                        " slot of relation '" + relation_names_.at(r) + "': support has " +
                        std::to_string(s.words.size()) + " word(s)");
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    const double u = uniform(rng);
    auto it = std::upper_bound(s.cumulative.begin(), s.cumulative.end(), u);
    if (it == s.cumulative.end()) --it;
    const WordId w = s.words[static_cast<std::size_t>(it - s.cumulative.begin())];
    if (w != avoid) return w;
  }
  throw TrainingError("negative sampling for relation '" + relation_names_.at(r) + "' " +
                      role_name(role) + " slot collided " + std::to_string(kMaxResamples) +
                      " times");
}

NegativePair sample_negatives(const Tuple& positive, const NegativeSampler& sampler,
                              std::mt19937_64& rng) {
  NegativePair pair{positive, positive};
  pair.corrupted_head.head = sampler.draw(positive.relation, Role::kHead, positive.head, rng);
  pair.corrupted_tail.tail = sampler.draw(positive.relation, Role::kTail, positive.tail, rng);
  return pair;
}

}  // namespace mwe
