#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mwe/model.h"
#include "mwe/vocab.h"

namespace mwe {

// Average ranks (1-based); tied values share the mean of their rank span.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks. Throws std::invalid_argument on
// length mismatch or fewer than 2 items, and std::domain_error
// ("undefined correlation") when either list is constant.
double spearman(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------------------
// Selectional preference

struct SpRow {
  std::string head;
  std::string relation;
  std::string tail;
  double gold = 0.0;
};

struct SpDataset {
  std::vector<SpRow> rows;
};

// Generic TSV `head<TAB>relation<TAB>tail<TAB>score`, or JSON lines with
// keys head, relation, tail and score (alias: plausibility). Lines starting
// with '#' are skipped. Format is detected from the first content line.
SpDataset read_sp_dataset(std::istream& in);
void write_sp_dataset(std::ostream& out, const SpDataset& ds);

struct RelationScore {
  std::string relation;
  double rho = 0.0;  // NaN with fewer than 2 rows or constant predictions/gold
  std::size_t scored = 0;
  std::size_t skipped = 0;
};

struct SpResult {
  std::vector<RelationScore> per_relation;  // in order of first appearance
  double average_rho = 0.0;  // unweighted mean over relations with a defined rho
  std::size_t scored = 0;
  std::size_t skipped = 0;
  double coverage() const {
    const std::size_t total = scored + skipped;
    return total == 0 ? 0.0 : static_cast<double>(scored) / static_cast<double>(total);
  }
};

// Rows whose head or tail is out of vocabulary are skipped. Throws
// std::out_of_range naming a relation unknown to the model and
// std::runtime_error("no scorable rows") when nothing can be scored.
SpResult eval_sp(const ModelParams& params, const Vocabulary& vocab,
                 const RelationRegistry& relations, const SpDataset& ds);

// ---------------------------------------------------------------------------
// Word similarity

enum class Pos { kNoun, kVerb, kAdjective };

const char* pos_name(Pos pos);
std::optional<Pos> parse_pos(std::string_view text);  // noun/verb/adjective or N/V/A

struct WsRow {
  std::string word1;
  std::string word2;
  Pos pos = Pos::kNoun;
  double gold = 0.0;
};

struct WsDataset {
  std::vector<WsRow> rows;
};

// Generic TSV `word1<TAB>word2<TAB>pos<TAB>score`, or SimLex-999 (detected
// by its `word1 word2 POS SimLex999 ...` header).
WsDataset read_ws_dataset(std::istream& in);
void write_ws_dataset(std::ostream& out, const WsDataset& ds);

// Which embedding a word vector is built from.
struct VectorSource {
  std::optional<RelationId> relation;  // nullopt = raw center embeddings
};

enum class Combiner { kHead, kTail, kSum, kConcat };

const char* combiner_name(Combiner c);
std::optional<Combiner> parse_combiner(std::string_view text);  // h, t, h+t, concat

std::vector<double> word_vector(const ModelParams& params, WordId w, VectorSource source,
                                Combiner combiner);

struct WsResult {
  std::vector<std::pair<Pos, double>> per_pos;  // NaN when a POS group is degenerate
  double overall_rho = 0.0;
  std::size_t scored = 0;
  std::size_t skipped = 0;
  double coverage() const {
    const std::size_t total = scored + skipped;
    return total == 0 ? 0.0 : static_cast<double>(scored) / static_cast<double>(total);
  }
};

WsResult eval_ws(const ModelParams& params, const Vocabulary& vocab, const WsDataset& ds,
                 VectorSource source, Combiner combiner);

}  // namespace mwe
