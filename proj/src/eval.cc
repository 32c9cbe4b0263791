#include "mwe/eval.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mwe/errors.h"
#include "text_util.h"

namespace mwe {

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("spearman: need at least 2 items");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::domain_error("undefined correlation");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

namespace {

// Per-group correlations are reported as NaN rather than aborting the whole
// evaluation when a group is too small or constant.
double rho_or_nan(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() < 2) return std::nan("");
  try {
    return spearman(pred, gold);
  } catch (const std::domain_error&) {
    return std::nan("");
  }
}

SpRow sp_row_from_json(const std::string& line, std::size_t line_no) {
  try {
    const auto j = nlohmann::json::parse(line);
    SpRow row;
    row.head = j.at("head").get<std::string>();
    row.relation = j.at("relation").get<std::string>();
    row.tail = j.at("tail").get<std::string>();
    row.gold = j.contains("score") ? j.at("score").get<double>()
                                   : j.at("plausibility").get<double>();
    return row;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("SP dataset line " + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace

SpDataset read_sp_dataset(std::istream& in) {
  SpDataset ds;
  std::string line;
  std::size_t line_no = 0;
  std::optional<bool> json;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (!json) json = line[0] == '{';
    if (*json) {
      ds.rows.push_back(sp_row_from_json(line, line_no));
      continue;
    }
    auto f = detail::split_tabs(line);
    if (f.size() != 4) {
      throw FormatError("SP dataset line " + std::to_string(line_no) +
                        ": expected head, relation, tail, score");
    }
    ds.rows.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2]),
                       detail::parse_double(f[3], line_no)});
    if (!std::isfinite(ds.rows.back().gold)) {
      throw FormatError("SP dataset line " + std::to_string(line_no) + ": non-finite score");
    }
  }
  return ds;
}

void write_sp_dataset(std::ostream& out, const SpDataset& ds) {
  const auto precision = out.precision(17);
  for (const SpRow& row : ds.rows) {
    out << row.head << '\t' << row.relation << '\t' << row.tail << '\t' << row.gold << '\n';
  }
  out.precision(precision);
}

SpResult eval_sp(const ModelParams& params, const Vocabulary& vocab,
                 const RelationRegistry& relations, const SpDataset& ds) {
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::map<std::string, std::size_t> skipped;

  SpResult result;
  for (const SpRow& row : ds.rows) {
    auto r = relations.find(row.relation);
    if (!r) throw std::out_of_range("relation not in model: " + row.relation);
    if (!groups.contains(row.relation)) {
      order.push_back(row.relation);
      groups[row.relation];
    }
    auto h = vocab.find(row.head);
    auto t = vocab.find(row.tail);
    if (!h || !t) {
      ++skipped[row.relation];
      ++result.skipped;
      continue;
    }
    auto& [pred, gold] = groups[row.relation];
    pred.push_back(plausibility(params, *h, *r, *t));
    gold.push_back(row.gold);
    ++result.scored;
  }
  if (result.scored == 0) throw std::runtime_error("no scorable rows");

  double sum = 0.0;
  std::size_t defined = 0;
  for (const std::string& name : order) {
    auto& [pred, gold] = groups[name];
    RelationScore rs{name, rho_or_nan(pred, gold), pred.size(), skipped[name]};
    if (std::isfinite(rs.rho)) {
      sum += rs.rho;
      ++defined;
    }
    result.per_relation.push_back(rs);
  }
  result.average_rho = defined == 0 ? std::nan("") : sum / static_cast<double>(defined);
  return result;
}

// ---------------------------------------------------------------------------

const char* pos_name(Pos pos) {
  switch (pos) {
    case Pos::kNoun: return "noun";
    case Pos::kVerb: return "verb";
    case Pos::kAdjective: return "adjective";
  }
  return "?";
}

std::optional<Pos> parse_pos(std::string_view text) {
  if (text == "noun" || text == "N" || text == "n") return Pos::kNoun;
  if (text == "verb" || text == "V" || text == "v") return Pos::kVerb;
  if (text == "adjective" || text == "A" || text == "a" || text == "adj") return Pos::kAdjective;
  return std::nullopt;
}

WsDataset read_ws_dataset(std::istream& in) {
  WsDataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool simlex = false;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto f = detail::split_tabs(line);
    if (ds.rows.empty() && !simlex && f.size() >= 4 && f[0] == "word1" && f[1] == "word2") {
      simlex = f[2] == "POS" && f[3] == "SimLex999";
      continue;  // header line
    }
    if (f.size() < 4 || (!simlex && f.size() != 4)) {
      throw FormatError("WS dataset line " + std::to_string(line_no) +
                        ": expected word1, word2, pos, score");
    }
    auto pos = parse_pos(f[2]);
    if (!pos) {
      throw FormatError("WS dataset line " + std::to_string(line_no) + ": unknown POS '" +
                        std::string(f[2]) + "'");
    }
    ds.rows.push_back({std::string(f[0]), std::string(f[1]), *pos,
                       detail::parse_double(f[3], line_no)});
  }
  return ds;
}

void write_ws_dataset(std::ostream& out, const WsDataset& ds) {
  const auto precision = out.precision(17);
  for (const WsRow& row : ds.rows) {
    out << row.word1 << '\t' << row.word2 << '\t' << pos_name(row.pos) << '\t' << row.gold
        << '\n';
  }
  out.precision(precision);
}

const char* combiner_name(Combiner c) {
  switch (c) {
    case Combiner::kHead: return "h";
    case Combiner::kTail: return "t";
    case Combiner::kSum: return "h+t";
    case Combiner::kConcat: return "concat";
  }
  return "?";
}

std::optional<Combiner> parse_combiner(std::string_view text) {
  if (text == "h" || text == "head") return Combiner::kHead;
  if (text == "t" || text == "tail") return Combiner::kTail;
  if (text == "h+t" || text == "sum") return Combiner::kSum;
  if (text == "concat" || text == "[h,t]") return Combiner::kConcat;
  return std::nullopt;
}

std::vector<double> word_vector(const ModelParams& params, WordId w, VectorSource source,
                                Combiner combiner) {
  auto side = [&](Role role) {
    if (source.relation) return compose(params, w, role, *source.relation);
    if (w >= params.dims().words) throw std::out_of_range("word id out of range");
    const auto row = params.center(role).row(w);
    return std::vector<double>(row.begin(), row.end());
  };
  switch (combiner) {
    case Combiner::kHead: return side(Role::kHead);
    case Combiner::kTail: return side(Role::kTail);
    case Combiner::kSum: {
      auto h = side(Role::kHead);
      const auto t = side(Role::kTail);
      for (std::size_t j = 0; j < h.size(); ++j) h[j] += t[j];
      return h;
    }
    case Combiner::kConcat: {
      auto h = side(Role::kHead);
      const auto t = side(Role::kTail);
      h.insert(h.end(), t.begin(), t.end());
      return h;
    }
  }
  throw std::logic_error("unreachable combiner");
}

WsResult eval_ws(const ModelParams& params, const Vocabulary& vocab, const WsDataset& ds,
                 VectorSource source, Combiner combiner) {
  WsResult result;
  std::vector<double> pred, gold;
  std::map<Pos, std::pair<std::vector<double>, std::vector<double>>> by_pos;
  for (const WsRow& row : ds.rows) {
    auto a = vocab.find(row.word1);
    auto b = vocab.find(row.word2);
    if (!a || !b) {
      ++result.skipped;
      continue;
    }
    const double sim = cosine(word_vector(params, *a, source, combiner),
                              word_vector(params, *b, source, combiner));
    pred.push_back(sim);
    gold.push_back(row.gold);
    by_pos[row.pos].first.push_back(sim);
    by_pos[row.pos].second.push_back(row.gold);
    ++result.scored;
  }
  if (result.scored == 0) throw std::runtime_error("no scorable rows");
  for (auto& [pos, lists] : by_pos) {
    result.per_pos.emplace_back(pos, rho_or_nan(lists.first, lists.second));
  }
  result.overall_rho = rho_or_nan(pred, gold);
  return result;
}

}  // namespace mwe
