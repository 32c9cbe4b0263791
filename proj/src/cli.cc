#include "mwe/cli.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "mwe/corpus.h"
#include "mwe/errors.h"
#include "mwe/eval.h"
#include "mwe/model.h"
#include "mwe/oracle.h"
#include "mwe/persistence.h"
#include "mwe/trainer.h"
#include "mwe/vocab.h"

namespace mwe {

namespace {

using json = nlohmann::json;

std::string fixed(double x, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) return;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::set<std::string> split_relations(const std::string& text) {
  std::set<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training flags shared by `train` and `sweep`.

struct TrainFlags {
  TrainConfig config;
  std::string lambda = "alt";
  std::string preset;
  bool neg_uniform = false;
  bool project_u_only = false;
  std::uint64_t min_count = kDefaultMinCount;
  std::string relations;  // empty = every relation in the tuple file
  CLI::Option* dim_opt = nullptr;
  CLI::Option* local_opt = nullptr;
  CLI::Option* eta_opt = nullptr;
};

void add_train_flags(CLI::App* sub, TrainFlags& f) {
  f.dim_opt = sub->add_option("--dim", f.config.dim, "Center dimension d")->capture_default_str();
  f.local_opt = sub->add_option("--local-dim", f.config.local_dim, "Local dimension s")
                    ->capture_default_str();
  sub->add_option("--drift", f.config.drift, "Maximum drift range a")->capture_default_str();
  sub->add_option("--scale-k", f.config.scale_k, "Projection scaling parameter k")
      ->capture_default_str();
  sub->add_option("--epochs", f.config.epochs, "Training epochs")->capture_default_str();
  f.eta_opt =
      sub->add_option("--eta0", f.config.eta0, "Initial learning rate")->capture_default_str();
  sub->add_option("--lambda", f.lambda, "Lambda schedule: alt or fixed:<x>")
      ->capture_default_str()
      ->check([](const std::string& text) -> std::string {
        try {
          LambdaSchedule::parse(text);
        } catch (const std::exception& e) {
          return e.what();
        }
        return {};
      });
  sub->add_option("--seed", f.config.seed, "Random seed")->capture_default_str();
  sub->add_option("--workers", f.config.workers, "Asynchronous SGD workers")
      ->envname("MWE_THREADS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--min-count", f.min_count, "Vocabulary frequency threshold")
      ->capture_default_str();
  sub->add_option("--relations", f.relations,
                  "Comma-separated relations to train on (default: all in the input)");
  sub->add_option("--count-cap", f.config.count_cap,
                  "Max visits of one tuple per epoch (0 = proportional to count)")
      ->capture_default_str();
  sub->add_flag("--neg-uniform", f.neg_uniform, "Uniform instead of unigram^0.75 negatives");
  sub->add_flag("--project-u-only", f.project_u_only,
                "Restore the drift bound by rescaling u alone");
  sub->add_option("--preset", f.preset, "Preset: desk (d=32, s=4, eta0=0.1)")
      ->check(CLI::IsMember({"desk"}));
}

TrainConfig resolve(const TrainFlags& f) {
  TrainConfig c = f.config;
  if (f.preset == "desk") {
    if (f.dim_opt->count() == 0) c.dim = 32;
    if (f.local_opt->count() == 0) c.local_dim = 4;
    if (f.eta_opt->count() == 0) c.eta0 = 0.1;
  }
  c.lambda = LambdaSchedule::parse(f.lambda);
  if (f.neg_uniform) c.negative_exponent = 0.0;
  if (f.project_u_only) c.projection = ProjectionMode::kScaleLocal;
  c.validate();
  return c;
}

void echo_config(const TrainConfig& c, std::ostream& err) {
  err << "# effective d=" << c.dim << " s=" << c.local_dim << " a=" << c.drift
      << " k=" << c.scale_k << " eta0=" << c.eta0 << " epochs=" << c.epochs
      << " lambda=" << c.lambda.to_string() << " seed=" << c.seed << " workers=" << c.workers
      << " negative_exponent=" << c.negative_exponent
      << " projection=" << (c.projection == ProjectionMode::kScaleBoth ? "both" : "u-only")
      << " count_cap=" << c.count_cap << '\n';
}

struct Pipeline {
  VocabBuild vocab;
  TupleCorpus corpus;
  std::size_t malformed_lines = 0;
};

Pipeline load_pipeline(const std::string& path, const TrainFlags& f, std::ostream& err) {
  auto in = open_in(path);
  TupleFile file = read_tuples(in);
  if (!f.relations.empty()) {
    const auto keep = split_relations(f.relations);
    std::erase_if(file.tuples, [&](const RawTuple& t) { return !keep.contains(t.relation); });
  }
  Pipeline p;
  p.malformed_lines = file.malformed;
  p.vocab = build_vocab(file.tuples, f.min_count);
  p.corpus = encode_corpus(file.tuples, p.vocab.vocab, p.vocab.relations);
  err << "# corpus: " << p.vocab.vocab.size() << " words, " << p.vocab.relations.size()
      << " relations, " << p.corpus.size() << " distinct tuples (" << p.corpus.total_count()
      << " total), " << p.corpus.dropped() << " dropped as OOV, " << file.malformed
      << " malformed lines\n";
  return p;
}

json epoch_json(const EpochReport& e) {
  return {{"epoch", e.epoch},       {"lambda", e.lambda},     {"eta_start", e.eta_start},
          {"mean_loss", e.mean_loss}, {"samples", e.samples}, {"clamps", e.clamps},
          {"projections", e.projections}, {"sweep_projections", e.sweep_projections}};
}

EpochCallback progress_printer(std::ostream& err, int epochs) {
  return [&err, epochs](const EpochReport& e, const ModelParams&) {
    const double rate = e.seconds > 0 ? static_cast<double>(e.samples) / e.seconds : 0.0;
    err << "epoch " << e.epoch << "/" << epochs << " lambda=" << e.lambda
        << " eta=" << e.eta_start << " loss=" << fixed(e.mean_loss)
        << " tuples/s=" << static_cast<long long>(rate) << '\n';
  };
}

json sp_json(const SpResult& r) {
  json rels = json::array();
  for (const RelationScore& s : r.per_relation) {
    rels.push_back({{"relation", s.relation},
                    {"rho", std::isfinite(s.rho) ? json(s.rho) : json(nullptr)},
                    {"scored", s.scored},
                    {"skipped", s.skipped}});
  }
  return {{"relations", rels},
          {"average_rho", std::isfinite(r.average_rho) ? json(r.average_rho) : json(nullptr)},
          {"scored", r.scored},
          {"skipped", r.skipped},
          {"coverage", r.coverage()}};
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n == 0) return std::nan("");
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

VectorSource parse_source(const std::string& text, const RelationRegistry& relations) {
  if (text == "center") return {};
  return {relations.id(text)};
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_extract(const std::vector<std::string>& inputs, const std::string& output,
                const std::string& relations, bool lowercase, std::ostream& out) {
  ExtractOptions options;
  options.relations = split_relations(relations);
  options.lowercase = lowercase;
  std::vector<RawTuple> tuples;
  std::size_t sentences = 0;
  for (const std::string& path : inputs) {
    auto in = open_in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto parsed = parse_conllu(buffer.str());
    sentences += parsed.size();
    auto extracted = extract_tuples(parsed, options);
    tuples.insert(tuples.end(), extracted.begin(), extracted.end());
  }
  const std::size_t edges = tuples.size();
  tuples = merge_tuples(std::move(tuples));
  auto file = open_out(output);
  write_tuples(file, tuples);
  out << "sentences\tedges\tdistinct_tuples\n"
      << sentences << '\t' << edges << '\t' << tuples.size() << '\n';
  return kExitOk;
}

int cmd_build_vocab(const std::string& input, const std::string& output,
                    std::string rels_output, std::uint64_t min_count, std::ostream& out) {
  auto in = open_in(input);
  const TupleFile file = read_tuples(in);
  const VocabBuild built = build_vocab(file.tuples, min_count);
  if (rels_output.empty()) rels_output = output + ".rels";
  auto vocab_out = open_out(output);
  write_vocab(vocab_out, built.vocab);
  auto rels_out = open_out(rels_output);
  write_relations(rels_out, built.relations);
  out << "words\trelations\tmalformed\n"
      << built.vocab.size() << '\t' << built.relations.size() << '\t'
      << built.malformed + file.malformed << '\n';
  return kExitOk;
}

int cmd_train(const TrainFlags& flags, const std::string& input, const std::string& output,
              const std::string& json_path, std::ostream& out, std::ostream& err) {
  const TrainConfig config = resolve(flags);
  echo_config(config, err);
  const Pipeline p = load_pipeline(input, flags, err);
  TrainResult result = train(p.corpus, p.vocab.vocab, p.vocab.relations, config,
                             progress_printer(err, config.epochs));

  Checkpoint checkpoint{std::move(result.params), p.vocab.vocab, p.vocab.relations,
                        static_cast<std::uint64_t>(config.epochs), config.seed};
  save_checkpoint(checkpoint, output);

  out << "epoch\tlambda\teta_start\tmean_loss\tclamps\tprojections\tsweep_projections\n";
  json epochs = json::array();
  for (const EpochReport& e : result.report.epochs) {
    out << e.epoch << '\t' << e.lambda << '\t' << fixed(e.eta_start, 8) << '\t'
        << fixed(e.mean_loss) << '\t' << e.clamps << '\t' << e.projections << '\t'
        << e.sweep_projections << '\n';
    epochs.push_back(epoch_json(e));
  }
  const ModelDims& d = checkpoint.params.dims();
  out << "# checkpoint " << output << " params=" << param_count(d.words, d.relations, d.dim,
                                                                 d.local_dim)
      << " bytes=" << checkpoint_bytes(checkpoint) << '\n';
  write_json(json_path, {{"checkpoint", output}, {"epochs", epochs}});
  return kExitOk;
}

int cmd_eval_sp(const std::string& model, const std::string& input, const std::string& json_path,
                std::ostream& out) {
  const Checkpoint c = load_checkpoint(model);
  auto in = open_in(input);
  const SpDataset ds = read_sp_dataset(in);
  const SpResult r = eval_sp(c.params, c.vocab, c.relations, ds);
  out << "relation\trho\tscored\tskipped\n";
  for (const RelationScore& s : r.per_relation) {
    out << s.relation << '\t' << fixed(s.rho) << '\t' << s.scored << '\t' << s.skipped << '\n';
  }
  out << "average\t" << fixed(r.average_rho) << '\t' << r.scored << '\t' << r.skipped << '\n';
  out << "# coverage " << fixed(r.coverage()) << '\n';
  write_json(json_path, sp_json(r));
  return kExitOk;
}

int cmd_eval_ws(const std::string& model, const std::string& input, const std::string& source,
                const std::string& combiner_text, const std::string& json_path,
                std::ostream& out) {
  const Checkpoint c = load_checkpoint(model);
  auto in = open_in(input);
  const WsDataset ds = read_ws_dataset(in);
  const Combiner combiner = *parse_combiner(combiner_text);
  const WsResult r = eval_ws(c.params, c.vocab, ds, parse_source(source, c.relations), combiner);
  out << "pos\trho\n";
  json per_pos = json::object();
  for (const auto& [pos, rho] : r.per_pos) {
    out << pos_name(pos) << '\t' << fixed(rho) << '\n';
    per_pos[pos_name(pos)] = std::isfinite(rho) ? json(rho) : json(nullptr);
  }
  out << "overall\t" << fixed(r.overall_rho) << '\n';
  out << "# source " << source << " combiner " << combiner_name(combiner) << " scored "
      << r.scored << " skipped " << r.skipped << " coverage " << fixed(r.coverage()) << '\n';
  write_json(json_path, {{"source", source},
                         {"combiner", combiner_name(combiner)},
                         {"per_pos", per_pos},
                         {"overall_rho", std::isfinite(r.overall_rho) ? json(r.overall_rho)
                                                                      : json(nullptr)},
                         {"scored", r.scored},
                         {"skipped", r.skipped},
                         {"coverage", r.coverage()}});
  return kExitOk;
}

int cmd_export(const std::string& model, const std::string& output, const std::string& source,
               const std::string& role, std::ostream& out) {
  const Checkpoint c = load_checkpoint(model);
  const Combiner combiner = *parse_combiner(role);
  export_text(c.params, c.vocab, c.relations, parse_source(source, c.relations), combiner,
              output);
  out << "rows\tdim\n"
      << c.vocab.size() << '\t'
      << (combiner == Combiner::kConcat ? 2 : 1) * c.params.dims().dim << '\n';
  return kExitOk;
}

int cmd_info(const std::string& model, const std::string& json_path, std::ostream& out) {
  const CheckpointHeader h = read_checkpoint_header(model);
  const Checkpoint c = load_checkpoint(model);
  const ModelDims& d = h.dims;
  const std::uint64_t count = param_count(d.words, d.relations, d.dim, d.local_dim);
  const std::uint64_t multi = multi_prototype_count(d.words, d.relations, d.dim);
  const std::uint64_t file_bytes = std::filesystem::file_size(model);
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"version", std::to_string(h.version)},
      {"words", std::to_string(d.words)},
      {"relations", std::to_string(d.relations)},
      {"dim", std::to_string(d.dim)},
      {"local_dim", std::to_string(d.local_dim)},
      {"drift", fixed(h.drift)},
      {"scale_k", fixed(h.scale_k)},
      {"epoch", std::to_string(h.epoch)},
      {"seed", std::to_string(h.seed)},
      {"param_count", std::to_string(count)},
      {"multi_prototype_count", std::to_string(multi)},
      {"size_ratio", fixed(static_cast<double>(count) / static_cast<double>(multi))},
      {"float32_bytes", std::to_string(4 * count)},
      {"file_bytes", std::to_string(file_bytes)},
      {"expected_file_bytes", std::to_string(checkpoint_bytes(c))},
  };
  out << "key\tvalue\n";
  json j = json::object();
  for (const auto& [k, v] : rows) {
    out << k << '\t' << v << '\n';
    j[k] = v;
  }
  json rels = json::array();
  for (const std::string& name : c.relations.names()) rels.push_back(name);
  j["relation_names"] = rels;
  write_json(json_path, j);
  return kExitOk;
}

int cmd_verify(std::size_t seeds, double eps, double tolerance, const std::string& json_path,
               std::ostream& out) {
  const auto rows = run_gradient_suite(seeds, eps);
  out << "seed\td\ts\tn\tm\tcoordinates\tmax_rel_error\tstatus\n";
  std::size_t passed = 0;
  json j = json::array();
  for (const GradSuiteRow& row : rows) {
    const bool ok = row.result.max_rel_error < tolerance;
    passed += ok;
    char err_buf[32];
    std::snprintf(err_buf, sizeof err_buf, "%.3e", row.result.max_rel_error);
    out << row.seed << '\t' << row.dims.dim << '\t' << row.dims.local_dim << '\t'
        << row.dims.words << '\t' << row.dims.relations << '\t' << row.result.coordinates << '\t'
        << err_buf << '\t' << (ok ? "PASS" : "FAIL") << '\n';
    j.push_back({{"seed", row.seed},
                 {"max_rel_error", row.result.max_rel_error},
                 {"coordinates", row.result.coordinates},
                 {"pass", ok}});
  }
  out << "# gradient check: " << passed << "/" << rows.size() << " passed (eps " << eps
      << ", tolerance " << tolerance << ")\n";
  write_json(json_path, {{"eps", eps}, {"tolerance", tolerance}, {"cases", j}});
  return passed == rows.size() ? kExitOk : kExitRuntime;
}

int cmd_sweep(const TrainFlags& flags, const std::string& param,
              const std::vector<double>& values, std::size_t seeds, const std::string& input,
              const std::string& gold_path, const std::string& json_path, std::ostream& out,
              std::ostream& err) {
  const TrainConfig base = resolve(flags);
  echo_config(base, err);
  const Pipeline p = load_pipeline(input, flags, err);
  auto gold_in = open_in(gold_path);
  const SpDataset gold = read_sp_dataset(gold_in);

  out << param << "\tmedian_average_rho\tseeds\n";
  json j = json::array();
  for (double value : values) {
    TrainConfig config = base;
    if (param == "s") {
      config.local_dim = static_cast<std::size_t>(value);
    } else {
      config.drift = value;
    }
    config.validate();
    std::vector<double> rhos;
    for (std::size_t k = 0; k < seeds; ++k) {
      config.seed = base.seed + k;
      const TrainResult result = train(p.corpus, p.vocab.vocab, p.vocab.relations, config);
      const SpResult sp = eval_sp(result.params, p.vocab.vocab, p.vocab.relations, gold);
      rhos.push_back(sp.average_rho);
      err << "# " << param << "=" << value << " seed=" << config.seed
          << " average_rho=" << fixed(sp.average_rho) << '\n';
      j.push_back({{"param", param}, {"value", value}, {"seed", config.seed},
                   {"result", sp_json(sp)}});
    }
    out << value << '\t' << fixed(median(rhos)) << '\t' << seeds << '\n';
  }
  write_json(json_path, {{"param", param}, {"runs", j}});
  return kExitOk;
}

int cmd_synth(const std::string& prefix, std::size_t groups, std::size_t words,
              std::size_t relations, std::size_t tuples, std::uint64_t seed, std::ostream& out) {
  const SynthSpec spec = planted_spec(groups, words, relations, tuples, seed);
  const SynthCorpus corpus = synth_corpus(spec);
  auto tuples_out = open_out(prefix + ".tuples");
  write_tuples(tuples_out, corpus.tuples);
  auto sp_out = open_out(prefix + ".sp.tsv");
  write_sp_dataset(sp_out, corpus.gold);
  auto ws_out = open_out(prefix + ".ws.tsv");
  write_ws_dataset(ws_out, corpus.similarity);
  out << "file\trows\n"
      << prefix << ".tuples\t" << corpus.tuples.size() << '\n'
      << prefix << ".sp.tsv\t" << corpus.gold.rows.size() << '\n'
      << prefix << ".ws.tsv\t" << corpus.similarity.rows.size() << '\n';
  return kExitOk;
}

// Flat `key=value` file -> `--key value` arguments. Keys already present in
// `explicit_args` are skipped so command-line flags win.
std::vector<std::string> config_args(const std::string& path,
                                     const std::vector<std::string>& explicit_args) {
  auto in = open_in(path);
  auto trim = [](std::string t) {
    const auto b = t.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = t.find_last_not_of(" \t\r");
    t = t.substr(b, e - b + 1);
    if (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front()) {
      t = t.substr(1, t.size() - 2);
    }
    return t;
  };
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CLI::ConversionError("config line without '=': " + line);
    const std::string flag = "--" + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const bool given = std::any_of(explicit_args.begin(), explicit_args.end(), [&](const auto& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given || value == "false") continue;
    out.push_back(flag);
    if (value != "true") out.push_back(value);
  }
  return out;
}

// Expands `--config FILE` into arguments placed right after the subcommand.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    std::size_t width = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      width = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      width = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + width));
    const auto extra = config_args(path, args);
    args.insert(args.begin() + 2, extra.begin(), extra.end());
    break;
  }
  return args;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiplex word embeddings: train and evaluate relation-aware embeddings", "mwe"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::function<int()> action;

  // extract
  std::vector<std::string> extract_inputs;
  std::string extract_output, extract_relations = "nsubj,dobj,amod";
  bool lowercase = false;
  auto* extract = app.add_subcommand("extract", "CoNLL-U files -> tuple file");
  extract->add_option("--input", extract_inputs, "CoNLL-U input file(s)")->required();
  extract->add_option("--output", extract_output, "Tuple file to write")->required();
  extract->add_option("--relations", extract_relations, "Comma-separated deprels to keep")
      ->capture_default_str();
  extract->add_flag("--lowercase", lowercase, "Lowercase word forms");
  extract->callback([&] {
    action = [&] { return cmd_extract(extract_inputs, extract_output, extract_relations,
                                      lowercase, out); };
  });

  // build-vocab
  std::string bv_input, bv_output, bv_rels;
  std::uint64_t bv_min_count = kDefaultMinCount;
  auto* build = app.add_subcommand("build-vocab", "Tuple file -> vocabulary and relation files");
  build->add_option("--input", bv_input, "Tuple file")->required();
  build->add_option("--output", bv_output, "Vocabulary file to write")->required();
  build->add_option("--rels-output", bv_rels, "Relation file (default: <output>.rels)");
  build->add_option("--min-count", bv_min_count, "Frequency threshold")->capture_default_str();
  build->callback([&] {
    action = [&] { return cmd_build_vocab(bv_input, bv_output, bv_rels, bv_min_count, out); };
  });

  // train
  TrainFlags train_flags;
  std::string train_input, train_output, train_json;
  auto* train_cmd = app.add_subcommand("train", "Tuple file -> checkpoint");
  std::string config_file;
  train_cmd->add_option("--config", config_file, "Flat key=value settings file; flags override it");
  train_cmd->add_option("--input", train_input, "Tuple file")->required();
  train_cmd->add_option("--output", train_output, "Checkpoint to write")->required();
  train_cmd->add_option("--json", train_json, "Also write the training report as JSON");
  add_train_flags(train_cmd, train_flags);
  train_cmd->callback([&] {
    action = [&] {
      return cmd_train(train_flags, train_input, train_output, train_json, out, err);
    };
  });

  // eval-sp
  std::string sp_model, sp_input, sp_json_path;
  auto* eval_sp_cmd = app.add_subcommand("eval-sp", "Selectional preference evaluation");
  eval_sp_cmd->add_option("--model", sp_model, "Checkpoint")->required();
  eval_sp_cmd->add_option("--input", sp_input, "SP dataset (TSV or JSON lines)")->required();
  eval_sp_cmd->add_option("--json", sp_json_path, "Also write results as JSON");
  eval_sp_cmd->callback([&] { action = [&] { return cmd_eval_sp(sp_model, sp_input, sp_json_path,
                                                                out); }; });

  // eval-ws
  std::string ws_model, ws_input, ws_source = "center", ws_combiner = "h", ws_json_path;
  auto* eval_ws_cmd = app.add_subcommand("eval-ws", "Word similarity evaluation");
  eval_ws_cmd->add_option("--model", ws_model, "Checkpoint")->required();
  eval_ws_cmd->add_option("--input", ws_input, "WS dataset (generic TSV or SimLex-999)")
      ->required();
  eval_ws_cmd->add_option("--source", ws_source, "center or a relation name")
      ->capture_default_str();
  eval_ws_cmd->add_option("--combiner", ws_combiner, "h, t, h+t or concat")
      ->capture_default_str()
      ->check(CLI::IsMember({"h", "t", "h+t", "concat"}));
  eval_ws_cmd->add_option("--json", ws_json_path, "Also write results as JSON");
  eval_ws_cmd->callback([&] {
    action = [&] {
      return cmd_eval_ws(ws_model, ws_input, ws_source, ws_combiner, ws_json_path, out);
    };
  });

  // export
  std::string ex_model, ex_output, ex_source = "center", ex_role = "h";
  auto* export_cmd = app.add_subcommand("export", "Checkpoint -> word2vec-style text vectors");
  export_cmd->add_option("--model", ex_model, "Checkpoint")->required();
  export_cmd->add_option("--output", ex_output, "Text file to write")->required();
  export_cmd->add_option("--source", ex_source, "center or a relation name")
      ->capture_default_str();
  export_cmd->add_option("--role", ex_role, "h, t, h+t or concat")
      ->capture_default_str()
      ->check(CLI::IsMember({"h", "t", "h+t", "concat"}));
  export_cmd->callback([&] {
    action = [&] { return cmd_export(ex_model, ex_output, ex_source, ex_role, out); };
  });

  // info
  std::string info_model, info_json;
  auto* info = app.add_subcommand("info", "Print checkpoint header and parameter counts");
  info->add_option("--model", info_model, "Checkpoint")->required();
  info->add_option("--json", info_json, "Also write as JSON");
  info->callback([&] { action = [&] { return cmd_info(info_model, info_json, out); }; });

  // verify
  std::size_t verify_seeds = 100;
  double verify_eps = 1e-6, verify_tol = 1e-4;
  std::string verify_json;
  auto* verify = app.add_subcommand("verify", "Finite-difference check of the analytic gradients");
  verify->add_option("--seeds", verify_seeds, "Random configurations")->capture_default_str();
  verify->add_option("--eps", verify_eps, "Central difference step")->capture_default_str();
  verify->add_option("--tolerance", verify_tol, "Max relative error")->capture_default_str();
  verify->add_option("--json", verify_json, "Also write as JSON");
  verify->callback([&] {
    action = [&] { return cmd_verify(verify_seeds, verify_eps, verify_tol, verify_json, out); };
  });

  // sweep
  TrainFlags sweep_flags;
  std::string sweep_param = "s", sweep_input, sweep_gold, sweep_json;
  std::vector<double> sweep_values;
  std::size_t sweep_seeds = 1;
  auto* sweep = app.add_subcommand("sweep", "Train over a grid of s or a and report SP rho");
  sweep->add_option("--config", config_file, "Flat key=value settings file; flags override it");
  sweep->add_option("--param", sweep_param, "Hyperparameter to vary: s or a")
      ->capture_default_str()
      ->check(CLI::IsMember({"s", "a"}));
  sweep->add_option("--values", sweep_values, "Comma-separated values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "Seeds per value (median reported)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--input", sweep_input, "Tuple file")->required();
  sweep->add_option("--gold", sweep_gold, "SP dataset")->required();
  sweep->add_option("--json", sweep_json, "Also write every run as JSON");
  add_train_flags(sweep, sweep_flags);
  sweep->callback([&] {
    action = [&] {
      return cmd_sweep(sweep_flags, sweep_param, sweep_values, sweep_seeds, sweep_input,
                       sweep_gold, sweep_json, out, err);
    };
  });

  // synth
  std::string synth_prefix;
  std::size_t synth_groups = 4, synth_words = 50, synth_relations = 3, synth_tuples = 50000 / 3;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "Write a planted-preference corpus and gold sets");
  synth->add_option("--output", synth_prefix,
                    "Prefix for <prefix>.tuples, <prefix>.sp.tsv and <prefix>.ws.tsv")
      ->required();
  synth->add_option("--groups", synth_groups, "Word groups")->capture_default_str();
  synth->add_option("--words-per-group", synth_words, "Words per group")->capture_default_str();
  synth->add_option("--relation-count", synth_relations, "Relations")->capture_default_str();
  synth->add_option("--tuples", synth_tuples, "Tuples per relation")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
  synth->callback([&] {
    action = [&] {
      return cmd_synth(synth_prefix, synth_groups, synth_words, synth_relations, synth_tuples,
                       synth_seed, out);
    };
  });

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  try {
    std::reverse(args.begin() + 1, args.end());
    args.erase(args.begin());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (const CLI::App* sub : app.get_subcommands()) {
    std::istringstream settings(sub->config_to_str(true, false));
    std::string line;
    // Training flags are echoed after preset resolution instead.
    static const std::set<std::string> kResolved = {
        "dim",  "local-dim", "drift",   "scale-k",   "epochs",      "eta0",           "lambda",
        "seed", "workers",   "preset",  "count-cap", "neg-uniform", "project-u-only"};
    const bool trains = sub->get_name() == "train" || sub->get_name() == "sweep";
    while (std::getline(settings, line)) {
      if (line.empty()) continue;
      if (trains && kResolved.contains(line.substr(0, line.find('=')))) continue;
      err << "# setting " << sub->get_name() << "." << line << '\n';
    }
  }

  try {
    return action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace mwe
