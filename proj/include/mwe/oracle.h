#pragma once

// Independent verification machinery: finite differences over the whole
// parameter vector, a gradient checker for the per-tuple loss, and a
// generator for corpora with a planted selectional-preference structure.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mwe/eval.h"
#include "mwe/model.h"
#include "mwe/trainer.h"
#include "mwe/vocab.h"

namespace mwe {

using ScalarFn = std::function<double(std::span<const double>)>;

// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps). Throws
// std::domain_error naming the coordinate when f is not finite there.
std::vector<double> numeric_grad(const ScalarFn& f, std::span<const double> point, double eps);

// Parameter vector in ModelParams::for_each_tensor order.
std::vector<double> flatten(const ModelParams& params);
void unflatten(std::span<const double> values, ModelParams& params);

// Gradient of tuple_loss w.r.t. every parameter, flattened. Built from the
// same per-tuple terms sgd_step multiplies by eta.
std::vector<double> analytic_gradient(const ModelParams& params, const TrainingSample& sample);

// Flattened mask of coordinates the sample can influence: center and local
// rows of the words involved and the relation's two transforms.
std::vector<bool> touched_coordinates(const ModelParams& params, const TrainingSample& sample);

inline constexpr double kRelErrorFloor = 1e-8;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;  // touched coordinates compared
};

// |a - n| / max(|a|, |n|, 1e-8), maximised over touched coordinates.
GradCheckResult compare_gradients(std::span<const double> analytic,
                                  std::span<const double> numeric,
                                  const std::vector<bool>& touched);

GradCheckResult grad_check(const ModelParams& params, const TrainingSample& sample,
                           double eps = 1e-6);

// A small model with every tensor drawn from U(-1, 1) and a valid sample.
struct GradCheckCase {
  ModelParams params;
  TrainingSample sample;
};
GradCheckCase random_grad_case(std::uint64_t seed, std::size_t max_dim = 8,
                               std::size_t max_local_dim = 3);

struct GradSuiteRow {
  std::uint64_t seed = 0;
  ModelDims dims;
  GradCheckResult result;
};

std::vector<GradSuiteRow> run_gradient_suite(std::size_t seeds, double eps = 1e-6,
                                             std::uint64_t first_seed = 1);

// ---------------------------------------------------------------------------
// Planted selectional preference

struct SynthSpec {
  std::size_t words_per_group = 50;
  std::size_t groups = 4;
  std::vector<std::string> relations;
  std::vector<Matrix> compatibility;  // per relation, groups x groups, entries in [0, 1]
  std::size_t tuples_per_relation = 10000;
  std::size_t gold_pairs_per_cell = 25;
  std::uint64_t seed = 1;

  void validate() const;
};

// Graded default: `relations` relations over `groups` groups, each relation
// mixing a shared preference pattern with a relation-specific one.
SynthSpec planted_spec(std::size_t groups = 4, std::size_t words_per_group = 50,
                       std::size_t relations = 3, std::size_t tuples_per_relation = 50000 / 3,
                       std::uint64_t seed = 1);

struct SynthCorpus {
  std::vector<RawTuple> tuples;  // merged, sorted
  SpDataset gold;                // sampled (head, relation, tail) with planted plausibility
  WsDataset similarity;          // word pairs scored by group-profile similarity
};

// Word names are `g<group>_w<index>`. Tuples pick a (head group, tail group)
// cell with probability proportional to its compatibility, then a uniform
// word from each group. Throws std::invalid_argument on an all-zero matrix.
SynthCorpus synth_corpus(const SynthSpec& spec);

std::string synth_word(std::size_t group, std::size_t index);

}  // namespace mwe
