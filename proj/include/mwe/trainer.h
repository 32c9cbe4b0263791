#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mwe/corpus.h"
#include "mwe/model.h"

namespace mwe {

// Alternating: lambda = 1 for the first ceil(E/2) epochs, 0 afterwards.
// Fixed: the same lambda every epoch.
struct LambdaSchedule {
  bool alternating = true;
  double fixed_value = 1.0;

  static LambdaSchedule alternate() { return {true, 1.0}; }
  static LambdaSchedule fixed(double value) { return {false, value}; }

  // Accepts "alt" / "alternating" or "fixed:<x>".
  static LambdaSchedule parse(const std::string& text);
  std::string to_string() const;
};

struct TrainConfig {
  std::size_t dim = 300;
  std::size_t local_dim = 10;
  double drift = 1.0;
  double scale_k = 0.8;
  double eta0 = 0.025;
  int epochs = 5;
  LambdaSchedule lambda;
  std::uint64_t seed = 1;
  int workers = 1;

  double negative_exponent = kDefaultNegativeExponent;  // 0 = uniform negatives
  ProjectionMode projection = ProjectionMode::kScaleBoth;
  std::uint64_t count_cap = 0;  // max visits of one record per epoch; 0 = no cap

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

// One positive tuple and its two corruptions; targets are 1, 0, 0.
struct TrainingSample {
  Tuple positive;
  Tuple corrupted_head;  // t_n1 = (h', r, t)
  Tuple corrupted_tail;  // t_n2 = (h, r, t')
};

inline constexpr double kLogClamp = 1e-12;

// -log sigma(f(t_p)) - log sigma(-f(t_n2)) - log sigma(-f(t_n1)). Each log
// argument is clamped below by kLogClamp; clamp events are added to
// *clamp_count when given.
double tuple_loss(const ModelParams& params, const TrainingSample& sample,
                  std::size_t* clamp_count = nullptr);

struct StepStats {
  double loss = 0.0;  // loss of the three tuples at the moment each was applied
  std::size_t clamps = 0;
  std::size_t projections = 0;
};

// Applies the SGD update for t_p, t_n1 and t_n2 in turn, each followed by
// drift projection of the two touched (u, X) pairs. Throws TrainingError on a
// non-finite gradient.
StepStats sgd_step(ModelParams& params, const TrainingSample& sample, double lambda, double eta,
                   ProjectionMode mode = ProjectionMode::kScaleBoth);

// 1-based epoch index.
double lambda_at(int epoch, int total_epochs, const LambdaSchedule& schedule = {});

inline constexpr double kMinLearningRateFraction = 1e-4;

// eta0 * max(1e-4, 1 - progress).
double lr_at(double progress, double eta0);

struct EpochReport {
  int epoch = 0;
  double lambda = 0.0;
  double eta_start = 0.0;
  double mean_loss = 0.0;
  std::uint64_t samples = 0;
  std::size_t clamps = 0;
  std::size_t projections = 0;      // fired inside sgd_step
  std::size_t sweep_projections = 0;  // fired by the end-of-epoch sweep
  double seconds = 0.0;             // wall time; excluded from deterministic output
};

struct TrainReport {
  std::vector<EpochReport> epochs;
};

// Called after each epoch (including its projection sweep).
using EpochCallback = std::function<void(const EpochReport&, const ModelParams&)>;

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

// Trains from a random initialisation. Throws std::invalid_argument on an
// empty corpus and TrainingError when a slot cannot be corrupted.
TrainResult train(const TupleCorpus& corpus, const Vocabulary& vocab,
                  const RelationRegistry& relations, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Projects every (word, role, relation) once. Returns the number of
// projections that fired.
std::size_t project_all(ModelParams& params, ProjectionMode mode);

}  // namespace mwe
