#include "mwe/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kernels.h"
#include "mwe/errors.h"

namespace mwe {

LambdaSchedule LambdaSchedule::parse(const std::string& text) {
  if (text == "alt" || text == "alternating") return alternate();
  const std::string prefix = "fixed:";
  if (text.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text.substr(prefix.size()), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() - prefix.size()) {
      throw std::invalid_argument("bad lambda value in '" + text + "'");
    }
    if (!(value >= 0.0 && value <= 1.0)) {
      throw std::invalid_argument("fixed lambda must be in [0, 1], got '" + text + "'");
    }
    return fixed(value);
  }
  throw std::invalid_argument("lambda schedule must be 'alt' or 'fixed:<x>', got '" + text + "'");
}

std::string LambdaSchedule::to_string() const {
  if (alternating) return "alt";
  std::ostringstream out;
  out << "fixed:" << fixed_value;
  return out.str();
}

void TrainConfig::validate() const {
  if (dim == 0 || local_dim == 0 || local_dim > dim) {
    throw std::invalid_argument("require 0 < local_dim <= dim");
  }
  if (!(drift > 0.0)) throw std::invalid_argument("drift range a must be positive");
  if (!(scale_k > 0.0 && scale_k <= 1.0)) throw std::invalid_argument("k must be in (0, 1]");
  if (!(eta0 > 0.0)) throw std::invalid_argument("eta0 must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (workers < 1) throw std::invalid_argument("workers must be positive");
  if (!lambda.alternating && !(lambda.fixed_value >= 0.0 && lambda.fixed_value <= 1.0)) {
    throw std::invalid_argument("fixed lambda must be in [0, 1]");
  }
  if (!(negative_exponent >= 0.0)) throw std::invalid_argument("negative exponent must be >= 0");
}

namespace {

double neg_log_sigmoid(double x, std::size_t& clamps) {
  const double p = detail::sigmoid(x);
  if (p < kLogClamp) {
    ++clamps;
    return -std::log(kLogClamp);
  }
  return -std::log(p);
}

std::string describe(const Tuple& t) {
  std::ostringstream out;
  out << "(head=" << t.head << ", relation=" << t.relation << ", tail=" << t.tail << ")";
  return out.str();
}

template <typename Access>
struct StepWorkspace {
  detail::TupleGradient gradient;
  std::vector<double> scratch;
};

template <typename Access>
StepStats sgd_step_impl(ModelParams& params, const TrainingSample& sample, double lambda,
                        double eta, ProjectionMode mode, StepWorkspace<Access>& ws) {
  StepStats stats;
  const std::pair<const Tuple*, double> batch[3] = {
      {&sample.positive, 1.0}, {&sample.corrupted_head, 0.0}, {&sample.corrupted_tail, 0.0}};
  for (const auto& [tuple, target] : batch) {
    detail::compute_tuple_gradient<Access>(params, *tuple, target, ws.gradient);
    if (!detail::gradient_finite(ws.gradient)) {
      throw TrainingError("non-finite gradient for tuple " + describe(*tuple) +
                          " (score=" + std::to_string(ws.gradient.score) + ")");
    }
    stats.loss += neg_log_sigmoid(target > 0.5 ? ws.gradient.score : -ws.gradient.score,
                                  stats.clamps);
    detail::apply_tuple_gradient<Access>(params, ws.gradient, lambda, eta);
    const RelationId r = tuple->relation;
    stats.projections +=
        detail::project_drift<Access>(params, tuple->head, Role::kHead, r, mode, ws.scratch)
            .applied;
    stats.projections +=
        detail::project_drift<Access>(params, tuple->tail, Role::kTail, r, mode, ws.scratch)
            .applied;
  }
  return stats;
}

void check_slot_support(const TupleCorpus& corpus, const RelationRegistry& relations) {
  for (RelationId r = 0; r < corpus.relation_count(); ++r) {
    auto [first, last] = corpus.range(r);
    if (first == last) continue;
    for (Role role : {Role::kHead, Role::kTail}) {
      const std::size_t support = corpus.marginal(r, role).size();
      if (support < 2) {
        throw TrainingError("cannot corrupt the " + std::string(role_name(role)) +
                            " slot of relation '" + relations.name(r) + "': support has " +
                            std::to_string(support) + " word(s)");
      }
    }
  }
}

struct Phase {
  int first_epoch;  // 1-based, inclusive
  int epochs;
};

Phase phase_of(int epoch, const TrainConfig& config) {
  if (!config.lambda.alternating) return {1, config.epochs};
  const int switch_after = (config.epochs + 1) / 2;
  if (epoch <= switch_after) return {1, switch_after};
  return {switch_after + 1, config.epochs - switch_after};
}

}  // namespace

double tuple_loss(const ModelParams& params, const TrainingSample& sample,
                  std::size_t* clamp_count) {
  std::size_t clamps = 0;
  const double loss =
      neg_log_sigmoid(score(params, sample.positive.head, sample.positive.relation,
                            sample.positive.tail),
                      clamps) +
      neg_log_sigmoid(-score(params, sample.corrupted_tail.head, sample.corrupted_tail.relation,
                             sample.corrupted_tail.tail),
                      clamps) +
      neg_log_sigmoid(-score(params, sample.corrupted_head.head, sample.corrupted_head.relation,
                             sample.corrupted_head.tail),
                      clamps);
  if (clamp_count) *clamp_count += clamps;
  return loss;
}

StepStats sgd_step(ModelParams& params, const TrainingSample& sample, double lambda, double eta,
                   ProjectionMode mode) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must be in [0, 1]");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  StepWorkspace<detail::PlainAccess> ws;
  return sgd_step_impl(params, sample, lambda, eta, mode, ws);
}

double lambda_at(int epoch, int total_epochs, const LambdaSchedule& schedule) {
  if (epoch < 1 || epoch > total_epochs) throw std::out_of_range("epoch index out of range");
  if (!schedule.alternating) return schedule.fixed_value;
  return epoch <= (total_epochs + 1) / 2 ? 1.0 : 0.0;
}

double lr_at(double progress, double eta0) {
  return eta0 * std::max(kMinLearningRateFraction, 1.0 - progress);
}

std::size_t project_all(ModelParams& params, ProjectionMode mode) {
  std::size_t fired = 0;
  std::vector<double> scratch;
  const auto& dims = params.dims();
  for (RelationId r = 0; r < dims.relations; ++r) {
    for (Role role : {Role::kHead, Role::kTail}) {
      for (WordId w = 0; w < dims.words; ++w) {
        fired += detail::project_drift<detail::PlainAccess>(params, w, role, r, mode, scratch)
                     .applied;
      }
    }
  }
  return fired;
}

TrainResult train(const TupleCorpus& corpus, const Vocabulary& vocab,
                  const RelationRegistry& relations, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (corpus.empty()) throw std::invalid_argument("empty corpus");
  if (relations.size() != corpus.relation_count()) {
    throw std::invalid_argument("corpus and relation registry disagree on relation count");
  }
  check_slot_support(corpus, relations);

  TrainResult result{ModelParams({vocab.size(), relations.size(), config.dim, config.local_dim},
                                 config.drift, config.scale_k),
                     {}};
  ModelParams& params = result.params;
  std::mt19937_64 rng(config.seed);
  initialize(params, rng);

  const NegativeSampler sampler(corpus, relations, config.negative_exponent);

  std::vector<std::uint32_t> order;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::uint64_t visits = corpus.records()[i].count;
    if (config.count_cap > 0) visits = std::min(visits, config.count_cap);
    order.insert(order.end(), visits, static_cast<std::uint32_t>(i));
  }
  const double per_epoch = static_cast<double>(order.size());

  const auto workers = static_cast<std::size_t>(config.workers);
  std::vector<std::mt19937_64> worker_rngs;
  for (std::size_t w = 1; w < workers; ++w) {
    worker_rngs.emplace_back(config.seed ^ (0x9E3779B97F4A7C15ULL * w));
  }

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const double lambda = lambda_at(epoch, config.epochs, config.lambda);
    const Phase phase = phase_of(epoch, config);
    const double phase_total = per_epoch * phase.epochs;
    const double phase_done = per_epoch * (epoch - phase.first_epoch);

    std::shuffle(order.begin(), order.end(), rng);

    EpochReport report;
    report.epoch = epoch;
    report.lambda = lambda;
    report.eta_start = lr_at(phase_done / phase_total, config.eta0);
    report.samples = order.size();

    auto run_range = [&](auto access, std::size_t begin, std::size_t end, std::mt19937_64& r,
                         std::size_t stride, StepStats& totals) {
      using Access = decltype(access);
      StepWorkspace<Access> ws;
      for (std::size_t i = begin; i < end; ++i) {
        const Tuple& positive = corpus.records()[order[i]].tuple;
        const NegativePair negatives = sample_negatives(positive, sampler, r);
        const TrainingSample sample{positive, negatives.corrupted_head,
                                    negatives.corrupted_tail};
        const double progress =
            (phase_done + static_cast<double>((i - begin) * stride)) / phase_total;
        const StepStats s = sgd_step_impl(params, sample, lambda,
                                          lr_at(progress, config.eta0), config.projection, ws);
        totals.loss += s.loss;
        totals.clamps += s.clamps;
        totals.projections += s.projections;
      }
    };

    StepStats totals;
    if (workers == 1) {
      run_range(detail::PlainAccess{}, 0, order.size(), rng, 1, totals);
    } else {
      // Lock-free asynchronous SGD: workers share params and may drop each
      // other's updates; every access is a relaxed atomic on one double.
      std::vector<StepStats> partial(workers);
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::thread> threads;
      const std::size_t chunk = (order.size() + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(order.size(), w * chunk);
        const std::size_t end = std::min(order.size(), begin + chunk);
        std::mt19937_64& wrng = w == 0 ? rng : worker_rngs[w - 1];
        threads.emplace_back([&, w, begin, end] {
          try {
            run_range(detail::SharedAccess{}, begin, end, wrng, workers, partial[w]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : threads) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
      for (const StepStats& s : partial) {
        totals.loss += s.loss;
        totals.clamps += s.clamps;
        totals.projections += s.projections;
      }
    }

    report.sweep_projections = project_all(params, config.projection);
    report.mean_loss = order.empty() ? 0.0 : totals.loss / per_epoch;
    report.clamps = totals.clamps;
    report.projections = totals.projections;
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.report.epochs.push_back(report);
    if (on_epoch) on_epoch(report, params);
  }
  return result;
}

}  // namespace mwe
