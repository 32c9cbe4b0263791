#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "mwe/errors.h"
#include "mwe/trainer.h"
#include "planted.h"
#include "test_util.h"

namespace mwe {
namespace {

using testing::desk_config;
using testing::fill_uniform;
using testing::loop_compose;
using testing::loop_norm;
using testing::Planted;

double sigma(double x) { return 1 / (1 + std::exp(-x)); }

TEST(TupleLoss, ZeroParameters) {
  const ModelParams p({3, 1, 2, 1});
  const TrainingSample s{{0, 0, 1}, {2, 0, 1}, {0, 0, 2}};
  EXPECT_NEAR(tuple_loss(p, s), 3 * std::log(2.0), 1e-15);
}

TEST(TupleLoss, HandSetCenters) {
  // c_h(0) = [1,0], c_t(1) = [1,0] -> f_p = 1; c_h(2) = [-1,0] -> f_n1 = -1;
  // c_t(2) = [-1,0] -> f_n2 = -1.
  ModelParams p({3, 1, 2, 1});
  p.center(Role::kHead)(0, 0) = 1;
  p.center(Role::kTail)(1, 0) = 1;
  p.center(Role::kHead)(2, 0) = -1;
  p.center(Role::kTail)(2, 0) = -1;
  const TrainingSample s{{0, 0, 1}, {2, 0, 1}, {0, 0, 2}};
  EXPECT_NEAR(tuple_loss(p, s), 3 * std::log(1 + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(tuple_loss(p, s), 0.9398, 1e-4);
}

TEST(TupleLoss, SaturationAndClamping) {
  ModelParams p({3, 1, 1, 1});
  p.center(Role::kHead)(0, 0) = 10;
  p.center(Role::kTail)(1, 0) = 10;
  p.center(Role::kHead)(2, 0) = -10;
  p.center(Role::kTail)(2, 0) = -10;
  const TrainingSample good{{0, 0, 1}, {2, 0, 1}, {0, 0, 2}};
  std::size_t clamps = 0;
  EXPECT_LT(tuple_loss(p, good, &clamps), 1e-40);
  EXPECT_EQ(clamps, 0u);
  const TrainingSample bad{{2, 0, 1}, {0, 0, 1}, {0, 0, 1}};
  const double loss = tuple_loss(p, bad, &clamps);
  EXPECT_EQ(clamps, 3u);
  EXPECT_NEAR(loss, -3 * std::log(kLogClamp), 1e-9);
}

// Single-tuple update written out coordinate by coordinate.
void reference_tuple(ModelParams& p, const Tuple& t, double target, double lambda, double eta) {
  const std::size_t d = p.dims().dim, s = p.dims().local_dim;
  const auto vh = loop_compose(p, t.head, Role::kHead, t.relation);
  const auto vt = loop_compose(p, t.tail, Role::kTail, t.relation);
  double f = 0;
  for (std::size_t j = 0; j < d; ++j) f += vh[j] * vt[j];
  const double e = sigma(f) - target;
  const ModelParams old = p;
  const Matrix& xh = old.xform(Role::kHead, t.relation);
  const Matrix& xt = old.xform(Role::kTail, t.relation);
  for (std::size_t j = 0; j < d; ++j) {
    p.center(Role::kHead)(t.head, j) -= lambda * eta * e * vt[j];
    p.center(Role::kTail)(t.tail, j) -= lambda * eta * e * vh[j];
  }
  for (std::size_t i = 0; i < s; ++i) {
    double xh_vt = 0, xt_vh = 0;
    for (std::size_t j = 0; j < d; ++j) {
      xh_vt += xh(i, j) * vt[j];
      xt_vh += xt(i, j) * vh[j];
    }
    p.local(Role::kHead, t.relation)(t.head, i) -= (1 - lambda) * eta * e * xh_vt;
    p.local(Role::kTail, t.relation)(t.tail, i) -= (1 - lambda) * eta * e * xt_vh;
    for (std::size_t j = 0; j < d; ++j) {
      p.xform(Role::kHead, t.relation)(i, j) -=
          (1 - lambda) * eta * e * old.local(Role::kHead, t.relation)(t.head, i) * vt[j];
      p.xform(Role::kTail, t.relation)(i, j) -=
          (1 - lambda) * eta * e * old.local(Role::kTail, t.relation)(t.tail, i) * vh[j];
    }
  }
}

void reference_project(ModelParams& p, WordId w, Role role, RelationId r) {
  auto v = loop_compose(p, w, role, r);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] -= p.center(role)(w, j);
  const double a_prime = loop_norm(v);
  if (a_prime <= p.drift()) return;
  const double f = std::sqrt(a_prime / (p.scale_k() * p.drift()));
  for (double& x : p.local(role, r).row(w)) x /= f;
  for (double& x : p.xform(role, r).values()) x /= f;
}

TEST(SgdStep, MatchesReferenceUpdate) {
  for (double lambda : {0.0, 0.3, 1.0}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      ModelParams p({4, 2, 5, 2}, 0.7, 0.8);
      fill_uniform(p, seed, 0.6);
      ModelParams ref = p;
      const TrainingSample s{{0, 1, 2}, {3, 1, 2}, {0, 1, 1}};
      const double eta = 0.3;
      sgd_step(p, s, lambda, eta);
      const std::pair<Tuple, double> order[] = {
          {s.positive, 1.0}, {s.corrupted_head, 0.0}, {s.corrupted_tail, 0.0}};
      for (const auto& [t, target] : order) {
        reference_tuple(ref, t, target, lambda, eta);
        reference_project(ref, t.head, Role::kHead, t.relation);
        reference_project(ref, t.tail, Role::kTail, t.relation);
      }
      std::vector<double> a, b;
      p.for_each_tensor([&](const Matrix& m) { a.insert(a.end(), m.values().begin(), m.values().end()); });
      ref.for_each_tensor([&](const Matrix& m) { b.insert(b.end(), m.values().begin(), m.values().end()); });
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_NEAR(a[i], b[i], 1e-13) << "lambda " << lambda << " seed " << seed << " index " << i;
      }
    }
  }
}

TEST(SgdStep, LambdaOneFreezesLocals) {
  ModelParams p({3, 1, 4, 2});
  fill_uniform(p, 1, 0.5);
  const ModelParams before = p;
  sgd_step(p, {{0, 0, 1}, {2, 0, 1}, {0, 0, 2}}, 1.0, 0.5);
  EXPECT_EQ(p.local(Role::kHead, 0), before.local(Role::kHead, 0));
  EXPECT_EQ(p.local(Role::kTail, 0), before.local(Role::kTail, 0));
  EXPECT_EQ(p.xform(Role::kHead, 0), before.xform(Role::kHead, 0));
  EXPECT_EQ(p.xform(Role::kTail, 0), before.xform(Role::kTail, 0));
  EXPECT_NE(p.center(Role::kHead), before.center(Role::kHead));
}

TEST(SgdStep, LambdaZeroFreezesCenters) {
  ModelParams p({3, 1, 4, 2});
  fill_uniform(p, 2, 0.5);
  const ModelParams before = p;
  sgd_step(p, {{0, 0, 1}, {2, 0, 1}, {0, 0, 2}}, 0.0, 0.5);
  EXPECT_EQ(p.center(Role::kHead), before.center(Role::kHead));
  EXPECT_EQ(p.center(Role::kTail), before.center(Role::kTail));
  EXPECT_NE(p.local(Role::kHead, 0), before.local(Role::kHead, 0));
}

TEST(SgdStep, NonFiniteGradientNamesTuple) {
  ModelParams p({3, 1, 2, 1});
  p.center(Role::kHead)(0, 0) = std::numeric_limits<double>::infinity();
  p.center(Role::kTail)(1, 0) = 1;
  try {
    sgd_step(p, {{0, 0, 1}, {2, 0, 1}, {0, 0, 2}}, 1.0, 0.1);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("(head=0, relation=0, tail=1)"), std::string::npos) << e.what();
  }
}

TEST(Schedule, LambdaAt) {
  EXPECT_EQ(lambda_at(1, 10), 1.0);
  EXPECT_EQ(lambda_at(5, 10), 1.0);
  EXPECT_EQ(lambda_at(6, 10), 0.0);
  EXPECT_EQ(lambda_at(1, 1), 1.0);
  EXPECT_EQ(lambda_at(3, 5), 1.0);
  EXPECT_EQ(lambda_at(4, 5), 0.0);
  EXPECT_EQ(lambda_at(2, 4, LambdaSchedule::fixed(0.5)), 0.5);
}

TEST(Schedule, LrAt) {
  EXPECT_EQ(lr_at(0.0, 0.025), 0.025);
  EXPECT_NEAR(lr_at(0.5, 0.025), 0.0125, 1e-18);
  EXPECT_NEAR(lr_at(1.0, 0.025), 0.025e-4, 1e-18);
}

TEST(Schedule, Parse) {
  EXPECT_TRUE(LambdaSchedule::parse("alt").alternating);
  const LambdaSchedule f = LambdaSchedule::parse("fixed:0.25");
  EXPECT_FALSE(f.alternating);
  EXPECT_EQ(f.fixed_value, 0.25);
  EXPECT_THROW(LambdaSchedule::parse("fixed:2"), std::invalid_argument);
  EXPECT_THROW(LambdaSchedule::parse("sometimes"), std::invalid_argument);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.scale_k = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.drift = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.eta0 = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.local_dim = c.dim + 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

struct Small {
  Vocabulary vocab{{"a", "b", "c", "d"}, {1, 1, 1, 1}};
  RelationRegistry rels{{"r"}};
};

TEST(Train, EmptyCorpus) {
  Small s;
  try {
    train(TupleCorpus({}, 1), s.vocab, s.rels, {});
    FAIL() << "expected error";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "empty corpus");
  }
}

TEST(Train, SingletonSupport) {
  Small s;
  const TupleCorpus c = encode_corpus({{"a", "r", "b", 1}, {"a", "r", "c", 1}}, s.vocab, s.rels);
  EXPECT_THROW(train(c, s.vocab, s.rels, {}), TrainingError);
}

TEST(Train, RepeatedTupleScoreRises) {
  Small s;
  const TupleCorpus c = encode_corpus({{"a", "r", "b", 20}, {"c", "r", "d", 1}}, s.vocab, s.rels);
  TrainConfig config;
  config.dim = 8;
  config.local_dim = 2;
  config.epochs = 6;
  config.eta0 = 0.1;
  std::vector<double> scores;
  train(c, s.vocab, s.rels, config, [&](const EpochReport& e, const ModelParams& p) {
    if (e.lambda == 1.0) scores.push_back(score(p, 0, 0, 1));
  });
  ASSERT_EQ(scores.size(), 3u);
  EXPECT_LT(scores[0], scores[1]);
  EXPECT_LT(scores[1], scores[2]);
}

TEST(Train, CountCapLimitsVisits) {
  Small s;
  const TupleCorpus c = encode_corpus({{"a", "r", "b", 20}, {"c", "r", "d", 1}}, s.vocab, s.rels);
  TrainConfig config;
  config.dim = 4;
  config.local_dim = 1;
  config.epochs = 1;
  config.count_cap = 3;
  const TrainResult capped = train(c, s.vocab, s.rels, config);
  EXPECT_EQ(capped.report.epochs[0].samples, 4u);
  config.count_cap = 0;
  const TrainResult full = train(c, s.vocab, s.rels, config);
  EXPECT_EQ(full.report.epochs[0].samples, 21u);
}

TEST(Train, PlantedLossFallsDuringCenterPhase) {
  const Planted planted;
  std::vector<double> mean(3, 0.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig config = desk_config(seed);
    config.lambda = LambdaSchedule::fixed(1.0);
    config.epochs = 3;
    const TrainResult r = train(planted.corpus, planted.vocab.vocab, planted.vocab.relations, config);
    for (int e = 0; e < 3; ++e) mean[e] += r.report.epochs[e].mean_loss / 5;
  }
  EXPECT_GE(mean[0], mean[1]);
  EXPECT_GE(mean[1], mean[2]);
}

TEST(Train, DriftBoundAfterEveryEpoch) {
  const Planted planted;
  TrainConfig config = desk_config(3);
  config.drift = 0.3;
  std::size_t checked = 0;
  train(planted.corpus, planted.vocab.vocab, planted.vocab.relations, config,
        [&](const EpochReport&, const ModelParams& p) {
          std::vector<double> v(p.dims().dim);
          for (RelationId r = 0; r < p.dims().relations; ++r)
            for (Role role : {Role::kHead, Role::kTail})
              for (WordId w = 0; w < p.dims().words; ++w) {
                transformed_local(p, w, role, r, v);
                ASSERT_LE(loop_norm(v), p.drift());
                ++checked;
              }
        });
  EXPECT_EQ(checked, 6u * 200 * 2 * 3);
}

TEST(Train, DeterministicSingleWorker) {
  const Planted planted;
  TrainConfig config = desk_config(4);
  config.epochs = 2;
  const TrainResult a = train(planted.corpus, planted.vocab.vocab, planted.vocab.relations, config);
  const TrainResult b = train(planted.corpus, planted.vocab.vocab, planted.vocab.relations, config);
  EXPECT_EQ(a.params, b.params);
  config.seed = 5;
  const TrainResult c = train(planted.corpus, planted.vocab.vocab, planted.vocab.relations, config);
  EXPECT_NE(a.params, c.params);
}

TEST(Train, AsynchronousWorkersStayFiniteAndBounded) {
  const Planted planted;
  TrainConfig config = desk_config(6);
  config.workers = 4;
  const TrainResult r = train(planted.corpus, planted.vocab.vocab, planted.vocab.relations, config);
  EXPECT_TRUE(r.params.all_finite());
  ASSERT_EQ(r.report.epochs.size(), 6u);
  EXPECT_LT(r.report.epochs.back().mean_loss, r.report.epochs.front().mean_loss);
  ModelParams p = r.params;
  EXPECT_EQ(project_all(p, ProjectionMode::kScaleBoth), 0u);
}

TEST(ProjectAll, FixesEveryOverBoundPair) {
  ModelParams p({5, 2, 4, 2}, 0.5, 0.8);
  fill_uniform(p, 8, 2.0);
  EXPECT_GT(project_all(p, ProjectionMode::kScaleLocal), 0u);
  EXPECT_EQ(project_all(p, ProjectionMode::kScaleLocal), 0u);
}

}  // namespace
}  // namespace mwe
