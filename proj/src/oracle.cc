#include "mwe/oracle.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "kernels.h"
#include "mwe/corpus.h"

namespace mwe {

std::vector<double> numeric_grad(const ScalarFn& f, std::span<const double> point, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("numeric_grad: eps must be positive");
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double plus = f(x);
    x[i] = saved - eps;
    const double minus = f(x);
    x[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw std::domain_error("numeric_grad: non-finite evaluation at coordinate " +
                              std::to_string(i));
    }
    grad[i] = (plus - minus) / (2.0 * eps);
  }
  return grad;
}

std::vector<double> flatten(const ModelParams& params) {
  std::vector<double> out;
  out.reserve(params.value_count());
  params.for_each_tensor(
      [&](const Matrix& m) { out.insert(out.end(), m.values().begin(), m.values().end()); });
  return out;
}

void unflatten(std::span<const double> values, ModelParams& params) {
  if (values.size() != params.value_count()) {
    throw std::invalid_argument("unflatten: size mismatch");
  }
  std::size_t offset = 0;
  params.for_each_tensor([&](Matrix& m) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), m.size(),
                m.values().begin());
    offset += m.size();
  });
}

namespace {

// Offsets of each tensor inside the flattened vector.
struct Layout {
  std::size_t center[2];
  std::vector<std::size_t> local[2];
  std::vector<std::size_t> xform[2];
};

Layout layout_of(const ModelParams& params) {
  const auto& dims = params.dims();
  Layout l;
  std::size_t offset = 0;
  for (int role = 0; role < 2; ++role) {
    l.center[role] = offset;
    offset += dims.words * dims.dim;
  }
  for (int role = 0; role < 2; ++role) {
    for (std::size_t r = 0; r < dims.relations; ++r) {
      l.local[role].push_back(offset);
      offset += dims.words * dims.local_dim;
    }
  }
  for (int role = 0; role < 2; ++role) {
    for (std::size_t r = 0; r < dims.relations; ++r) {
      l.xform[role].push_back(offset);
      offset += dims.local_dim * dims.dim;
    }
  }
  return l;
}

std::array<std::pair<Tuple, double>, 3> labelled(const TrainingSample& sample) {
  return {{{sample.positive, 1.0}, {sample.corrupted_head, 0.0}, {sample.corrupted_tail, 0.0}}};
}

}  // namespace

std::vector<double> analytic_gradient(const ModelParams& params, const TrainingSample& sample) {
  const auto& dims = params.dims();
  const std::size_t d = dims.dim;
  const std::size_t s = dims.local_dim;
  const Layout l = layout_of(params);
  std::vector<double> grad(params.value_count(), 0.0);
  detail::TupleGradient g;
  for (const auto& [t, target] : labelled(sample)) {
    detail::compute_tuple_gradient<detail::PlainAccess>(params, t, target, g);
    const std::size_t ch = l.center[0] + t.head * d;
    const std::size_t ct = l.center[1] + t.tail * d;
    for (std::size_t j = 0; j < d; ++j) {
      grad[ch + j] += g.error * g.v_tail[j];
      grad[ct + j] += g.error * g.v_head[j];
    }
    const std::size_t uh = l.local[0][t.relation] + t.head * s;
    const std::size_t ut = l.local[1][t.relation] + t.tail * s;
    for (std::size_t i = 0; i < s; ++i) {
      grad[uh + i] += g.grad_u_head[i];
      grad[ut + i] += g.grad_u_tail[i];
    }
    const std::size_t xh = l.xform[0][t.relation];
    const std::size_t xt = l.xform[1][t.relation];
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        grad[xh + i * d + j] += g.error * g.u_head[i] * g.v_tail[j];
        grad[xt + i * d + j] += g.error * g.u_tail[i] * g.v_head[j];
      }
    }
  }
  return grad;
}

std::vector<bool> touched_coordinates(const ModelParams& params, const TrainingSample& sample) {
  const auto& dims = params.dims();
  const Layout l = layout_of(params);
  std::vector<bool> mask(params.value_count(), false);
  auto mark = [&](std::size_t begin, std::size_t count) {
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(begin), count, true);
  };
  for (const auto& [t, target] : labelled(sample)) {
    mark(l.center[0] + t.head * dims.dim, dims.dim);
    mark(l.center[1] + t.tail * dims.dim, dims.dim);
    mark(l.local[0][t.relation] + t.head * dims.local_dim, dims.local_dim);
    mark(l.local[1][t.relation] + t.tail * dims.local_dim, dims.local_dim);
    mark(l.xform[0][t.relation], dims.local_dim * dims.dim);
    mark(l.xform[1][t.relation], dims.local_dim * dims.dim);
  }
  return mask;
}

GradCheckResult compare_gradients(std::span<const double> analytic,
                                  std::span<const double> numeric,
                                  const std::vector<bool>& touched) {
  if (analytic.size() != numeric.size() || analytic.size() != touched.size()) {
    throw std::invalid_argument("compare_gradients: size mismatch");
  }
  GradCheckResult result;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if (!touched[i]) continue;
    ++result.coordinates;
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), kRelErrorFloor});
    const double rel = std::abs(analytic[i] - numeric[i]) / denom;
    if (rel > result.max_rel_error || !std::isfinite(rel)) {
      result.max_rel_error = std::isfinite(rel) ? rel : INFINITY;
      result.worst_index = i;
    }
  }
  return result;
}

GradCheckResult grad_check(const ModelParams& params, const TrainingSample& sample, double eps) {
  ModelParams probe = params;
  const ScalarFn loss = [&](std::span<const double> x) {
    unflatten(x, probe);
    return tuple_loss(probe, sample);
  };
  const auto numeric = numeric_grad(loss, flatten(params), eps);
  return compare_gradients(analytic_gradient(params, sample), numeric,
                           touched_coordinates(params, sample));
}

GradCheckCase random_grad_case(std::uint64_t seed, std::size_t max_dim,
                               std::size_t max_local_dim) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  ModelDims dims;
  dims.dim = pick(2, max_dim);
  dims.local_dim = pick(1, std::min(max_local_dim, dims.dim));
  dims.words = pick(3, 6);
  dims.relations = pick(1, 3);
  GradCheckCase c{ModelParams(dims), {}};
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  c.params.for_each_tensor([&](Matrix& m) {
    for (double& x : m.values()) x = value(rng);
  });

  const auto n = static_cast<WordId>(dims.words);
  auto word = [&] { return static_cast<WordId>(pick(0, n - 1)); };
  auto other_word = [&](WordId avoid) {
    WordId w = avoid;
    while (w == avoid) w = word();
    return w;
  };
  const auto r = static_cast<RelationId>(pick(0, dims.relations - 1));
  const Tuple positive{word(), r, word()};
  c.sample.positive = positive;
  c.sample.corrupted_head = {other_word(positive.head), r, positive.tail};
  c.sample.corrupted_tail = {positive.head, r, other_word(positive.tail)};
  return c;
}

std::vector<GradSuiteRow> run_gradient_suite(std::size_t seeds, double eps,
                                             std::uint64_t first_seed) {
  std::vector<GradSuiteRow> rows;
  for (std::uint64_t seed = first_seed; seed < first_seed + seeds; ++seed) {
    const GradCheckCase c = random_grad_case(seed);
    rows.push_back({seed, c.params.dims(), grad_check(c.params, c.sample, eps)});
  }
  return rows;
}

// ---------------------------------------------------------------------------

void SynthSpec::validate() const {
  if (groups < 2) throw std::invalid_argument("synth: need at least 2 groups");
  if (words_per_group < 1) throw std::invalid_argument("synth: need at least 1 word per group");
  if (relations.empty()) throw std::invalid_argument("synth: need at least one relation");
  if (compatibility.size() != relations.size()) {
    throw std::invalid_argument("synth: one compatibility matrix per relation required");
  }
  for (std::size_t r = 0; r < relations.size(); ++r) {
    const Matrix& m = compatibility[r];
    if (m.rows() != groups || m.cols() != groups) {
      throw std::invalid_argument("synth: compatibility matrix for '" + relations[r] +
                                  "' must be groups x groups");
    }
    double total = 0.0;
    for (double x : m.values()) {
      if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("synth: compatibility entries must lie in [0, 1]");
      }
      total += x;
    }
    if (total == 0.0) {
      throw std::invalid_argument("synth: compatibility matrix for '" + relations[r] +
                                  "' is all zero");
    }
  }
}

std::string synth_word(std::size_t group, std::size_t index) {
  return "g" + std::to_string(group) + "_w" + std::to_string(index);
}

SynthSpec planted_spec(std::size_t groups, std::size_t words_per_group, std::size_t relations,
                       std::size_t tuples_per_relation, std::uint64_t seed) {
  SynthSpec spec;
  spec.groups = groups;
  spec.words_per_group = words_per_group;
  spec.tuples_per_relation = tuples_per_relation;
  spec.seed = seed;
  const std::vector<std::string> names = {"nsubj", "dobj", "amod"};
  auto level = [&](std::size_t k) {
    return 1.0 - 0.95 * static_cast<double>(k) / static_cast<double>(groups - 1);
  };
  for (std::size_t r = 0; r < relations; ++r) {
    spec.relations.push_back(r < names.size() ? names[r] : "rel" + std::to_string(r));
    Matrix m(groups, groups);
    for (std::size_t i = 0; i < groups; ++i) {
      for (std::size_t j = 0; j < groups; ++j) {
        const double shared = level((i + j) % groups);
        const double specific = level((j + groups - i + r) % groups);
        m(i, j) = 0.5 * shared + 0.5 * specific;
      }
    }
    spec.compatibility.push_back(std::move(m));
  }
  return spec;
}

SynthCorpus synth_corpus(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::size_t g = spec.groups;
  std::uniform_int_distribution<std::size_t> word_in_group(0, spec.words_per_group - 1);

  SynthCorpus out;
  std::vector<RawTuple> raw;
  raw.reserve(spec.tuples_per_relation * spec.relations.size());
  for (std::size_t r = 0; r < spec.relations.size(); ++r) {
    const auto cells = spec.compatibility[r].values();
    std::discrete_distribution<std::size_t> cell(cells.begin(), cells.end());
    for (std::size_t i = 0; i < spec.tuples_per_relation; ++i) {
      const std::size_t c = cell(rng);
      raw.push_back({synth_word(c / g, word_in_group(rng)), spec.relations[r],
                     synth_word(c % g, word_in_group(rng)), 1});
    }
  }
  out.tuples = merge_tuples(std::move(raw));

  for (std::size_t r = 0; r < spec.relations.size(); ++r) {
    for (std::size_t hg = 0; hg < g; ++hg) {
      for (std::size_t tg = 0; tg < g; ++tg) {
        for (std::size_t k = 0; k < spec.gold_pairs_per_cell; ++k) {
          out.gold.rows.push_back({synth_word(hg, word_in_group(rng)), spec.relations[r],
                                   synth_word(tg, word_in_group(rng)),
                                   spec.compatibility[r](hg, tg)});
        }
      }
    }
  }

  // Group profile: every compatibility row and column the group takes part in.
  std::vector<std::vector<double>> profile(g);
  for (std::size_t grp = 0; grp < g; ++grp) {
    for (const Matrix& m : spec.compatibility) {
      for (std::size_t j = 0; j < g; ++j) profile[grp].push_back(m(grp, j));
      for (std::size_t i = 0; i < g; ++i) profile[grp].push_back(m(i, grp));
    }
  }
  if (spec.words_per_group >= 2) {
    for (std::size_t a = 0; a < g; ++a) {
      for (std::size_t b = a; b < g; ++b) {
        const double sim = a == b ? 1.0 : cosine(profile[a], profile[b]);
        for (std::size_t k = 0; k < spec.gold_pairs_per_cell; ++k) {
          const std::size_t i = word_in_group(rng);
          std::size_t j = word_in_group(rng);
          while (a == b && j == i) j = word_in_group(rng);
          out.similarity.rows.push_back({synth_word(a, i), synth_word(b, j), Pos::kNoun, sim});
        }
      }
    }
  }
  return out;
}

}  // namespace mwe
