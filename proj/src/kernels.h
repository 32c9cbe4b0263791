#pragma once

// Per-tuple gradient and update kernels shared by sgd_step, the
// asynchronous trainer and the gradient oracle. Parameterised on an access
// policy so the lock-free trainer can read and write through relaxed
// atomics while the single-worker path uses plain loads and stores.

#include <atomic>
#include <cmath>
#include <span>
#include <vector>

#include "mwe/corpus.h"
#include "mwe/model.h"

namespace mwe::detail {

struct PlainAccess {
  static double load(const double& x) { return x; }
  static void store(double& x, double v) { x = v; }
};

struct SharedAccess {
  static double load(const double& x) {
    return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
  }
  static void store(double& x, double v) {
    std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
  }
};

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

inline void check_ids(const ModelParams& params, WordId w, RelationId r) {
  if (w >= params.dims().words) throw std::out_of_range("word id out of range");
  if (r >= params.dims().relations) throw std::out_of_range("relation id out of range");
}

template <typename Access>
void transformed_local(const ModelParams& params, WordId w, Role role, RelationId r,
                       std::span<double> out) {
  const Matrix& x = params.xform(role, r);
  const auto u = params.local(role, r).row(w);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double ui = Access::load(u[i]);
    if (ui == 0.0) continue;
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += Access::load(xi[j]) * ui;
  }
}

template <typename Access>
void compose_into(const ModelParams& params, WordId w, Role role, RelationId r,
                  std::span<double> out) {
  transformed_local<Access>(params, w, role, r, out);
  const auto c = params.center(role).row(w);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += Access::load(c[j]);
}

// Snapshot of everything one tuple contributes to the gradient of
//   -log sigma(f)  (target 1)   or   -log sigma(-f)  (target 0),
// with f = v_head . v_tail. The error term is sigma(f) - target.
struct TupleGradient {
  Tuple tuple;
  double score = 0.0;
  double error = 0.0;
  std::vector<double> v_head, v_tail;            // composed vectors, length d
  std::vector<double> u_head, u_tail;            // local vectors, length s
  std::vector<double> grad_u_head, grad_u_tail;  // error * X v_other, length s

  // dE/dc_head = error * v_tail, dE/dX_head = error * outer(u_head, v_tail);
  // tail terms mirror these with v_head.
};

template <typename Access>
void compute_tuple_gradient(const ModelParams& params, const Tuple& t, double target,
                            TupleGradient& g) {
  const std::size_t d = params.dims().dim;
  const std::size_t s = params.dims().local_dim;
  check_ids(params, t.head, t.relation);
  check_ids(params, t.tail, t.relation);
  g.tuple = t;
  g.v_head.resize(d);
  g.v_tail.resize(d);
  g.u_head.resize(s);
  g.u_tail.resize(s);
  g.grad_u_head.assign(s, 0.0);
  g.grad_u_tail.assign(s, 0.0);

  compose_into<Access>(params, t.head, Role::kHead, t.relation, g.v_head);
  compose_into<Access>(params, t.tail, Role::kTail, t.relation, g.v_tail);
  const auto uh = params.local(Role::kHead, t.relation).row(t.head);
  const auto ut = params.local(Role::kTail, t.relation).row(t.tail);
  for (std::size_t i = 0; i < s; ++i) {
    g.u_head[i] = Access::load(uh[i]);
    g.u_tail[i] = Access::load(ut[i]);
  }

  double f = 0.0;
  for (std::size_t j = 0; j < d; ++j) f += g.v_head[j] * g.v_tail[j];
  g.score = f;
  g.error = sigmoid(f) - target;

  const Matrix& xh = params.xform(Role::kHead, t.relation);
  const Matrix& xt = params.xform(Role::kTail, t.relation);
  for (std::size_t i = 0; i < s; ++i) {
    double acc_h = 0.0, acc_t = 0.0;
    const auto xhi = xh.row(i);
    const auto xti = xt.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      acc_h += Access::load(xhi[j]) * g.v_tail[j];
      acc_t += Access::load(xti[j]) * g.v_head[j];
    }
    g.grad_u_head[i] = g.error * acc_h;
    g.grad_u_tail[i] = g.error * acc_t;
  }
}

inline bool gradient_finite(const TupleGradient& g) {
  if (!std::isfinite(g.error) || !std::isfinite(g.score)) return false;
  for (const auto* v : {&g.v_head, &g.v_tail, &g.grad_u_head, &g.grad_u_tail}) {
    for (double x : *v)
      if (!std::isfinite(x)) return false;
  }
  return true;
}

// params -= step * gradient, with step lambda*eta for centers and
// (1-lambda)*eta for locals and transforms. All terms come from the
// snapshot in g, so the six updates are simultaneous.
template <typename Access>
void apply_tuple_gradient(ModelParams& params, const TupleGradient& g, double lambda,
                          double eta) {
  const Tuple& t = g.tuple;
  const std::size_t d = params.dims().dim;
  const std::size_t s = params.dims().local_dim;
  const double center_step = lambda * eta;
  const double local_step = (1.0 - lambda) * eta;

  if (center_step != 0.0) {
    const double k = center_step * g.error;
    auto ch = params.center(Role::kHead).row(t.head);
    auto ct = params.center(Role::kTail).row(t.tail);
    for (std::size_t j = 0; j < d; ++j) {
      Access::store(ch[j], Access::load(ch[j]) - k * g.v_tail[j]);
      Access::store(ct[j], Access::load(ct[j]) - k * g.v_head[j]);
    }
  }
  if (local_step != 0.0) {
    auto uh = params.local(Role::kHead, t.relation).row(t.head);
    auto ut = params.local(Role::kTail, t.relation).row(t.tail);
    for (std::size_t i = 0; i < s; ++i) {
      Access::store(uh[i], Access::load(uh[i]) - local_step * g.grad_u_head[i]);
      Access::store(ut[i], Access::load(ut[i]) - local_step * g.grad_u_tail[i]);
    }
    const double k = local_step * g.error;
    Matrix& xh = params.xform(Role::kHead, t.relation);
    Matrix& xt = params.xform(Role::kTail, t.relation);
    for (std::size_t i = 0; i < s; ++i) {
      const double kh = k * g.u_head[i];
      const double kt = k * g.u_tail[i];
      auto xhi = xh.row(i);
      auto xti = xt.row(i);
      if (kh != 0.0) {
        for (std::size_t j = 0; j < d; ++j)
          Access::store(xhi[j], Access::load(xhi[j]) - kh * g.v_tail[j]);
      }
      if (kt != 0.0) {
        for (std::size_t j = 0; j < d; ++j)
          Access::store(xti[j], Access::load(xti[j]) - kt * g.v_head[j]);
      }
    }
  }
}

template <typename Access>
ProjectionResult project_drift(ModelParams& params, WordId w, Role role, RelationId r,
                               ProjectionMode mode, std::vector<double>& scratch) {
  check_ids(params, w, r);
  scratch.resize(params.dims().dim);
  transformed_local<Access>(params, w, role, r, scratch);
  double sq = 0.0;
  for (double x : scratch) sq += x * x;
  const double norm = std::sqrt(sq);
  const double a = params.drift();
  if (!(norm > a)) return {false, norm};

  const double ratio = norm / (params.scale_k() * a);
  auto u = params.local(role, r).row(w);
  if (mode == ProjectionMode::kScaleLocal) {
    for (double& x : u) Access::store(x, Access::load(x) / ratio);
  } else {
    const double factor = std::sqrt(ratio);
    for (double& x : u) Access::store(x, Access::load(x) / factor);
    for (double& x : params.xform(role, r).values()) Access::store(x, Access::load(x) / factor);
  }
  return {true, norm};
}

}  // namespace mwe::detail
