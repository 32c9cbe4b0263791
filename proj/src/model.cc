#include "mwe/model.h"

#include <cmath>
#include <stdexcept>

#include "kernels.h"

namespace mwe {

ModelParams::ModelParams(ModelDims dims, double drift, double scale_k)
    : dims_(dims), drift_(drift), scale_k_(scale_k) {
  if (dims.dim == 0 || dims.local_dim == 0 || dims.local_dim > dims.dim) {
    throw std::invalid_argument("ModelParams: require 0 < local_dim <= dim");
  }
  if (!(drift > 0.0)) throw std::invalid_argument("ModelParams: drift range must be positive");
  if (!(scale_k > 0.0 && scale_k <= 1.0)) {
    throw std::invalid_argument("ModelParams: scaling parameter k must be in (0, 1]");
  }
  for (int role = 0; role < 2; ++role) {
    center_[role] = Matrix(dims.words, dims.dim);
    local_[role].assign(dims.relations, Matrix(dims.words, dims.local_dim));
    xform_[role].assign(dims.relations, Matrix(dims.local_dim, dims.dim));
  }
}

std::size_t ModelParams::value_count() const {
  std::size_t total = 0;
  for_each_tensor([&](const Matrix& m) { total += m.size(); });
  return total;
}

bool ModelParams::all_finite() const {
  bool finite = true;
  for_each_tensor([&](const Matrix& m) {
    for (double x : m.values()) finite = finite && std::isfinite(x);
  });
  return finite;
}

void initialize(ModelParams& params, std::mt19937_64& rng) {
  const auto& dims = params.dims();
  const double center_range = 0.5 / static_cast<double>(dims.dim);
  const double xform_range =
      1.0 / std::sqrt(static_cast<double>(dims.local_dim) * static_cast<double>(dims.dim));
  std::uniform_real_distribution<double> center_dist(-center_range, center_range);
  std::uniform_real_distribution<double> xform_dist(-xform_range, xform_range);

  for (Role role : {Role::kHead, Role::kTail}) {
    for (double& x : params.center(role).values()) x = center_dist(rng);
  }
  for (Role role : {Role::kHead, Role::kTail}) {
    for (RelationId r = 0; r < dims.relations; ++r) {
      for (double& x : params.local(role, r).values()) x = 0.0;
      for (double& x : params.xform(role, r).values()) x = xform_dist(rng);
    }
  }
}

void transformed_local(const ModelParams& params, WordId w, Role role, RelationId r,
                       std::span<double> out) {
  detail::check_ids(params, w, r);
  detail::transformed_local<detail::PlainAccess>(params, w, role, r, out);
}

void compose_into(const ModelParams& params, WordId w, Role role, RelationId r,
                  std::span<double> out) {
  detail::check_ids(params, w, r);
  if (out.size() != params.dims().dim) throw std::invalid_argument("compose: bad output size");
  detail::compose_into<detail::PlainAccess>(params, w, role, r, out);
}

std::vector<double> compose(const ModelParams& params, WordId w, Role role, RelationId r) {
  std::vector<double> out(params.dims().dim);
  compose_into(params, w, role, r, out);
  return out;
}

double score(const ModelParams& params, WordId head, RelationId r, WordId tail) {
  return dot(compose(params, head, Role::kHead, r), compose(params, tail, Role::kTail, r));
}

double plausibility(const ModelParams& params, WordId head, RelationId r, WordId tail) {
  return cosine(compose(params, head, Role::kHead, r), compose(params, tail, Role::kTail, r));
}

ProjectionResult project_drift(ModelParams& params, WordId w, Role role, RelationId r,
                               ProjectionMode mode) {
  std::vector<double> scratch;
  return detail::project_drift<detail::PlainAccess>(params, w, role, r, mode, scratch);
}

std::uint64_t param_count(std::uint64_t n, std::uint64_t m, std::uint64_t d, std::uint64_t s) {
  return 2 * n * d + 2 * n * m * s + 2 * m * s * d;
}

std::uint64_t multi_prototype_count(std::uint64_t n, std::uint64_t m, std::uint64_t d) {
  return 2 * n * m * d;
}

}  // namespace mwe
