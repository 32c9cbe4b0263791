#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mwe/matrix.h"

namespace mwe {

struct ModelDims {
  std::size_t words = 0;      // n
  std::size_t relations = 0;  // m
  std::size_t dim = 0;        // d, center dimension
  std::size_t local_dim = 0;  // s, local dimension

  bool operator==(const ModelDims&) const = default;
};

// How project_drift restores ||X^T u|| once it exceeds the drift range.
enum class ProjectionMode : std::uint8_t {
  kScaleBoth,   // divide X and u each by sqrt(a'/(k a))
  kScaleLocal,  // divide u alone by a'/(k a); X untouched
};

// All trainable tensors of a multiplex embedding model.
//
// A word w under relation r in role `role` is represented by
//   v = c[role][w] + X[role][r]^T u[role][r][w]
// with c in R^d, u in R^s and X an s x d matrix.
class ModelParams {
 public:
  ModelParams() = default;
  // Zero-initialised tensors. Requires 0 < local_dim <= dim.
  ModelParams(ModelDims dims, double drift = 1.0, double scale_k = 0.8);

  const ModelDims& dims() const { return dims_; }
  double drift() const { return drift_; }
  double scale_k() const { return scale_k_; }

  Matrix& center(Role role) { return center_[index(role)]; }
  const Matrix& center(Role role) const { return center_[index(role)]; }
  Matrix& local(Role role, RelationId r) { return local_[index(role)].at(r); }
  const Matrix& local(Role role, RelationId r) const { return local_[index(role)].at(r); }
  Matrix& xform(Role role, RelationId r) { return xform_[index(role)].at(r); }
  const Matrix& xform(Role role, RelationId r) const { return xform_[index(role)].at(r); }

  // Visits every tensor in serialization order: center head, center tail,
  // local head[0..m), local tail[0..m), xform head[0..m), xform tail[0..m).
  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    visit(*this, fn);
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    visit(*this, fn);
  }

  std::size_t value_count() const;
  bool all_finite() const;

  bool operator==(const ModelParams&) const = default;

 private:
  static std::size_t index(Role role) { return static_cast<std::size_t>(role); }

  template <typename Self, typename Fn>
  static void visit(Self& self, Fn& fn) {
    for (auto& m : self.center_) fn(m);
    for (auto& per_role : self.local_)
      for (auto& m : per_role) fn(m);
    for (auto& per_role : self.xform_)
      for (auto& m : per_role) fn(m);
  }

  ModelDims dims_;
  double drift_ = 1.0;
  double scale_k_ = 0.8;
  Matrix center_[2];
  std::vector<Matrix> local_[2];
  std::vector<Matrix> xform_[2];
};

// Centers ~ U(-0.5/d, 0.5/d), locals = 0, transforms ~ U(-1/sqrt(s d), 1/sqrt(s d)).
void initialize(ModelParams& params, std::mt19937_64& rng);

// X^T u for (w, role, r); written into `out` (length d).
void transformed_local(const ModelParams& params, WordId w, Role role, RelationId r,
                       std::span<double> out);

// c + X^T u. Throws std::out_of_range on a bad id.
std::vector<double> compose(const ModelParams& params, WordId w, Role role, RelationId r);
void compose_into(const ModelParams& params, WordId w, Role role, RelationId r,
                  std::span<double> out);

// Dot product of the composed head and tail vectors.
double score(const ModelParams& params, WordId head, RelationId r, WordId tail);

// Cosine of the composed head and tail vectors. Throws std::domain_error if
// either vector has zero norm.
double plausibility(const ModelParams& params, WordId head, RelationId r, WordId tail);

struct ProjectionResult {
  bool applied = false;
  double norm_before = 0.0;  // a'
};

// Enforces ||X^T u|| <= a for one (w, role, r). Fires only when a' > a.
ProjectionResult project_drift(ModelParams& params, WordId w, Role role, RelationId r,
                               ProjectionMode mode = ProjectionMode::kScaleBoth);

// 2nd + 2nms + 2msd: centers, locals and transforms for both roles.
std::uint64_t param_count(std::uint64_t n, std::uint64_t m, std::uint64_t d, std::uint64_t s);

// Size of a relation-specific multi-prototype layout (2 n m d) for comparison.
std::uint64_t multi_prototype_count(std::uint64_t n, std::uint64_t m, std::uint64_t d);

}  // namespace mwe
