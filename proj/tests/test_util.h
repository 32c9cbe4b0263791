#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mwe/model.h"

namespace mwe::testing {

// Fresh per-test directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mwe_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Spearman by brute force: rank = 1 + #smaller + (#equal - 1)/2, then the
// textbook Pearson sum over ranks.
inline double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        if (w < v[i]) less += 1;
        if (w == v[i]) equal += 1;
      }
      r[i] = 1 + less + (equal - 1) / 2;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// c + X^T u by explicit loops.
inline std::vector<double> loop_compose(const ModelParams& p, WordId w, Role role, RelationId r) {
  const std::size_t d = p.dims().dim, s = p.dims().local_dim;
  std::vector<double> v(d);
  for (std::size_t j = 0; j < d; ++j) {
    v[j] = p.center(role)(w, j);
    for (std::size_t i = 0; i < s; ++i) v[j] += p.xform(role, r)(i, j) * p.local(role, r)(w, i);
  }
  return v;
}

inline double loop_norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline void fill_uniform(ModelParams& p, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  p.for_each_tensor([&](Matrix& m) {
    for (double& x : m.values()) x = u(rng);
  });
}

}  // namespace mwe::testing
