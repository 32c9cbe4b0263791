#include "mwe/matrix.h"

#include <algorithm>
#include <cmath>

namespace mwe {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na == 0.0 || nb == 0.0) {
    throw std::domain_error("cosine of a zero-norm vector");
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

}  // namespace mwe
