#include "dialkit/kernels.hpp"

namespace dialkit::kernels::scalar {

void weighted_row_sum(std::span<const float* const> rows, std::span<const float> weights,
                      std::span<float> out) {
  const std::size_t n = out.size();
  const std::size_t taps = weights.size();
  for (std::size_t x = 0; x < n; ++x) {
    float acc = 0.0f;
    for (std::size_t k = 0; k < taps; ++k) acc = acc + weights[k] * rows[k][x];
    out[x] = acc;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_l2(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace dialkit::kernels::scalar
