#include <immintrin.h>

#include "dialkit/kernels.hpp"

namespace dialkit::kernels::avx2 {

namespace {

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

void weighted_row_sum(std::span<const float* const> rows, std::span<const float> weights,
                      std::span<float> out) {
  const std::size_t n = out.size();
  const std::size_t taps = weights.size();
  std::size_t x = 0;
  for (; x + 8 <= n; x += 8) {
    __m256 acc = _mm256_setzero_ps();
    for (std::size_t k = 0; k < taps; ++k) {
      const __m256 w = _mm256_set1_ps(weights[k]);
      acc = _mm256_add_ps(acc, _mm256_mul_ps(w, _mm256_loadu_ps(rows[k] + x)));
    }
    _mm256_storeu_ps(out.data() + x, acc);
  }
  for (; x < n; ++x) {
    float acc = 0.0f;
    for (std::size_t k = 0; k < taps; ++k) acc = acc + weights[k] * rows[k][x];
    out[x] = acc;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i)));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double squared_l2(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace dialkit::kernels::avx2
