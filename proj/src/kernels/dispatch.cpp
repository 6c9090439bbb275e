#include <atomic>

#include "dialkit/errors.hpp"
#include "dialkit/kernels.hpp"

namespace dialkit::kernels {

#ifndef DIALKIT_HAVE_AVX2
// Stubs keep the avx2 namespace linkable; set_active_isa refuses to select them.
namespace avx2 {
void weighted_row_sum(std::span<const float* const> rows, std::span<const float> weights,
                      std::span<float> out) {
  scalar::weighted_row_sum(rows, weights, out);
}
double dot(std::span<const double> a, std::span<const double> b) { return scalar::dot(a, b); }
double squared_l2(std::span<const double> a, std::span<const double> b) {
  return scalar::squared_l2(a, b);
}
}  // namespace avx2
#endif

namespace {

Isa probe_cpu() {
#if defined(DIALKIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#endif
  return Isa::scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionMismatch("vector lengths differ: " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
  static const Isa isa = probe_cpu();
  return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) {
    throw DomainError("AVX2 kernels are not available on this CPU/build");
  }
  active().store(isa, std::memory_order_relaxed);
}

void weighted_row_sum(std::span<const float* const> rows, std::span<const float> weights,
                      std::span<float> out) {
  check_sizes(rows.size(), weights.size());
  if (active_isa() == Isa::avx2) return avx2::weighted_row_sum(rows, weights, out);
  scalar::weighted_row_sum(rows, weights, out);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return active_isa() == Isa::avx2 ? avx2::dot(a, b) : scalar::dot(a, b);
}

double squared_l2(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return active_isa() == Isa::avx2 ? avx2::squared_l2(a, b) : scalar::squared_l2(a, b);
}

}  // namespace dialkit::kernels
