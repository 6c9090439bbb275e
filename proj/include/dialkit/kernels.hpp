#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops. Each kernel has a scalar reference in
// kernels_scalar.cpp and, on x86-64, an AVX2 variant chosen at runtime.
//
// Equivalence contract:
//   weighted_row_sum  bit-identical across ISAs (same per-element op order,
//                     no FMA contraction).
//   dot / squared_l2  equal within reassociation error (lane-wise partial
//                     sums); deterministic for a fixed ISA.
namespace dialkit::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

// Best ISA the running CPU supports and this build includes.
Isa detected_isa();
Isa active_isa();
// Throws DomainError if the requested ISA is unavailable.
void set_active_isa(Isa isa);

// out[x] = sum_k weights[k] * rows[k][x], accumulated in k order from 0.
void weighted_row_sum(std::span<const float* const> rows, std::span<const float> weights,
                      std::span<float> out);

double dot(std::span<const double> a, std::span<const double> b);
double squared_l2(std::span<const double> a, std::span<const double> b);

namespace scalar {
void weighted_row_sum(std::span<const float* const> rows, std::span<const float> weights,
                      std::span<float> out);
double dot(std::span<const double> a, std::span<const double> b);
double squared_l2(std::span<const double> a, std::span<const double> b);
}  // namespace scalar

namespace avx2 {
void weighted_row_sum(std::span<const float* const> rows, std::span<const float> weights,
                      std::span<float> out);
double dot(std::span<const double> a, std::span<const double> b);
double squared_l2(std::span<const double> a, std::span<const double> b);
}  // namespace avx2

}  // namespace dialkit::kernels
