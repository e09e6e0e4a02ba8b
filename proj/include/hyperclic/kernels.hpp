#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision vector/matrix primitives behind a runtime-selected
// backend. Every operation has a scalar reference implementation plus SIMD
// variants (AVX2 on x86-64, NEON on aarch64) picked once at startup from CPU
// features; HYPERCLIC_KERNELS=scalar|avx2|neon|auto overrides the choice.
// SIMD variants reassociate reductions, so results may differ from scalar in
// the last bits; equivalence is tested to tight relative tolerance.

namespace hyperclic::kernels {

enum class Backend { scalar, avx2, neon };

Backend active_backend();
std::string_view backend_name(Backend b);

// Force a backend (tests). Returns false and leaves the selection unchanged
// if the requested backend is not compiled in or not supported by this CPU.
bool set_backend(Backend b);
// Back to automatic detection (env override still honored).
void reset_backend();

/// <x, y>
double dot(std::span<const double> x, std::span<const double> y);
/// <x, x>
double squared_norm(std::span<const double> x);
/// ||x - y||^2
double squared_distance(std::span<const double> x, std::span<const double> y);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// x *= a
void scale(double a, std::span<double> x);
/// out = a * x + b * y
void lincomb(double a, std::span<const double> x, double b,
             std::span<const double> y, std::span<double> out);
/// out = W x + bias, W row-major (rows x cols); bias may be empty
void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<const double> bias,
            std::span<double> out);
/// out = W^T g, W row-major (rows x cols), g has length rows
void matvec_t(std::span<const double> w, std::size_t rows, std::size_t cols,
              std::span<const double> g, std::span<double> out);
/// W += a * g x^T (rank-1 update of a row-major rows x cols matrix)
void rank1_update(std::span<double> w, std::size_t rows, std::size_t cols,
                  double a, std::span<const double> g,
                  std::span<const double> x);

}  // namespace hyperclic::kernels
