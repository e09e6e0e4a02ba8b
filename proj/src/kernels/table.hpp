#pragma once

#include <cstddef>
#include <span>

// Internal: per-backend function tables. Only dispatch.cpp and the backend
// translation units include this.

namespace hyperclic::kernels::detail {

struct KernelTable {
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*squared_norm)(std::span<const double>);
  double (*squared_distance)(std::span<const double>, std::span<const double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  void (*scale)(double, std::span<double>);
  void (*lincomb)(double, std::span<const double>, double,
                  std::span<const double>, std::span<double>);
  void (*matvec)(std::span<const double>, std::size_t, std::size_t,
                 std::span<const double>, std::span<const double>,
                 std::span<double>);
  void (*matvec_t)(std::span<const double>, std::size_t, std::size_t,
                   std::span<const double>, std::span<double>);
  void (*rank1_update)(std::span<double>, std::size_t, std::size_t, double,
                       std::span<const double>, std::span<const double>);
};

const KernelTable& scalar_table();
#ifdef HYPERCLIC_HAVE_AVX2
const KernelTable& avx2_table();
#endif
#ifdef HYPERCLIC_HAVE_NEON
const KernelTable& neon_table();
#endif

}  // namespace hyperclic::kernels::detail
