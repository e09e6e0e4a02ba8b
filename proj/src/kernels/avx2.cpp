#include <immintrin.h>

#include <cassert>

#include "table.hpp"

// AVX2+FMA kernels, 4 doubles per lane. Reductions keep two accumulators and
// fold at the end; tails fall back to scalar.

namespace hyperclic::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i + 4]), _mm256_loadu_pd(&y[i + 4]), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double squared_norm_avx2(std::span<const double> x) {
  const std::size_t n = x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d a = _mm256_loadu_pd(&x[i]);
    const __m256d b = _mm256_loadu_pd(&x[i + 4]);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(&x[i]);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

double squared_distance_avx2(std::span<const double> x,
                             std::span<const double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

void axpy_avx2(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r =
        _mm256_fmadd_pd(av, _mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]));
    _mm256_storeu_pd(&y[i], r);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, std::span<double> x) {
  const std::size_t n = x.size();
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(&x[i], _mm256_mul_pd(av, _mm256_loadu_pd(&x[i])));
  }
  for (; i < n; ++i) x[i] *= a;
}

void lincomb_avx2(double a, std::span<const double> x, double b,
                  std::span<const double> y, std::span<double> out) {
  assert(x.size() == y.size() && x.size() == out.size());
  const std::size_t n = x.size();
  const __m256d av = _mm256_set1_pd(a);
  const __m256d bv = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_fmadd_pd(
        av, _mm256_loadu_pd(&x[i]), _mm256_mul_pd(bv, _mm256_loadu_pd(&y[i])));
    _mm256_storeu_pd(&out[i], r);
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void matvec_avx2(std::span<const double> w, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<const double> bias,
                 std::span<double> out) {
  assert(w.size() == rows * cols && x.size() == cols && out.size() == rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = dot_avx2({w.data() + r * cols, cols}, x);
    out[r] = bias.empty() ? s : s + bias[r];
  }
}

void matvec_t_avx2(std::span<const double> w, std::size_t rows,
                   std::size_t cols, std::span<const double> g,
                   std::span<double> out) {
  assert(w.size() == rows * cols && g.size() == rows && out.size() == cols);
  for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    axpy_avx2(g[r], {w.data() + r * cols, cols}, out);
  }
}

void rank1_update_avx2(std::span<double> w, std::size_t rows, std::size_t cols,
                       double a, std::span<const double> g,
                       std::span<const double> x) {
  assert(w.size() == rows * cols && g.size() == rows && x.size() == cols);
  for (std::size_t r = 0; r < rows; ++r) {
    axpy_avx2(a * g[r], x, {w.data() + r * cols, cols});
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t = {
      dot_avx2,      squared_norm_avx2, squared_distance_avx2,
      axpy_avx2,     scale_avx2,        lincomb_avx2,
      matvec_avx2,   matvec_t_avx2,     rank1_update_avx2,
  };
  return t;
}

}  // namespace hyperclic::kernels::detail
