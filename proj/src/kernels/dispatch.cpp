#include "hyperclic/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "table.hpp"

namespace hyperclic::kernels {
namespace {

using detail::KernelTable;

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#ifdef HYPERCLIC_HAVE_AVX2
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#ifdef HYPERCLIC_HAVE_NEON
      return true;  // NEON is baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Backend b) {
  switch (b) {
#ifdef HYPERCLIC_HAVE_AVX2
    case Backend::avx2:
      return detail::avx2_table();
#endif
#ifdef HYPERCLIC_HAVE_NEON
    case Backend::neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

Backend detect_backend() {
  if (const char* env = std::getenv("HYPERCLIC_KERNELS")) {
    const std::string_view v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
    if (v == "neon" && backend_available(Backend::neon)) return Backend::neon;
    // "auto" or anything unusable falls through to detection
  }
  if (backend_available(Backend::avx2)) return Backend::avx2;
  if (backend_available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

struct Selection {
  Backend backend;
  const KernelTable* table;
};

std::atomic<const Selection*> g_selection{nullptr};

const Selection* selection() {
  const Selection* s = g_selection.load(std::memory_order_acquire);
  if (s) return s;
  const Backend b = detect_backend();
  static Selection detected;
  detected = {b, &table_for(b)};
  const Selection* expected = nullptr;
  g_selection.compare_exchange_strong(expected, &detected,
                                      std::memory_order_acq_rel);
  return g_selection.load(std::memory_order_acquire);
}

const KernelTable& tab() { return *selection()->table; }

}  // namespace

Backend active_backend() { return selection()->backend; }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

bool set_backend(Backend b) {
  if (!backend_available(b)) return false;
  static Selection forced;
  forced = {b, &table_for(b)};
  g_selection.store(&forced, std::memory_order_release);
  return true;
}

void reset_backend() { g_selection.store(nullptr, std::memory_order_release); }

double dot(std::span<const double> x, std::span<const double> y) {
  return tab().dot(x, y);
}

double squared_norm(std::span<const double> x) { return tab().squared_norm(x); }

double squared_distance(std::span<const double> x, std::span<const double> y) {
  return tab().squared_distance(x, y);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  tab().axpy(a, x, y);
}

void scale(double a, std::span<double> x) { tab().scale(a, x); }

void lincomb(double a, std::span<const double> x, double b,
             std::span<const double> y, std::span<double> out) {
  tab().lincomb(a, x, b, y, out);
}

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<const double> bias,
            std::span<double> out) {
  tab().matvec(w, rows, cols, x, bias, out);
}

void matvec_t(std::span<const double> w, std::size_t rows, std::size_t cols,
              std::span<const double> g, std::span<double> out) {
  tab().matvec_t(w, rows, cols, g, out);
}

void rank1_update(std::span<double> w, std::size_t rows, std::size_t cols,
                  double a, std::span<const double> g,
                  std::span<const double> x) {
  tab().rank1_update(w, rows, cols, a, g, x);
}

}  // namespace hyperclic::kernels
