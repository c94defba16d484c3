#include "cgolab/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>
#include <vector>

#include "cgolab/errors.hpp"

namespace cgolab::kernels {

namespace {

Isa detect_isa() {
#if defined(CGOLAB_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  if (const char* env = std::getenv("CGOLAB_ISA"); env != nullptr && std::string(env) == "scalar") {
    return Isa::scalar;
  }
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

std::atomic<Isa>& isa_slot() {
  static std::atomic<Isa> slot{detect_isa()};
  return slot;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw ConfigError("kernel operands differ in length");
}

}  // namespace

bool avx2_available() {
#if defined(CGOLAB_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_available()) throw ConfigError("AVX2 kernels not available on this CPU");
  isa_slot().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

#if defined(CGOLAB_HAVE_AVX2)
#define CGOLAB_DISPATCH(fn, ...) \
  (active_isa() == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define CGOLAB_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void caxpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  check_sizes(x.size(), y.size());
  CGOLAB_DISPATCH(caxpy, alpha, x.data(), y.data(), x.size());
}

cplx cdotu(std::span<const cplx> x, std::span<const cplx> y) {
  check_sizes(x.size(), y.size());
  return CGOLAB_DISPATCH(cdotu, x.data(), y.data(), x.size());
}

void cmul(std::span<const cplx> x, std::span<const cplx> y, std::span<cplx> out) {
  check_sizes(x.size(), y.size());
  check_sizes(x.size(), out.size());
  CGOLAB_DISPATCH(cmul, x.data(), y.data(), out.data(), x.size());
}

double cnorm2(std::span<const cplx> x) { return CGOLAB_DISPATCH(cnorm2, x.data(), x.size()); }

void contract_z(std::span<const cplx> f, std::size_t n, std::span<const cplx> az, std::span<cplx> out) {
  const std::size_t plane = n * n;
  check_sizes(f.size(), plane * n);
  check_sizes(az.size(), n);
  check_sizes(out.size(), plane);
  std::fill(out.begin(), out.end(), cplx(0.0, 0.0));
  for (std::size_t l = 0; l < n; ++l) caxpy(az[l], f.subspan(l * plane, plane), out);
}

cplx separable_sum_2d(std::span<const cplx> g, std::size_t n, std::span<const cplx> ax,
                      std::span<const cplx> ay) {
  check_sizes(g.size(), n * n);
  cplx total(0.0, 0.0);
  for (std::size_t j = 0; j < n; ++j) total += ay[j] * cdotu(g.subspan(j * n, n), ax);
  return total;
}

cplx separable_sum(std::span<const cplx> f, std::size_t n, std::span<const cplx> ax,
                   std::span<const cplx> ay, std::span<const cplx> az) {
  std::vector<cplx> plane(n * n);
  contract_z(f, n, az, plane);
  return separable_sum_2d(plane, n, ax, ay);
}

void rank1_accumulate(cplx c, std::span<const cplx> ax, std::span<const cplx> ay,
                      std::span<const cplx> az, std::span<cplx> out) {
  const std::size_t n = ax.size();
  check_sizes(ay.size(), n);
  check_sizes(az.size(), n);
  check_sizes(out.size(), n * n * n);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t j = 0; j < n; ++j) {
      caxpy(c * ay[j] * az[l], ax, out.subspan(n * (j + n * l), n));
    }
  }
}

}  // namespace cgolab::kernels
