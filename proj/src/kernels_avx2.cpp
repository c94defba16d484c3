// Compiled with -mavx2 -mfma. Only reached after a CPUID check.
#include <immintrin.h>

#include "cgolab/kernels.hpp"

namespace cgolab::kernels::avx2 {

namespace {

inline const double* as_doubles(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* as_doubles(cplx* p) { return reinterpret_cast<double*>(p); }

// [a0 b0 a1 b1] -> horizontal sums of even and odd lanes
inline void reduce_even_odd(__m256d v, double& even, double& odd) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  even = t[0] + t[2];
  odd = t[1] + t[3];
}

}  // namespace

void caxpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  const double* xd = as_doubles(x);
  double* yd = as_doubles(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d xs = _mm256_permute_pd(xv, 0b0101);
    // even: ar*xr - ai*xi, odd: ar*xi + ai*xr
    const __m256d prod = _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, xs));
    _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yd + 2 * i), prod));
  }
  if (i < n) scalar::caxpy(alpha, x + i, y + i, n - i);
}

cplx cdotu(const cplx* x, const cplx* y, std::size_t n) {
  const double* xd = as_doubles(x);
  const double* yd = as_doubles(y);
  __m256d acc1 = _mm256_setzero_pd();  // [xr*yr, xi*yr]
  __m256d acc2 = _mm256_setzero_pd();  // [xi*yi, xr*yi]
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    const __m256d yr = _mm256_movedup_pd(yv);
    const __m256d yi = _mm256_permute_pd(yv, 0b1111);
    const __m256d xs = _mm256_permute_pd(xv, 0b0101);
    acc1 = _mm256_fmadd_pd(xv, yr, acc1);
    acc2 = _mm256_fmadd_pd(xs, yi, acc2);
  }
  double e1, o1, e2, o2;
  reduce_even_odd(acc1, e1, o1);
  reduce_even_odd(acc2, e2, o2);
  cplx result(e1 - e2, o1 + o2);
  if (i < n) result += scalar::cdotu(x + i, y + i, n - i);
  return result;
}

void cmul(const cplx* x, const cplx* y, cplx* out, std::size_t n) {
  const double* xd = as_doubles(x);
  const double* yd = as_doubles(y);
  double* od = as_doubles(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    const __m256d yr = _mm256_movedup_pd(yv);
    const __m256d yi = _mm256_permute_pd(yv, 0b1111);
    const __m256d xs = _mm256_permute_pd(xv, 0b0101);
    _mm256_storeu_pd(od + 2 * i, _mm256_fmaddsub_pd(xv, yr, _mm256_mul_pd(xs, yi)));
  }
  if (i < n) scalar::cmul(x + i, y + i, out + i, n - i);
}

double cnorm2(const cplx* x, std::size_t n) {
  const double* xd = as_doubles(x);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    acc = _mm256_fmadd_pd(xv, xv, acc);
  }
  double e, o;
  reduce_even_odd(acc, e, o);
  double result = e + o;
  if (i < n) result += scalar::cnorm2(x + i, n - i);
  return result;
}

}  // namespace cgolab::kernels::avx2
