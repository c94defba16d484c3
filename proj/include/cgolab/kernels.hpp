#pragma once

// Complex inner-loop kernels. Every kernel has a portable scalar reference
// and an AVX2+FMA variant; the dispatcher picks one at first use from CPUID.
// The two variants agree to rounding (the AVX2 reductions reassociate).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace cgolab::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

// ISA selected for this process. Overridable for equivalence tests.
Isa active_isa();
void force_isa(Isa isa);
bool avx2_available();
std::string_view isa_name(Isa isa);

// y += alpha * x
void caxpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
// sum_i x_i * y_i (no conjugation)
cplx cdotu(std::span<const cplx> x, std::span<const cplx> y);
// out_i = x_i * y_i; out may alias x or y
void cmul(std::span<const cplx> x, std::span<const cplx> y, std::span<cplx> out);
// sum_i |x_i|^2
double cnorm2(std::span<const cplx> x);

namespace scalar {
void caxpy(cplx alpha, const cplx* x, cplx* y, std::size_t n);
cplx cdotu(const cplx* x, const cplx* y, std::size_t n);
void cmul(const cplx* x, const cplx* y, cplx* out, std::size_t n);
double cnorm2(const cplx* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
void caxpy(cplx alpha, const cplx* x, cplx* y, std::size_t n);
cplx cdotu(const cplx* x, const cplx* y, std::size_t n);
void cmul(const cplx* x, const cplx* y, cplx* out, std::size_t n);
double cnorm2(const cplx* x, std::size_t n);
}  // namespace avx2

// sum_{i,j,l} f[i + n*(j + n*l)] * ax[i] * ay[j] * az[l] over an n^3 block
// stored x-fastest. Contracts z first, then y, then x.
cplx separable_sum(std::span<const cplx> f, std::size_t n, std::span<const cplx> ax,
                   std::span<const cplx> ay, std::span<const cplx> az);

// out[i + n*j] = sum_l f[i + n*(j + n*l)] * az[l]
void contract_z(std::span<const cplx> f, std::size_t n, std::span<const cplx> az, std::span<cplx> out);

// sum_{i,j} g[i + n*j] * ax[i] * ay[j]
cplx separable_sum_2d(std::span<const cplx> g, std::size_t n, std::span<const cplx> ax,
                      std::span<const cplx> ay);

// out[i + n*(j + n*l)] += c * ax[i] * ay[j] * az[l]
void rank1_accumulate(cplx c, std::span<const cplx> ax, std::span<const cplx> ay,
                      std::span<const cplx> az, std::span<cplx> out);

}  // namespace cgolab::kernels
