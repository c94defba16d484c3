#pragma once

// Thin FFTW layer. Plans are created once per (transform, size) under a lock,
// with FFTW_ESTIMATE | FFTW_UNALIGNED so results are reproducible bit for bit
// and any buffer can be passed to the new-array execute functions, which are
// safe to call concurrently.

#include <complex>
#include <span>

namespace cgolab::fft {

using cplx = std::complex<double>;

// Unnormalised in-place 3D DFT over an n^3 x-fastest block.
// forward: X(b) = sum_x x e^{-2 pi i b.x / n}; backward has the + sign.
void forward_3d(std::span<cplx> data, int n);
void backward_3d(std::span<cplx> data, int n);

// In-place 3D DST-II (RODFT10) and DST-III (RODFT01) applied to the real and
// imaginary parts separately. DST-III(DST-II(x)) = (2n)^3 x.
void dst2_3d(std::span<cplx> data, int n);
void dst3_3d(std::span<cplx> data, int n);

// In-place 2D DCT-II (REDFT10) / DCT-III (REDFT01) on an n x n face block.
// DCT-III(DCT-II(x)) = (2n)^2 x.
void dct2_2d(std::span<cplx> data, int n);
void dct3_2d(std::span<cplx> data, int n);

}  // namespace cgolab::fft
