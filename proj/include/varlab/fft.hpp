#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace varlab::fft {

using cplx = std::complex<double>;

// Unnormalized in-place transforms of power-of-two length (FFTW sign
// conventions). forward: X_j = sum_m x_m e^{-2 pi i j m / n};
// inverse: x_m = sum_j X_j e^{+2 pi i j m / n}.
void forward(std::span<cplx> data);
void inverse(std::span<cplx> data);

// Same, but the inverse divides by n so that inverse(forward(x)) == x.
void inverse_normalized(std::span<cplx> data);

bool is_pow2(std::size_t n);
std::size_t next_pow2(std::size_t n);

}  // namespace varlab::fft
