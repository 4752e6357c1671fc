// Compiled with -mavx2 -mfma -ffp-contract=off. Element-wise kernels round
// exactly like the scalar reference; only the reductions reorder sums.
#include "varlab/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace varlab::kernels {
namespace {

inline __m256d load2(const cplx* p) {
  return _mm256_loadu_pd(reinterpret_cast<const double*>(p));
}
inline void store2(cplx* p, __m256d v) {
  _mm256_storeu_pd(reinterpret_cast<double*>(p), v);
}

// [ar, ai, ...] * [br, bi, ...] with the scalar operation order.
inline __m256d mul2(__m256d a, __m256d b) {
  __m256d b_re = _mm256_movedup_pd(b);
  __m256d b_im = _mm256_permute_pd(b, 0xF);
  __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_addsub_pd(_mm256_mul_pd(a, b_re), _mm256_mul_pd(a_sw, b_im));
}

// |z|^2 for four complex values packed in two registers, in index order.
inline __m256d norm4(__m256d v0, __m256d v1) {
  __m256d h = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
  return _mm256_permute4x64_pd(h, 0xD8);
}

void cmul(cplx* a, const cplx* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(a + i, mul2(load2(a + i), load2(b + i)));
  if (i < n) scalar_table().cmul(a + i, b + i, n - i);
}

void cmul_real(cplx* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d bb = _mm256_castpd128_pd256(_mm_loadu_pd(b + i));
    bb = _mm256_permute4x64_pd(bb, 0x50);
    store2(a + i, _mm256_mul_pd(load2(a + i), bb));
  }
  if (i < n) scalar_table().cmul_real(a + i, b + i, n - i);
}

void abs2_accumulate(double* acc, const cplx* z, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = norm4(load2(z + i), load2(z + i + 2));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), s));
  }
  if (i < n) scalar_table().abs2_accumulate(acc + i, z + i, n - i);
}

void max_inplace(double* acc, const double* v, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(acc + i);
    __m256d b = _mm256_loadu_pd(v + i);
    // max_pd(b, a) returns a when the comparison is unordered, like std::max(a, b).
    _mm256_storeu_pd(acc + i, _mm256_max_pd(b, a));
  }
  if (i < n) scalar_table().max_inplace(acc + i, v + i, n - i);
}

void cmul_accumulate(cplx* acc, const cplx* a, const cplx* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    store2(acc + i, _mm256_add_pd(load2(acc + i), mul2(load2(a + i), load2(b + i))));
  if (i < n) scalar_table().cmul_accumulate(acc + i, a + i, b + i, n - i);
}

void axpy(cplx* acc, cplx s, const cplx* x, std::size_t n) {
  const __m256d s_re = _mm256_set1_pd(s.real());
  const __m256d s_im = _mm256_set1_pd(s.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d v = load2(x + i);
    __m256d prod = _mm256_addsub_pd(_mm256_mul_pd(s_re, v),
                                    _mm256_mul_pd(s_im, _mm256_permute_pd(v, 0x5)));
    store2(acc + i, _mm256_add_pd(load2(acc + i), prod));
  }
  if (i < n) scalar_table().axpy(acc + i, s, x + i, n - i);
}

double sum_abs2(const cplx* z, std::size_t n) {
  __m256d s = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) s = _mm256_add_pd(s, norm4(load2(z + i), load2(z + i + 2)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, s);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  if (i < n) total += scalar_table().sum_abs2(z + i, n - i);
  return total;
}

void abs(double* out, const cplx* z, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(norm4(load2(z + i), load2(z + i + 2))));
  if (i < n) scalar_table().abs(out + i, z + i, n - i);
}

}  // namespace

const Table& avx2_table() {
  static const Table t{Isa::avx2,      cmul, cmul_real, abs2_accumulate, max_inplace,
                       cmul_accumulate, axpy, sum_abs2,  abs};
  return t;
}

}  // namespace varlab::kernels
