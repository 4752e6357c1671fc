#pragma once

// Data-parallel inner loops shared by the operators. Every kernel has a
// portable scalar reference; wider variants are picked once at startup from
// what the CPU reports and must agree with the reference (see test_kernels).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace varlab::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

struct Table {
  Isa isa;
  // a[i] *= b[i]
  void (*cmul)(cplx* a, const cplx* b, std::size_t n);
  // a[i] *= b[i], b real
  void (*cmul_real)(cplx* a, const double* b, std::size_t n);
  // acc[i] += |z[i]|^2
  void (*abs2_accumulate)(double* acc, const cplx* z, std::size_t n);
  // acc[i] = max(acc[i], v[i])
  void (*max_inplace)(double* acc, const double* v, std::size_t n);
  // acc[i] += a[i] * b[i]
  void (*cmul_accumulate)(cplx* acc, const cplx* a, const cplx* b, std::size_t n);
  // acc[i] += s * x[i]
  void (*axpy)(cplx* acc, cplx s, const cplx* x, std::size_t n);
  // sum |z[i]|^2
  double (*sum_abs2)(const cplx* z, std::size_t n);
  // out[i] = |z[i]|
  void (*abs)(double* out, const cplx* z, std::size_t n);
};

const Table& scalar_table();
bool available(Isa isa);
const Table& table(Isa isa);

// Widest available ISA unless VARLAB_ISA=scalar is set in the environment.
const Table& active();
std::string_view name(Isa isa);

// Span conveniences over the active table.
inline void cmul(std::span<cplx> a, std::span<const cplx> b) {
  active().cmul(a.data(), b.data(), a.size());
}
inline void cmul_real(std::span<cplx> a, std::span<const double> b) {
  active().cmul_real(a.data(), b.data(), a.size());
}
inline void abs2_accumulate(std::span<double> acc, std::span<const cplx> z) {
  active().abs2_accumulate(acc.data(), z.data(), acc.size());
}
inline void max_inplace(std::span<double> acc, std::span<const double> v) {
  active().max_inplace(acc.data(), v.data(), acc.size());
}
inline void cmul_accumulate(std::span<cplx> acc, std::span<const cplx> a,
                            std::span<const cplx> b) {
  active().cmul_accumulate(acc.data(), a.data(), b.data(), acc.size());
}
inline void axpy(std::span<cplx> acc, cplx s, std::span<const cplx> x) {
  active().axpy(acc.data(), s, x.data(), acc.size());
}
inline double sum_abs2(std::span<const cplx> z) {
  return active().sum_abs2(z.data(), z.size());
}
inline void abs(std::span<double> out, std::span<const cplx> z) {
  active().abs(out.data(), z.data(), out.size());
}

}  // namespace varlab::kernels
