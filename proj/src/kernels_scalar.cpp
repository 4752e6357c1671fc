#include "varlab/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace varlab::kernels {
namespace {

// Complex products are spelled out instead of using operator* so that the
// scalar path has the same (non-Annex-G) semantics as the vector path.
inline void mul_parts(double ar, double ai, double br, double bi, double& re,
                      double& im) {
  re = ar * br - ai * bi;
  im = ar * bi + ai * br;
}

void cmul(cplx* a, const cplx* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double re, im;
    mul_parts(a[i].real(), a[i].imag(), b[i].real(), b[i].imag(), re, im);
    a[i] = {re, im};
  }
}

void cmul_real(cplx* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] = {a[i].real() * b[i], a[i].imag() * b[i]};
}

void abs2_accumulate(double* acc, const cplx* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    acc[i] += z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
}

void max_inplace(double* acc, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] = std::max(acc[i], v[i]);
}

void cmul_accumulate(cplx* acc, const cplx* a, const cplx* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double re, im;
    mul_parts(a[i].real(), a[i].imag(), b[i].real(), b[i].imag(), re, im);
    acc[i] = {acc[i].real() + re, acc[i].imag() + im};
  }
}

void axpy(cplx* acc, cplx s, const cplx* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double re, im;
    mul_parts(s.real(), s.imag(), x[i].real(), x[i].imag(), re, im);
    acc[i] = {acc[i].real() + re, acc[i].imag() + im};
  }
}

double sum_abs2(const cplx* z, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
  return s;
}

void abs(double* out, const cplx* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::sqrt(z[i].real() * z[i].real() + z[i].imag() * z[i].imag());
}

}  // namespace

const Table& scalar_table() {
  static const Table t{Isa::scalar, cmul,    cmul_real, abs2_accumulate, max_inplace,
                       cmul_accumulate,    axpy,      sum_abs2,        abs};
  return t;
}

}  // namespace varlab::kernels
