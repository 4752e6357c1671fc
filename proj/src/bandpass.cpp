#include "varlab/bandpass.hpp"

#include <algorithm>
#include <cmath>

#include "varlab/fft.hpp"
#include "varlab/kernels.hpp"

namespace varlab::bandpass {

namespace {

// Below this many multiply-adds the product is convolved directly.
constexpr std::size_t kDirectLimit = 512;

}  // namespace

bool Packet::is_zero() const {
  return std::all_of(values.begin(), values.end(), [](const cplx& z) { return z == cplx{}; });
}

Packet conjugate(const Packet& p) {
  Packet q;
  q.ref = -p.ref;
  const long n = static_cast<long>(p.values.size());
  q.lo = -(p.lo + n - 1);
  q.values.resize(p.values.size());
  for (long i = 0; i < n; ++i) q.values[static_cast<std::size_t>(n - 1 - i)] = std::conj(p.values[static_cast<std::size_t>(i)]);
  return q;
}

Spectrum::Spectrum(const GridSignal& f) : Spectrum(f.geom, dft(f)) {}

Spectrum::Spectrum(const Geometry& g, std::vector<cplx> bins) : geom_(g), bins_(std::move(bins)) {
  validate(g);
  if (bins_.size() != g.size) throw GridError("Spectrum: bin count does not match geometry");
  const long half = static_cast<long>(g.size / 2);
  for (long b = -half; b < half; ++b) {
    if (bins_[g.slot(b)] != cplx{}) {
      support_lo_ = b;
      break;
    }
  }
  for (long b = half - 1; b >= -half; --b) {
    if (bins_[g.slot(b)] != cplx{}) {
      support_hi_ = b;
      break;
    }
  }
}

Packet Spectrum::extract(const Interval& I, const WindowProfile& w, cplx weight) const {
  const double L = geom_.period;
  const long half = static_cast<long>(geom_.size / 2);
  Packet p;
  p.ref = std::lround(I.center * L);
  long first = static_cast<long>(std::ceil((I.center + w.nominal_lo * I.width) * L));
  long last = static_cast<long>(std::floor((I.center + w.nominal_hi * I.width) * L));
  first = std::max({first, -half, support_lo_});
  last = std::min({last, half - 1, support_hi_});
  if (last < first) {
    p.lo = 0;
    return p;
  }
  p.lo = first - p.ref;
  p.values.resize(static_cast<std::size_t>(last - first + 1));
  for (long b = first; b <= last; ++b) {
    const double v = w.at_interval(static_cast<double>(b) / L, I);
    const cplx x = bins_[geom_.slot(b)];
    p.values[static_cast<std::size_t>(b - first)] = v == 0.0 ? cplx{} : weight * v * x;
  }
  return p;
}

Accumulator::Accumulator(const Geometry& g) : geom_(g), acc_(g.size) { validate(g); }

void Accumulator::clear() { std::fill(acc_.begin(), acc_.end(), cplx{}); }

void Accumulator::scatter(long first, const cplx* c, std::size_t n, cplx scale) {
  const std::size_t m = geom_.size;
  std::size_t start = geom_.slot(first);
  std::size_t done = 0;
  while (done < n) {
    const std::size_t run = std::min(n - done, m - start);
    kernels::active().axpy(acc_.data() + start, scale, c + done, run);
    done += run;
    start = 0;
  }
}

void Accumulator::add_product(const Packet& a, const Packet& b, cplx weight) {
  const std::size_t na = a.values.size();
  const std::size_t nb = b.values.size();
  if (na == 0 || nb == 0) return;
  const std::size_t n = na + nb - 1;
  const long first = a.first() + b.first();
  const cplx scale = weight / static_cast<double>(geom_.size);
  if (na * nb <= kDirectLimit) {
    buf_a_.assign(n, cplx{});
    for (std::size_t i = 0; i < na; ++i) {
      const cplx ai = a.values[i];
      if (ai == cplx{}) continue;
      for (std::size_t j = 0; j < nb; ++j) buf_a_[i + j] += ai * b.values[j];
    }
    scatter(first, buf_a_.data(), n, scale);
    return;
  }
  const std::size_t P = fft::next_pow2(n);
  buf_a_.assign(P, cplx{});
  buf_b_.assign(P, cplx{});
  std::copy(a.values.begin(), a.values.end(), buf_a_.begin());
  std::copy(b.values.begin(), b.values.end(), buf_b_.begin());
  fft::forward(buf_a_);
  fft::forward(buf_b_);
  kernels::active().cmul(buf_a_.data(), buf_b_.data(), P);
  fft::inverse(buf_a_);
  scatter(first, buf_a_.data(), n, scale / static_cast<double>(P));
}

void Accumulator::add_abs2(const Packet& a) { add_product(a, conjugate(a)); }

GridSignal Accumulator::signal() const { return idft(geom_, acc_); }

GridSignal realize(const Geometry& g, const Packet& p) {
  std::vector<cplx> bins(g.size);
  for (std::size_t i = 0; i < p.values.size(); ++i) bins[g.slot(p.first() + static_cast<long>(i))] += p.values[i];
  return idft(g, std::move(bins));
}

}  // namespace varlab::bandpass
