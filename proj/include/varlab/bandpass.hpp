#pragma once

// Window-limited pieces of a spectrum and products of them. A packet holds
// the DFT bins of f inside one window, already weighted by the window; the
// accumulator adds spectra of packet products without ever forming the
// full-length pieces, so a sum over many windows costs one inverse FFT.

#include <span>
#include <vector>

#include "varlab/grid.hpp"
#include "varlab/windows.hpp"

namespace varlab::bandpass {

struct Packet {
  long ref = 0;  // signed reference bin
  long lo = 0;   // offset of values[0] from ref
  std::vector<cplx> values;

  bool is_zero() const;
  long first() const { return ref + lo; }
  long last() const { return ref + lo + static_cast<long>(values.size()) - 1; }
};

// Packet of the conjugated piece: conj(u)(x) has bins conj(a_d) at -(ref+d).
Packet conjugate(const Packet& p);

class Spectrum {
 public:
  explicit Spectrum(const GridSignal& f);
  Spectrum(const Geometry& g, std::vector<cplx> bins);

  const Geometry& geom() const { return geom_; }
  std::span<const cplx> bins() const { return bins_; }
  // Signed range of bins that are not exactly zero (empty when lo > hi).
  long support_lo() const { return support_lo_; }
  long support_hi() const { return support_hi_; }

  // Bins of the window w rescaled onto I, times weight. Window bins outside
  // the representable range [-M/2, M/2) are dropped.
  Packet extract(const Interval& I, const WindowProfile& w, cplx weight = {1.0, 0.0}) const;

 private:
  Geometry geom_;
  std::vector<cplx> bins_;
  long support_lo_ = 1;
  long support_hi_ = 0;
};

class Accumulator {
 public:
  explicit Accumulator(const Geometry& g);

  // Adds the raw DFT of u_a * u_b, where u_p is the time signal of packet p.
  void add_product(const Packet& a, const Packet& b, cplx weight = {1.0, 0.0});
  // Adds the raw DFT of |u_a|^2.
  void add_abs2(const Packet& a);
  void clear();

  const Geometry& geom() const { return geom_; }
  std::span<const cplx> bins() const { return acc_; }
  GridSignal signal() const;

 private:
  void scatter(long first, const cplx* c, std::size_t n, cplx scale);

  Geometry geom_;
  std::vector<cplx> acc_;
  std::vector<cplx> buf_a_, buf_b_;
};

// Full-length time signal of a packet; the reference path for tests.
GridSignal realize(const Geometry& g, const Packet& p);

}  // namespace varlab::bandpass
