#pragma once

// Periodic discrete substrate. A GridSignal samples a function on
// [origin, origin + M * spacing); frequencies live on j / L for
// j in [-M/2, M/2), stored in FFT order.

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace varlab {

using cplx = std::complex<double>;

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Geometry {
  std::size_t size = 0;  // M, power of two >= 8
  double period = 0.0;   // L
  double origin = 0.0;

  double spacing() const { return period / static_cast<double>(size); }
  // Highest representable frequency magnitude, M / (2L).
  double nyquist() const { return static_cast<double>(size) / (2.0 * period); }
  double position(std::size_t i) const { return origin + static_cast<double>(i) * spacing(); }
  // Frequency of spectrum bin j (FFT order).
  double frequency(std::size_t j) const;
  // Signed bin index of bin j (FFT order), in [-M/2, M/2).
  long signed_bin(std::size_t j) const;
  // FFT-order slot of signed bin b (taken modulo M).
  std::size_t slot(long b) const;

  bool operator==(const Geometry&) const = default;
};

void validate(const Geometry& g);

struct GridSignal {
  Geometry geom;
  std::vector<cplx> samples;

  std::size_t size() const { return samples.size(); }
  double spacing() const { return geom.spacing(); }
  double period() const { return geom.period; }
  double origin() const { return geom.origin; }
};

struct Interval {
  double center = 0.0;
  double width = 1.0;

  double lo() const { return center - width / 2.0; }
  double hi() const { return center + width / 2.0; }
  static Interval from_endpoints(double lo, double hi);
};

GridSignal make_grid(std::size_t M, double L, double origin = 0.0);
GridSignal make_grid(const Geometry& g);

// Sample a function of position.
GridSignal sample(const Geometry& g, const std::function<cplx(double)>& fn);

// Spectrum scaled so that it approximates the continuous transform
// f^(xi_j) = int f(x) e^{-2 pi i xi_j x} dx, including the origin phase.
std::vector<cplx> spectrum(const GridSignal& f);
GridSignal from_spectrum(const Geometry& g, std::vector<cplx> spec);

// Raw DFT (FFT order, unnormalized, no origin phase) and its inverse. These
// are what the operators work with; the origin phase cancels in every
// multiplier.
std::vector<cplx> dft(const GridSignal& f);
GridSignal idft(const Geometry& g, std::vector<cplx> bins);

double lp_norm(const GridSignal& f, double p);
double lp_norm(const std::vector<double>& values, double spacing, double p);

using Symbol = std::function<cplx(double)>;
using RealSymbol = std::function<double(double)>;

GridSignal apply_multiplier(const GridSignal& f, const Symbol& symbol);

// Output(x) = f(x - shift) e^{2 pi i freq x}; the shift is spectral and
// wraps around the period.
GridSignal shift_modulate(const GridSignal& f, double shift, double freq);

// Sample-wise helpers.
GridSignal add(const GridSignal& a, const GridSignal& b);
GridSignal scale(const GridSignal& a, cplx s);
std::vector<double> abs_values(const GridSignal& f);
void check_same_geometry(const GridSignal& a, const GridSignal& b);

}  // namespace varlab

namespace varlab {

struct WindowProfile;

// f * F^{-1}[w_I], with the profile's nominal support rescaled onto I.
// Throws GridError if I leaves the representable band.
GridSignal project_window(const GridSignal& f, const Interval& I, const WindowProfile& w);

}  // namespace varlab
