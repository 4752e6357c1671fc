#include "varlab/grid.hpp"

#include <cmath>
#include <numbers>

#include "varlab/fft.hpp"
#include "varlab/kernels.hpp"
#include "varlab/windows.hpp"

namespace varlab {

double Geometry::frequency(std::size_t j) const {
  return static_cast<double>(signed_bin(j)) / period;
}

long Geometry::signed_bin(std::size_t j) const {
  const long m = static_cast<long>(size);
  const long b = static_cast<long>(j);
  return b < m / 2 ? b : b - m;
}

std::size_t Geometry::slot(long b) const {
  const long m = static_cast<long>(size);
  long r = b % m;
  if (r < 0) r += m;
  return static_cast<std::size_t>(r);
}

void validate(const Geometry& g) {
  if (g.size < 8 || !fft::is_pow2(g.size))
    throw GridError("grid size must be a power of two >= 8");
  if (!(g.period > 0.0) || !std::isfinite(g.period))
    throw GridError("grid period must be positive and finite");
  if (!std::isfinite(g.origin)) throw GridError("grid origin must be finite");
}

Interval Interval::from_endpoints(double lo, double hi) {
  if (!(hi > lo)) throw GridError("interval needs hi > lo");
  return {(lo + hi) / 2.0, hi - lo};
}

GridSignal make_grid(std::size_t M, double L, double origin) {
  return make_grid(Geometry{M, L, origin});
}

GridSignal make_grid(const Geometry& g) {
  validate(g);
  return GridSignal{g, std::vector<cplx>(g.size, cplx{0.0, 0.0})};
}

GridSignal sample(const Geometry& g, const std::function<cplx(double)>& fn) {
  GridSignal out = make_grid(g);
  for (std::size_t i = 0; i < g.size; ++i) out.samples[i] = fn(g.position(i));
  return out;
}

std::vector<cplx> dft(const GridSignal& f) {
  std::vector<cplx> bins = f.samples;
  fft::forward(bins);
  return bins;
}

GridSignal idft(const Geometry& g, std::vector<cplx> bins) {
  if (bins.size() != g.size) throw GridError("idft: bin count does not match geometry");
  fft::inverse_normalized(bins);
  return GridSignal{g, std::move(bins)};
}

std::vector<cplx> spectrum(const GridSignal& f) {
  std::vector<cplx> s = dft(f);
  const double h = f.spacing();
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double ph = -2.0 * std::numbers::pi * f.geom.frequency(j) * f.geom.origin;
    s[j] *= h * std::polar(1.0, ph);
  }
  return s;
}

GridSignal from_spectrum(const Geometry& g, std::vector<cplx> spec) {
  if (spec.size() != g.size) throw GridError("from_spectrum: size mismatch");
  const double inv_h = 1.0 / g.spacing();
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double ph = 2.0 * std::numbers::pi * g.frequency(j) * g.origin;
    spec[j] *= inv_h * std::polar(1.0, ph);
  }
  return idft(g, std::move(spec));
}

double lp_norm(const std::vector<double>& values, double spacing, double p) {
  if (std::isnan(p) || p < 1.0) throw GridError("lp_norm: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(spacing * s);
  }
  double s = 0.0;
  for (double v : values) s += std::pow(std::abs(v), p);
  return std::pow(spacing * s, 1.0 / p);
}

double lp_norm(const GridSignal& f, double p) {
  if (std::isnan(p) || p < 1.0) throw GridError("lp_norm: p must be >= 1");
  if (p == 2.0) return std::sqrt(f.spacing() * kernels::sum_abs2(f.samples));
  return lp_norm(abs_values(f), f.spacing(), p);
}

GridSignal apply_multiplier(const GridSignal& f, const Symbol& symbol) {
  std::vector<cplx> bins = dft(f);
  std::vector<cplx> sym(bins.size());
  for (std::size_t j = 0; j < bins.size(); ++j) {
    sym[j] = symbol(f.geom.frequency(j));
    if (!std::isfinite(sym[j].real()) || !std::isfinite(sym[j].imag()))
      throw GridError("apply_multiplier: symbol returned a non-finite value");
  }
  kernels::cmul(bins, sym);
  return idft(f.geom, std::move(bins));
}

GridSignal shift_modulate(const GridSignal& f, double shift, double freq) {
  GridSignal out = f;
  if (shift != 0.0) {
    std::vector<cplx> bins = dft(f);
    std::vector<cplx> phase(bins.size());
    for (std::size_t j = 0; j < bins.size(); ++j)
      phase[j] = std::polar(1.0, -2.0 * std::numbers::pi * f.geom.frequency(j) * shift);
    kernels::cmul(bins, phase);
    out = idft(f.geom, std::move(bins));
  }
  if (freq != 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out.samples[i] *= std::polar(1.0, 2.0 * std::numbers::pi * freq * f.geom.position(i));
  }
  return out;
}

void check_same_geometry(const GridSignal& a, const GridSignal& b) {
  if (!(a.geom == b.geom)) throw GridError("signals live on different grids");
}

GridSignal add(const GridSignal& a, const GridSignal& b) {
  check_same_geometry(a, b);
  GridSignal out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += b.samples[i];
  return out;
}

GridSignal scale(const GridSignal& a, cplx s) {
  GridSignal out = a;
  for (auto& z : out.samples) z *= s;
  return out;
}

std::vector<double> abs_values(const GridSignal& f) {
  std::vector<double> out(f.size());
  kernels::abs(out, f.samples);
  return out;
}

GridSignal project_window(const GridSignal& f, const Interval& I, const WindowProfile& w) {
  const double nyq = f.geom.nyquist();
  if (!(I.width > 0.0)) throw GridError("project_window: interval width must be positive");
  if (I.lo() < -nyq || I.hi() > nyq)
    throw GridError("project_window: interval leaves the frequency band");
  return apply_multiplier(f, [&](double xi) -> cplx { return w.at_interval(xi, I); });
}

}  // namespace varlab
