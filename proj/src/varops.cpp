#include "varlab/varops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "varlab/bandpass.hpp"
#include "varlab/fft.hpp"
#include "varlab/kernels.hpp"

namespace varlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_band(const Geometry& g, double lo, double hi, const char* who) {
  const double nyq = g.nyquist();
  if (lo < -nyq || hi > nyq) throw GridError(std::string(who) + ": intervals exceed the frequency band");
}

GridSignal real_part_sqrt(const GridSignal& s) {
  GridSignal out = s;
  for (auto& z : out.samples) z = std::sqrt(std::max(z.real(), 0.0));
  return out;
}

void max_abs_into(std::vector<double>& best, const GridSignal& s) {
  std::vector<double> a = abs_values(s);
  kernels::max_inplace(best, a);
}

GridSignal from_real(const Geometry& g, const std::vector<double>& v) {
  GridSignal out = make_grid(g);
  for (std::size_t i = 0; i < v.size(); ++i) out.samples[i] = v[i];
  return out;
}

}  // namespace

std::string to_string(TileFamily f) {
  return f == TileFamily::section3_lambda ? "section3_lambda" : "section7_periodic";
}

std::string to_string(Orientation o) { return o == Orientation::reflected ? "reflected" : "literal"; }

TileFamily parse_family(const std::string& s) {
  if (s == "section3_lambda") return TileFamily::section3_lambda;
  if (s == "section7_periodic") return TileFamily::section7_periodic;
  throw GridError("unknown tile family: " + s);
}

Orientation parse_orientation(const std::string& s) {
  if (s == "reflected") return Orientation::reflected;
  if (s == "literal") return Orientation::literal;
  throw GridError("unknown orientation: " + s);
}

void ScaleFamily::validate() const {
  if (sigmas.empty()) throw GridError("scale family is empty");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0)) throw GridError("scale family entries must be positive");
    if (i > 0 && !(sigmas[i] > sigmas[i - 1])) throw GridError("scale family must be strictly increasing");
  }
}

// ---- tiles ----

namespace {

long lambda_bound(int k, int lambda_shift) {
  // |lambda| < 2^{k - shift}; for k < shift only lambda = 0 survives.
  return k >= lambda_shift ? (1L << (k - lambda_shift)) - 1 : 0;
}

FrequencySquare make_square(double c1, int k, double gamma, Orientation o, cplx weight) {
  const double side = std::ldexp(1.0, -k);
  const double shift = gamma * side;
  const double c2 = o == Orientation::reflected ? -c1 + shift : c1 + shift;
  return FrequencySquare{Interval{c1, side}, Interval{c2, side}, k, weight};
}

}  // namespace

TileSet make_tiles(TileFamily family, double gamma, IntRange k_range, IntRange m_range,
                   Orientation orientation, int lambda_shift) {
  if (k_range.empty() || m_range.empty()) throw GridError("make_tiles: empty range");
  TileSet t;
  t.family = family;
  t.gamma = gamma;
  t.k_range = k_range;
  t.m_range = m_range;
  t.orientation = orientation;
  t.lambda_shift = lambda_shift;
  for (int k = k_range.lo; k <= k_range.hi; ++k) {
    const double side = std::ldexp(1.0, -k);
    for (int m = m_range.lo; m <= m_range.hi; ++m) {
      if (family == TileFamily::section7_periodic) {
        t.squares.push_back(make_square(m * side, k, gamma, orientation, {1.0, 0.0}));
        continue;
      }
      const cplx weight = std::polar(1.0, kTwoPi * gamma * side * m);
      const long lb = lambda_bound(k, lambda_shift);
      for (long lam = -lb; lam <= lb; ++lam) {
        t.squares.push_back(make_square(m + static_cast<double>(lam) * side, k, gamma, orientation, weight));
      }
    }
  }
  return t;
}

TileSet make_band_tiles(double gamma, IntRange k_range, double band, Orientation orientation) {
  if (k_range.empty()) throw GridError("make_band_tiles: empty scale range");
  TileSet t;
  t.family = TileFamily::section7_periodic;
  t.gamma = gamma;
  t.k_range = k_range;
  t.orientation = orientation;
  for (int k = k_range.lo; k <= k_range.hi; ++k) {
    const double scale = std::ldexp(1.0, k);
    const int reach = static_cast<int>(std::ceil(band * scale + 0.5));
    const TileSet one = make_tiles(TileFamily::section7_periodic, gamma, {k, k}, {-reach, reach}, orientation);
    t.squares.insert(t.squares.end(), one.squares.begin(), one.squares.end());
    t.m_range.lo = std::min(t.m_range.lo, -reach);
    t.m_range.hi = std::max(t.m_range.hi, reach);
  }
  return t;
}

std::size_t expected_tile_count(TileFamily family, IntRange k_range, IntRange m_range, int lambda_shift) {
  std::size_t n = 0;
  for (int k = k_range.lo; k <= k_range.hi; ++k) {
    const std::size_t per_m = family == TileFamily::section7_periodic
                                  ? 1
                                  : static_cast<std::size_t>(2 * lambda_bound(k, lambda_shift) + 1);
    n += per_m * static_cast<std::size_t>(m_range.count());
  }
  return n;
}

int c_gamma(double gamma, int lambda_shift, double eps) {
  for (int k = std::max(lambda_shift, 0); k < 60; ++k) {
    const double side = std::ldexp(1.0, -k);
    const double lam = static_cast<double>(lambda_bound(k, lambda_shift));
    // Worst square at this scale: both the P1 excursion and the reflected P2
    // excursion, each plus half a side.
    const double reach1 = lam * side + side / 2.0;
    const double reach2 = (std::abs(gamma) + lam) * side + side / 2.0;
    if (std::max(reach1, reach2) <= 0.5 - eps) return k;
  }
  throw GridError("c_gamma: no admissible scale below 2^-60");
}

// ---- V2 ----

std::vector<Interval> v2_intervals(int K_max) {
  std::vector<Interval> out;
  for (int k = 1; k <= K_max; ++k) {
    for (int l = 0; l < k; ++l) {
      const double lo = k + static_cast<double>(l) / k;
      const double hi = k + static_cast<double>(l + 1) / k;
      out.push_back(Interval{(lo + hi) / 2.0, hi - lo});
    }
  }
  return out;
}

GridSignal v2_translation_square(const GridSignal& f, int K_max, const std::vector<double>& tau_set,
                                 const WindowProfile& w) {
  if (K_max < 2) throw GridError("v2_translation_square: K_max must be >= 2");
  if (tau_set.empty()) throw GridError("v2_translation_square: empty tau set");
  const std::vector<Interval> intervals = v2_intervals(K_max);
  const auto [tmin, tmax] = std::minmax_element(tau_set.begin(), tau_set.end());
  check_band(f.geom, intervals.front().lo() + *tmin, intervals.back().hi() + *tmax, "v2_translation_square");

  const bandpass::Spectrum spec(f);
  bandpass::Accumulator acc(f.geom);
  std::vector<double> best(f.size(), 0.0);
  for (double tau : tau_set) {
    acc.clear();
    for (const Interval& I : intervals) {
      const bandpass::Packet p = spec.extract(Interval{I.center + tau, I.width}, w);
      if (p.values.empty() || p.is_zero()) continue;
      acc.add_abs2(p);
    }
    const GridSignal s = real_part_sqrt(acc.signal());
    max_abs_into(best, s);
  }
  return from_real(f.geom, best);
}

// ---- V2 res ----

std::vector<double> r_grid(int lo_exp, int hi_exp, int per_octave) {
  if (hi_exp < lo_exp || per_octave < 1) throw GridError("r_grid: bad range");
  std::vector<double> out;
  for (int e = lo_exp; e < hi_exp; ++e) {
    for (int s = 0; s < per_octave; ++s) out.push_back(std::exp2(e + static_cast<double>(s) / per_octave));
  }
  out.push_back(std::exp2(hi_exp));
  return out;
}

GridSignal v2res(const GridSignal& f, const std::vector<double>& R_set, int alpha_count,
                 const WindowProfile& w) {
  if (R_set.empty()) throw GridError("v2res: empty R set");
  if (alpha_count < 1) throw GridError("v2res: alpha_count must be >= 1");
  const double step = 1.0 / f.period();
  for (double R : R_set) {
    if (!(R >= step)) throw GridError("v2res: R below one frequency step");
  }
  const bandpass::Spectrum spec(f);
  std::vector<double> best(f.size(), 0.0);
  if (spec.support_lo() > spec.support_hi()) return from_real(f.geom, best);
  const double flo = spec.support_lo() * step;
  const double fhi = spec.support_hi() * step;
  bandpass::Accumulator acc(f.geom);
  for (double R : R_set) {
    for (int i = 0; i < alpha_count; ++i) {
      const double alpha = R * i / alpha_count;
      acc.clear();
      // Windows that miss the support of f contribute exactly zero.
      const long j0 = static_cast<long>(std::floor((flo - alpha) / R)) - 1;
      const long j1 = static_cast<long>(std::ceil((fhi - alpha) / R)) + 1;
      for (long j = j0; j <= j1; ++j) {
        const double lo = alpha + static_cast<double>(j) * R;
        const bandpass::Packet p = spec.extract(Interval{lo + R / 2.0, R}, w);
        if (p.values.empty() || p.is_zero()) continue;
        acc.add_abs2(p);
      }
      max_abs_into(best, real_part_sqrt(acc.signal()));
    }
  }
  return from_real(f.geom, best);
}

// ---- bilinear multipliers ----

TmOutput bilinear_tm(const GridSignal& f1, const GridSignal& f2, const TileSet& tiles,
                     const WindowProfile& w1, const WindowProfile& w2, TmMode mode) {
  check_same_geometry(f1, f2);
  const double nyq = f1.geom.nyquist();
  std::map<int, std::vector<const FrequencySquare*>> by_scale;
  for (const FrequencySquare& q : tiles.squares) {
    if (q.p1.lo() < -nyq || q.p1.hi() > nyq || q.p2.lo() < -nyq || q.p2.hi() > nyq)
      throw GridError("bilinear_tm: tile outside the frequency band");
    by_scale[q.scale_exp].push_back(&q);
  }
  const bandpass::Spectrum s1(f1);
  const bandpass::Spectrum s2(f2);
  bandpass::Accumulator acc(f1.geom);
  TmOutput out;
  out.full = make_grid(f1.geom);
  for (const auto& [k, squares] : by_scale) {
    if (mode == TmMode::per_scale) acc.clear();
    for (const FrequencySquare* q : squares) {
      const bandpass::Packet a = s1.extract(q->p1, w1);
      if (a.values.empty() || a.is_zero()) continue;
      const bandpass::Packet b = s2.extract(q->p2, w2);
      if (b.values.empty() || b.is_zero()) continue;
      acc.add_product(a, b, q->weight);
    }
    out.scales.push_back(k);
    if (mode == TmMode::per_scale) {
      out.per_scale.push_back(acc.signal());
      out.full = add(out.full, out.per_scale.back());
    }
  }
  if (mode == TmMode::full_sum) out.full = acc.signal();
  return out;
}

GridSignal bilinear_scale_term(const GridSignal& f1, const GridSignal& f2, int k, const WindowProfile& w) {
  check_same_geometry(f1, f2);
  const double width = std::ldexp(1.0, k);
  const double nyq = f1.geom.nyquist();
  if (width > 2.0 * nyq) throw GridError("bilinear_scale_sup: scale wider than the frequency band");
  if (width < 1.0 / f1.period()) throw GridError("bilinear_scale_sup: scale below one frequency step");
  const bandpass::Spectrum s1(f1);
  const bandpass::Spectrum s2(f2);
  bandpass::Accumulator acc(f1.geom);
  const long m0 = static_cast<long>(std::floor(-nyq / width));
  const long m1 = static_cast<long>(std::ceil(nyq / width));
  for (long m = m0; m <= m1; ++m) {
    const double c = (static_cast<double>(m) + 0.5) * width;
    if (c - width / 2.0 < -nyq || c + width / 2.0 > nyq) continue;
    const bandpass::Packet a = s1.extract(Interval{c, width}, w);
    if (a.values.empty() || a.is_zero()) continue;
    const bandpass::Packet b = s2.extract(Interval{-c, width}, w);
    if (b.values.empty() || b.is_zero()) continue;
    acc.add_product(a, b);
  }
  return acc.signal();
}

GridSignal bilinear_scale_sup(const GridSignal& f1, const GridSignal& f2, IntRange k_range,
                              const WindowProfile& w) {
  if (k_range.empty()) throw GridError("bilinear_scale_sup: empty scale range");
  std::vector<double> best(f1.size(), 0.0);
  for (int k = k_range.lo; k <= k_range.hi; ++k) max_abs_into(best, bilinear_scale_term(f1, f2, k, w));
  return from_real(f1.geom, best);
}

// ---- maximal adjoint ----

namespace {

// sum_tau eta^(u - tau); the profile lives on [-1/2, 1/2], so two terms at most.
double periodized(const WindowProfile& eta, double u) {
  const double t = std::floor(u);
  return eta(u - t) + eta(u - t - 1.0);
}

GridSignal shifted_copy(const GridSignal& f, double s) {
  // out(x) = f(x + s)
  const double q = s / f.spacing();
  const double qr = std::round(q);
  if (std::abs(q - qr) < 1e-9) {
    GridSignal out = f;
    const long n = static_cast<long>(f.size());
    long r = static_cast<long>(qr) % n;
    if (r < 0) r += n;
    std::rotate(out.samples.begin(), out.samples.begin() + r, out.samples.end());
    return out;
  }
  return shift_modulate(f, -s, 0.0);
}

}  // namespace

GridSignal maximal_adjoint_term(const GridSignal& f, const GridSignal& g, double sigma,
                                const WindowProfile& eta, AdjointMethod method) {
  check_same_geometry(f, g);
  if (!(sigma >= 1.0 / f.period())) throw GridError("maximal_adjoint: sigma below one frequency step");
  GridSignal G = apply_multiplier(g, [&](double xi) -> cplx { return eta(xi / sigma); });
  GridSignal F;
  if (method == AdjointMethod::frequency_side) {
    F = apply_multiplier(f, [&](double xi) -> cplx { return periodized(eta, xi / sigma); });
  } else {
    if (eta.coefficients.empty()) throw GridError("maximal_adjoint: profile carries no coefficients");
    F = scale(f, eta.coefficients[0]);
    for (std::size_t n = 1; n < eta.coefficients.size(); ++n) {
      const double c = eta.coefficients[n];
      const double s = static_cast<double>(n) / sigma;
      F = add(F, scale(add(shifted_copy(f, s), shifted_copy(f, -s)), c));
    }
  }
  kernels::cmul(F.samples, G.samples);
  return F;
}

GridSignal maximal_adjoint(const GridSignal& f, const GridSignal& g, const ScaleFamily& sigmas,
                           const WindowProfile& eta, AdjointMethod method) {
  sigmas.validate();
  std::vector<double> best(f.size(), 0.0);
  for (double s : sigmas.sigmas) max_abs_into(best, maximal_adjoint_term(f, g, s, eta, method));
  return from_real(f.geom, best);
}

// ---- square function ----

namespace {

const WindowProfile& lacunary_profile() {
  static const WindowProfile p = build_profile(ProfileKind::plateau_phi, 4096, ProfileOptions{0.45});
  return p;
}

// 1 on |u| <= 0.9, 0 on |u| >= 1.
double lacunary_cutoff(double u) { return lacunary_profile()(u / 2.0); }

}  // namespace

double lacunary_symbol(int k, double xi) {
  const double v = lacunary_cutoff(std::ldexp(xi, -k)) - lacunary_cutoff(std::ldexp(xi, 1 - k));
  return std::sqrt(std::max(v, 0.0));
}

GridSignal square_function(const GridSignal& f, IntRange k_range) {
  if (k_range.empty()) throw GridError("square_function: empty scale range");
  const double nyq = f.geom.nyquist();
  if (std::ldexp(0.9, k_range.hi) > nyq) throw GridError("square_function: scales exceed the frequency band");
  const std::vector<cplx> bins = dft(f);
  std::vector<double> acc(f.size(), 0.0);
  for (int k = k_range.lo; k <= k_range.hi; ++k) {
    std::vector<cplx> b = bins;
    for (std::size_t j = 0; j < b.size(); ++j) b[j] *= lacunary_symbol(k, f.geom.frequency(j));
    const GridSignal piece = idft(f.geom, std::move(b));
    kernels::abs2_accumulate(acc, piece.samples);
  }
  for (double& v : acc) v = std::sqrt(v);
  return from_real(f.geom, acc);
}

// ---- lacunary atoms ----

GridSignal lemma_ml_atom(const Geometry& g, const WindowProfile& w, int k, double theta, double shift,
                         double gamma) {
  validate(g);
  const double scale = std::ldexp(1.0, k);
  const double inv = 1.0 / scale;
  check_band(g, -inv, inv, "lemma_ml_atom");
  check_band(g, (gamma - 2.0) * inv, (gamma + 2.0) * inv, "lemma_ml_atom");
  auto atom = [&](double centre) {
    std::vector<cplx> spec(g.size);
    for (std::size_t j = 0; j < g.size; ++j) {
      const double xi = g.frequency(j);
      const double v = w(scale * xi / 2.0);
      if (v == 0.0) continue;
      spec[j] = scale * v * std::polar(1.0, -kTwoPi * xi * centre);
    }
    return from_spectrum(g, std::move(spec));
  };
  const GridSignal a = atom(theta);
  const GridSignal b = atom(theta + shift);
  GridSignal out = make_grid(g);
  for (std::size_t i = 0; i < g.size; ++i) {
    const double x = g.position(i);
    out.samples[i] = a.samples[i] * b.samples[i] * std::polar(1.0, kTwoPi * gamma * inv * (x - theta - shift));
  }
  return out;
}

}  // namespace varlab
