#include "varlab/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace varlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_chirp_grid(int N, const WindowProfile& phi, const Geometry& g) {
  validate(g);
  if (N < 1) throw GridError("chirp_train: N must be >= 1");
  if (phi.kind != ProfileKind::plateau_phi) throw GridError("chirp_train: phi must be a plateau_phi profile");
  if (g.period < 8.0 * N) throw GridError("chirp_train: period must be at least 8N");
  if (N + 0.5 > g.nyquist()) throw GridError("chirp_train: frequency band too small for N");
}

// Spectrum of sum_n phi(x - n) e^{2 pi i sign n x}.
GridSignal modulated_train(int N, int sign, const WindowProfile& phi, const Geometry& g) {
  std::vector<cplx> spec(g.size);
  for (std::size_t j = 0; j < g.size; ++j) {
    const double xi = g.frequency(j);
    cplx acc{};
    const long near = std::lround(sign * xi);
    for (long n = std::max(1L, near - 1); n <= std::min<long>(N, near + 1); ++n) {
      const double v = phi(xi - sign * static_cast<double>(n));
      if (v == 0.0) continue;
      acc += v * std::polar(1.0, -kTwoPi * (xi - sign * static_cast<double>(n)) * static_cast<double>(n));
    }
    spec[j] = acc;
  }
  return from_spectrum(g, std::move(spec));
}

// Signed distance from x to c on the circle of the given period.
double wrapped(double x, double c, double period) {
  double d = std::fmod(x - c, period);
  if (d >= period / 2.0) d -= period;
  if (d < -period / 2.0) d += period;
  return d;
}

}  // namespace

GridSignal chirp_train(int N, const WindowProfile& phi, const Geometry& g) {
  check_chirp_grid(N, phi, g);
  return modulated_train(N, +1, phi, g);
}

SignalPair bichirp_pair(int N, const WindowProfile& phi, const Geometry& g) {
  check_chirp_grid(N, phi, g);
  return {modulated_train(N, +1, phi, g), modulated_train(N, -1, phi, g)};
}

GridSignal spike_train(int k0, const std::vector<double>& shifts, double width, const Geometry& g, Atom atom) {
  validate(g);
  if (atom == Atom::indicator && width < 4.0 * g.spacing())
    throw GridError("spike_train: width must cover at least 4 grid steps");
  if (!(width > 0.0)) throw GridError("spike_train: width must be positive");
  GridSignal out = make_grid(g);
  const double unit = std::ldexp(1.0, -k0);
  for (double s : shifts) {
    const double c = s * unit;
    if (atom == Atom::indicator) {
      // Walk only the samples near the atom.
      const double h = g.spacing();
      const double lo = c - width / 2.0;
      const long i0 = static_cast<long>(std::ceil((lo - g.origin) / h - 1e-9));
      const long i1 = static_cast<long>(std::ceil((lo + width - g.origin) / h - 1e-9));
      for (long i = i0; i < i1; ++i) out.samples[g.slot(i)] += 1.0;
    } else {
      for (std::size_t i = 0; i < g.size; ++i) {
        const double d = wrapped(g.position(i), c, g.period) / width;
        out.samples[i] += std::pow(1.0 + d * d, -5.0);
      }
    }
  }
  return out;
}

// ---- covering ----

namespace {

std::vector<long> orbit(int k0) {
  std::vector<long> o;
  for (int k = 0; k < k0; ++k) o.push_back(1L << k);
  return o;
}

}  // namespace

ShiftChoice greedy_shift(const std::vector<long>& S, int k0) {
  if (S.empty()) throw GridError("greedy_shift: empty set");
  if (k0 < 1 || k0 > 30) throw GridError("greedy_shift: k0 out of range");
  const long top = 1L << k0;
  std::vector<std::uint8_t> in(static_cast<std::size_t>(top) + 1, 0);
  for (long s : S) {
    if (s < 1 || s > top) throw GridError("greedy_shift: S must lie in [1, 2^k0]");
    in[static_cast<std::size_t>(s)] = 1;
  }
  const std::vector<long> o = orbit(k0);
  auto count_for = [&](long n) {
    std::size_t c = 0;
    for (long p : o) {
      const long v = p + n;
      if (v >= 1 && v <= top && in[static_cast<std::size_t>(v)]) ++c;
    }
    return c;
  };
  // Visit candidates in tie-break order: 0, -1, 1, -2, 2, ...
  ShiftChoice best{0, count_for(0)};
  for (long a = 1; a <= top; ++a) {
    for (long n : {-a, a}) {
      const std::size_t c = count_for(n);
      if (c > best.count) best = {n, c};
    }
  }
  return best;
}

ShiftCover greedy_cover(int k0) {
  if (k0 < 1 || k0 > 24) throw GridError("greedy_cover: k0 out of range");
  const long top = 1L << k0;
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(top) + 1, 0);
  std::size_t residual = static_cast<std::size_t>(top);
  const std::vector<long> o = orbit(k0);
  ShiftCover c;
  c.k0 = k0;
  c.target_measure = static_cast<double>(top) / 2.0;
  auto apply = [&](long n) {
    c.shifts.push_back(static_cast<double>(n));
    for (long p : o) {
      const long v = p + n;
      if (v >= 1 && v <= top && !covered[static_cast<std::size_t>(v)]) {
        covered[static_cast<std::size_t>(v)] = 1;
        --residual;
      }
    }
  };
  apply(0);
  while (static_cast<double>(residual) > c.target_measure) {
    std::vector<long> S;
    S.reserve(residual);
    for (long v = 1; v <= top; ++v) {
      if (!covered[static_cast<std::size_t>(v)]) S.push_back(v);
    }
    const ShiftChoice ch = greedy_shift(S, k0);
    if (ch.count == 0) throw GridError("greedy_cover: no progress");
    apply(ch.n);
  }
  c.covered_measure = static_cast<double>(static_cast<std::size_t>(top) - residual);
  c.size_constant = static_cast<double>(c.shifts.size()) * k0 / static_cast<double>(top);
  return c;
}

std::size_t recount_cover(const ShiftCover& c) {
  const long top = 1L << c.k0;
  std::vector<long> hits;
  for (double s : c.shifts) {
    const long n = std::lround(s);
    for (int k = 0; k < c.k0; ++k) {
      const long v = (1L << k) + n;
      if (v >= 1 && v <= top) hits.push_back(v);
    }
  }
  std::sort(hits.begin(), hits.end());
  return static_cast<std::size_t>(std::unique(hits.begin(), hits.end()) - hits.begin());
}

namespace {

using Span = std::pair<double, double>;

// Measure of [a, b] cap (union of disjoint sorted spans).
double overlap(const std::vector<Span>& spans, double a, double b) {
  double m = 0.0;
  auto it = std::lower_bound(spans.begin(), spans.end(), Span{a, a},
                             [](const Span& s, const Span& t) { return s.second < t.first; });
  for (; it != spans.end() && it->first < b; ++it) m += std::max(0.0, std::min(b, it->second) - std::max(a, it->first));
  return m;
}

std::vector<Span> subtract(const std::vector<Span>& spans, double a, double b) {
  std::vector<Span> out;
  for (const Span& s : spans) {
    if (s.second <= a || s.first >= b) {
      out.push_back(s);
      continue;
    }
    if (s.first < a) out.push_back({s.first, a});
    if (s.second > b) out.push_back({b, s.second});
  }
  return out;
}

}  // namespace

double union_measure(const std::vector<double>& K, const std::vector<double>& thetas, int k0) {
  const double lo = 1.0;
  const double hi = std::ldexp(1.0, k0);
  std::vector<Span> pieces;
  for (double t : thetas) {
    for (double k : K) {
      const double a = std::max(lo, k + t - 0.5);
      const double b = std::min(hi, k + t + 0.5);
      if (b > a) pieces.push_back({a, b});
    }
  }
  std::sort(pieces.begin(), pieces.end());
  double m = 0.0;
  double cur_a = 0.0, cur_b = -1.0;
  bool open = false;
  for (const Span& p : pieces) {
    if (open && p.first <= cur_b) {
      cur_b = std::max(cur_b, p.second);
      continue;
    }
    if (open) m += cur_b - cur_a;
    cur_a = p.first;
    cur_b = p.second;
    open = true;
  }
  if (open) m += cur_b - cur_a;
  return m;
}

ShiftCover greedy_cover_continuous(const std::vector<double>& K_in, int k0) {
  if (k0 < 1 || k0 > 24) throw GridError("greedy_cover_continuous: k0 out of range");
  std::vector<double> K = K_in;
  std::sort(K.begin(), K.end());
  if (static_cast<int>(K.size()) != k0) throw GridError("greedy_cover_continuous: |K| must equal k0");
  const double half_top = std::ldexp(1.0, k0 - 1);
  for (std::size_t i = 0; i < K.size(); ++i) {
    if (K[i] < 1.0 || K[i] > half_top) throw GridError("greedy_cover_continuous: K must lie in [1, 2^{k0-1}]");
    if (i > 0 && K[i] - K[i - 1] < 1.0) throw GridError("greedy_cover_continuous: K violates unit separation");
  }
  const double top = std::ldexp(1.0, k0);
  std::vector<Span> free{{1.0, top}};
  ShiftCover c;
  c.k0 = k0;
  c.integral = false;
  c.base = K;
  c.target_measure = half_top;
  double covered = 0.0;
  auto gain = [&](double t) {
    double g = 0.0;
    for (double k : K) g += overlap(free, k + t - 0.5, k + t + 0.5);
    return g;
  };
  while (covered < c.target_measure) {
    // The gain is piecewise linear in theta; its maximum sits at a breakpoint.
    std::vector<double> cands{-top, top, 0.0};
    for (const Span& s : free) {
      for (double k : K) {
        for (double e : {s.first, s.second}) {
          for (double d : {-0.5, 0.5}) {
            const double t = e - k + d;
            if (t >= -top && t <= top) cands.push_back(t);
          }
        }
      }
    }
    std::sort(cands.begin(), cands.end(), [](double a, double b) {
      if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
      return a < b;
    });
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    double best_t = 0.0, best_g = -1.0;
    for (double t : cands) {
      const double g = gain(t);
      if (g > best_g) {
        best_g = g;
        best_t = t;
      }
    }
    if (!(best_g > 0.0)) throw GridError("greedy_cover_continuous: no progress");
    c.shifts.push_back(best_t);
    for (double k : K) free = subtract(free, k + best_t - 0.5, k + best_t + 0.5);
    covered += best_g;
  }
  c.covered_measure = union_measure(K, c.shifts, k0);
  c.size_constant = static_cast<double>(c.shifts.size()) * k0 / top;
  return c;
}

OrbitResult orbit_distinct(int m, bool keep_residues) {
  if (m < 1 || m > 12) throw GridError("orbit_distinct: m must lie in [1, 12]");
  OrbitResult r;
  r.m = m;
  std::uint64_t mod = 1;
  for (int i = 0; i < m; ++i) mod *= 5;
  r.modulus = mod;
  const std::uint64_t len = 4 * (mod / 5);
  std::vector<bool> seen(mod, false);
  if (keep_residues) r.residues.reserve(len);
  std::uint64_t v = 1 % mod;
  bool distinct = true;
  for (std::uint64_t k = 0; k < len; ++k) {
    if (seen[v]) distinct = false;
    seen[v] = true;
    if (keep_residues) r.residues.push_back(static_cast<std::uint32_t>(v));
    v = (v * 2) % mod;
  }
  r.count = static_cast<std::size_t>(len);
  r.all_distinct = distinct;
  return r;
}

// ---- mixed counterexample ----

ScaleFamily thin_scales(const ScaleFamily& sigmas, int k0) {
  sigmas.validate();
  if (k0 < 1) throw GridError("thin_scales: k0 must be >= 1");
  ScaleFamily out;
  for (double s : sigmas.sigmas) {
    if (out.sigmas.empty()) {
      out.sigmas.push_back(s);
    } else {
      const int r = static_cast<int>(out.sigmas.size());
      if (s >= std::ldexp(out.sigmas.back(), k0 - r)) out.sigmas.push_back(s);
    }
    if (static_cast<int>(out.sigmas.size()) == k0) return out;
  }
  throw GridError("thin_scales: too few scales for k0");
}

std::vector<ScaledReal> scale_ratios(const ScaleFamily& thinned) {
  const std::size_t k0 = thinned.sigmas.size();
  std::vector<ScaledReal> a;
  for (std::size_t j = 1; j <= k0; ++j) {
    int e = 0;
    const double m = std::frexp(thinned.sigmas[k0 - 1] / thinned.sigmas[k0 - j], &e);
    a.push_back(ScaledReal{m, e});
  }
  a[0] = ScaledReal{1.0, 0};
  return a;
}

GridSignal bracket_atom(const Geometry& g) {
  validate(g);
  GridSignal out = make_grid(g);
  for (std::size_t i = 0; i < g.size; ++i) {
    const double x = wrapped(g.position(i), 0.0, g.period);
    out.samples[i] = std::pow(1.0 + x * x, -5.0);
  }
  return out;
}

GridSignal hl_train(double sigma, double theta, const Geometry& g) {
  validate(g);
  if (!(sigma > 0.0 && theta > 0.0)) throw GridError("hl_train: sigma and theta must be positive");
  const long T = static_cast<long>(std::ceil(sigma * theta));
  const double step = 1.0 / (sigma * theta);
  GridSignal out = make_grid(g);
  const double h = g.spacing();
  // Each atom is summed over a window of +-reach/sigma; beyond it the atom
  // is below 1e-20 of its peak.
  const double reach = 1e2 / sigma;
  for (long tau = -T; tau <= T; ++tau) {
    const double c = static_cast<double>(tau) * step;
    const long i0 = static_cast<long>(std::floor((c - reach - g.origin) / h));
    const long i1 = static_cast<long>(std::ceil((c + reach - g.origin) / h));
    for (long i = i0; i <= i1; ++i) {
      const double x = g.origin + static_cast<double>(i) * h;
      const double d = sigma * (x - c);
      out.samples[g.slot(i)] += std::pow(1.0 + d * d, -5.0);
    }
  }
  return out;
}

HlInstance hl_counterexample(const ScaleFamily& sigmas, int k0, const Geometry& g, const WindowProfile& eta) {
  HlInstance r;
  r.thinned = thin_scales(sigmas, k0);
  r.theta = theta_construct(scale_ratios(r.thinned), k0);
  const double sigma = r.thinned.sigmas.back();
  if (g.spacing() * sigma > 0.25) throw GridError("hl_counterexample: grid too coarse for the top scale");
  r.f = hl_train(sigma, r.theta.theta, g);
  r.g = bracket_atom(g);

  // Hit points j/(sigma k0 theta) + tau/(sigma theta) for the certified j.
  const double th = r.theta.theta;
  const long T = static_cast<long>(std::ceil(sigma * th));
  r.mask.assign(g.size, 0);
  const double h = g.spacing();
  const double radius = 1.0 / sigma;
  for (const ThetaBandEntry& e : r.theta.band) {
    for (long tau = 0; tau <= T; ++tau) {
      const double c = e.j / (sigma * k0 * th) + static_cast<double>(tau) / (sigma * th);
      const long i0 = static_cast<long>(std::ceil((c - radius - g.origin) / h));
      const long i1 = static_cast<long>(std::floor((c + radius - g.origin) / h));
      for (long i = i0; i <= i1; ++i) r.mask[g.slot(i)] = 1;
    }
  }
  std::size_t count = 0;
  for (auto b : r.mask) count += b;
  r.mask_measure = static_cast<double>(count) * h;

  const GridSignal m = maximal_adjoint(r.f, r.g, r.thinned, eta, AdjointMethod::frequency_side);
  double lo = INFINITY;
  for (std::size_t i = 0; i < g.size; ++i) {
    if (r.mask[i]) lo = std::min(lo, std::abs(m.samples[i]));
  }
  r.min_on_mask = count ? lo : 0.0;
  return r;
}

// ---- JSON ----

std::string cover_to_json(const ShiftCover& c) {
  nlohmann::json j;
  j["k0"] = c.k0;
  j["integral"] = c.integral;
  j["shifts"] = c.shifts;
  j["covered_measure"] = c.covered_measure;
  j["target_measure"] = c.target_measure;
  j["size_constant"] = c.size_constant;
  j["base"] = c.base;
  return j.dump();
}

ShiftCover cover_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ShiftCover c;
  c.k0 = j.at("k0").get<int>();
  c.integral = j.at("integral").get<bool>();
  c.shifts = j.at("shifts").get<std::vector<double>>();
  c.covered_measure = j.at("covered_measure").get<double>();
  c.target_measure = j.at("target_measure").get<double>();
  c.size_constant = j.at("size_constant").get<double>();
  c.base = j.at("base").get<std::vector<double>>();
  return c;
}

}  // namespace varlab
