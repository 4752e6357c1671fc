#include "varlab/windows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace varlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Canonical bump on (-1/2, 1/2), equal to 1 at the origin.
double bump(double u) {
  const double s = 2.0 * u;
  const double d = 1.0 - s * s;
  if (d <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / d);
}

// Unnormalized cumulative integral of the bump of half-width delta,
// evaluated on the ascending lattice first + i*step, i < count. Each step is
// integrated with composite Simpson on 32 panels.
std::vector<double> cumulative_bump(double delta, double first, double step, std::size_t count) {
  auto rho = [delta](double s) { return bump(s / (2.0 * delta)); };
  auto simpson = [&](double a, double b) {
    if (b <= a) return 0.0;
    constexpr int panels = 32;
    const double h = (b - a) / panels;
    double acc = rho(a) + rho(b);
    for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * rho(a + i * h);
    return acc * h / 3.0;
  };
  std::vector<double> out(count, 0.0);
  double prev = -delta;
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double s = std::clamp(first + static_cast<double>(i) * step, -delta, delta);
    total += simpson(prev, s);
    prev = s;
    out[i] = total;
  }
  return out;
}

double bump_mass(double delta) {
  // Same panelling as cumulative_bump so R reaches exactly its total.
  constexpr std::size_t steps = 4096;
  const double step = 2.0 * delta / steps;
  return cumulative_bump(delta, -delta + step, step, steps).back();
}

// R(first + i*step) for the normalized cumulative bump, clamped to exact 0/1
// outside [-delta, delta]. Positive arguments use R(s) = 1 - R(-s), so the
// upper tail reaches exactly 1 wherever the lower tail underflows to 0.
std::vector<double> normalized_cumulative(double delta, double first, double step,
                                          std::size_t count) {
  const double mass = bump_mass(delta);
  std::vector<double> r(count, 0.0);
  std::vector<std::size_t> pos;
  std::vector<double> mirrored;
  for (std::size_t i = count; i-- > 0;) {
    const double s = first + static_cast<double>(i) * step;
    if (s > 0.0) {
      pos.push_back(i);
      mirrored.push_back(-s);
    }
  }
  std::vector<double> lower = cumulative_bump(delta, first, step, count);
  std::vector<double> upper;
  if (!pos.empty()) {
    // Ascending in -s; cumulative_bump wants a uniform lattice, which the
    // mirrored points form.
    upper = cumulative_bump(delta, mirrored.front(), step, mirrored.size());
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double s = first + static_cast<double>(i) * step;
    if (s <= -delta) {
      r[i] = 0.0;
    } else if (s >= delta) {
      r[i] = 1.0;
    } else if (s <= 0.0) {
      r[i] = std::clamp(lower[i] / mass, 0.0, 1.0);
    }
  }
  for (std::size_t q = 0; q < pos.size(); ++q) {
    const std::size_t i = pos[q];
    const double s = first + static_cast<double>(i) * step;
    if (s < delta) r[i] = std::clamp(1.0 - upper[q] / mass, 0.0, 1.0);
  }
  return r;
}

// Mollified indicator of [-(half+delta), half+delta] on the lattice.
std::vector<double> mollified_indicator(double half, double delta, double lo, double step,
                                        std::size_t count) {
  const double a = half + delta;
  std::vector<double> up = normalized_cumulative(delta, lo + a, step, count);
  std::vector<double> down = normalized_cumulative(delta, lo - a, step, count);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = std::clamp(up[i] - down[i], 0.0, 1.0);
  return out;
}

std::vector<double> lattice(double lo, double hi, std::size_t count) {
  std::vector<double> u(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) u[i] = lo + static_cast<double>(i) * step;
  u.back() = hi;
  return u;
}

// Self-convolution of the bump squeezed to [-1/4, 1/4], on a symmetric
// lattice over [-1/2, 1/2] with odd count, by discrete convolution of the
// bump samples on the same lattice.
std::vector<double> bump_autocorrelation(std::size_t count) {
  const double step = 1.0 / static_cast<double>(count - 1);
  const long half = static_cast<long>(count / 2);
  std::vector<double> b(count);
  for (std::size_t i = 0; i < count; ++i) {
    const long j = static_cast<long>(i) - half;
    b[i] = bump(2.0 * static_cast<double>(j) * step);
  }
  std::vector<double> out(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    const long ji = static_cast<long>(i) - half;
    double acc = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
      if (b[s] == 0.0) continue;
      const long js = static_cast<long>(s) - half;
      const long other = ji - js + half;
      if (other < 0 || other >= static_cast<long>(count)) continue;
      acc += b[s] * b[static_cast<std::size_t>(other)];
    }
    out[i] = acc * step;
  }
  return out;
}

void fill_decay_constants(WindowProfile& w, double x_max) {
  std::vector<double> c(9, 0.0);
  for (double x = 0.0; x <= x_max; x += 0.125) {
    const double v = std::abs(w.inverse_at(x));
    double weight = 1.0;
    for (int n = 0; n <= 8; ++n) {
      c[n] = std::max(c[n], weight * v);
      weight *= 1.0 + x;
    }
  }
  for (int n = 0; n <= 8; ++n) w.constants["decay_C" + std::to_string(n)] = c[n];
}

double min_inverse_on(const WindowProfile& w, double x_max, std::size_t steps, bool absolute) {
  double m = INFINITY;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double x = x_max * static_cast<double>(i) / static_cast<double>(steps);
    const double v = w.inverse_at(x);
    m = std::min(m, absolute ? std::abs(v) : v);
  }
  return m;
}

}  // namespace

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::smooth_indicator: return "smooth_indicator";
    case ProfileKind::plateau_phi: return "plateau_phi";
    case ProfileKind::positive_Phi: return "positive_Phi";
    case ProfileKind::nonneg_eta: return "nonneg_eta";
    case ProfileKind::partition_bar1: return "partition_bar1";
  }
  return "unknown";
}

ProfileKind parse_profile_kind(const std::string& s) {
  for (auto k : {ProfileKind::smooth_indicator, ProfileKind::plateau_phi, ProfileKind::positive_Phi,
                 ProfileKind::nonneg_eta, ProfileKind::partition_bar1}) {
    if (to_string(k) == s) return k;
  }
  throw GridError("unknown profile kind: " + s);
}

double WindowProfile::spacing() const {
  return (nominal_hi - nominal_lo) / static_cast<double>(samples.size() - 1);
}

double WindowProfile::operator()(double u) const {
  if (!(u > nominal_lo && u < nominal_hi)) return 0.0;
  const double h = spacing();
  const double pos = (u - nominal_lo) / h;
  const long n = static_cast<long>(samples.size());
  long i = static_cast<long>(std::floor(pos));
  i = std::clamp(i, 0L, n - 2);
  auto at = [&](long j) { return (j < 0 || j >= n) ? 0.0 : samples[static_cast<std::size_t>(j)]; };
  const double y0 = at(i - 1), y1 = at(i), y2 = at(i + 1), y3 = at(i + 2);
  if (y0 == y1 && y1 == y2 && y2 == y3) return y1;
  const double t = pos - static_cast<double>(i);
  // Four-point Lagrange on nodes -1, 0, 1, 2.
  const double v = -t * (t - 1.0) * (t - 2.0) / 6.0 * y0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * y1 -
                   (t + 1.0) * t * (t - 2.0) / 2.0 * y2 + (t + 1.0) * t * (t - 1.0) / 6.0 * y3;
  switch (kind) {
    case ProfileKind::plateau_phi:
    case ProfileKind::partition_bar1: return std::clamp(v, 0.0, 1.0);
    default: return std::max(v, 0.0);
  }
}

double WindowProfile::inverse_at(double x) const {
  const double h = spacing();
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i] == 0.0) continue;
    const double u = nominal_lo + static_cast<double>(i) * h;
    acc += samples[i] * std::cos(2.0 * kPi * u * x);
  }
  return acc * h;
}

double WindowProfile::constant(const std::string& name) const {
  auto it = constants.find(name);
  if (it == constants.end()) throw GridError("profile has no constant " + name);
  return it->second;
}

WindowProfile build_profile(ProfileKind kind, std::size_t resolution, ProfileOptions options) {
  if (resolution < 256) throw GridError("profile resolution must be >= 256");
  // Odd sample count keeps the origin on a node.
  const std::size_t count = resolution | 1U;
  WindowProfile w;
  w.kind = kind;
  w.resolution = resolution;
  w.options = options;
  if (kind == ProfileKind::partition_bar1) {
    w.nominal_lo = -0.75;
    w.nominal_hi = 0.75;
  }
  const std::vector<double> u = lattice(w.nominal_lo, w.nominal_hi, count);
  const double step = (w.nominal_hi - w.nominal_lo) / static_cast<double>(count - 1);
  w.samples.assign(count, 0.0);

  switch (kind) {
    case ProfileKind::smooth_indicator: {
      for (std::size_t i = 0; i < count; ++i) w.samples[i] = bump(2.0 * u[i]);
      w.constants["c_min"] = min_inverse_on(w, 2.0, 512, true);
      fill_decay_constants(w, 64.0);
      break;
    }
    case ProfileKind::plateau_phi: {
      const double plateau = options.plateau;
      if (!(plateau > 0.0 && plateau < 0.5)) throw GridError("plateau must lie in (0, 1/2)");
      const double delta = (0.5 - plateau) / 2.0;
      w.samples = mollified_indicator(plateau, delta, w.nominal_lo, step, count);
      w.constants["plateau"] = plateau;
      w.constants["mollifier_half_width"] = delta;
      break;
    }
    case ProfileKind::positive_Phi:
    case ProfileKind::nonneg_eta: {
      const std::vector<double> conv = bump_autocorrelation(count);
      w.samples = conv;
      const double at_zero = w.inverse_at(0.0);
      double a = 0.0;
      if (kind == ProfileKind::positive_Phi) {
        const double m = min_inverse_on(w, 1.0, 256, false);
        a = 1.25 / m;
      } else {
        a = 1.0 / at_zero;
      }
      for (auto& v : w.samples) v *= a;
      w.constants["A"] = a;
      w.constants["min_on_unit"] = min_inverse_on(w, 1.0, 256, false);
      if (kind == ProfileKind::nonneg_eta) {
        w.constants["c_eta"] = w.constants["min_on_unit"];
        const double c0 = w.inverse_at(0.0);
        w.coefficients.push_back(c0);
        for (int n = 1; n <= 256; ++n) {
          const double c = std::max(w.inverse_at(static_cast<double>(n)), 0.0);
          if (c < 1e-17 * c0) break;
          w.coefficients.push_back(c);
        }
        fill_decay_constants(w, 64.0);
      }
      break;
    }
    case ProfileKind::partition_bar1: {
      w.samples = mollified_indicator(0.25, 0.25, w.nominal_lo, step, count);
      break;
    }
  }
  certify(w);
  return w;
}

void certify(const WindowProfile& w) {
  auto fail = [&](const std::string& what) {
    throw CertificationError(to_string(w.kind) + ": " + what);
  };
  if (w.samples.size() < 257) fail("too few samples");
  if (w.samples.front() != 0.0 || w.samples.back() != 0.0) fail("support touches the nominal edge");
  for (double v : w.samples) {
    if (!std::isfinite(v) || v < 0.0) fail("negative or non-finite sample");
  }
  switch (w.kind) {
    case ProfileKind::smooth_indicator: {
      if (!(w.constant("c_min") > 0.0)) fail("inverse transform vanishes on [-2, 2]");
      break;
    }
    case ProfileKind::plateau_phi: {
      const double p = w.options.plateau;
      if (w(0.0) != 1.0) fail("value at 0 is not 1");
      for (double u = -p; u <= p; u += p / 64.0) {
        if (w(u) != 1.0) fail("plateau broken");
      }
      for (double v : w.samples) {
        if (v > 1.0) fail("exceeds 1");
      }
      if (w(0.5) != 0.0 || w(-0.5) != 0.0) fail("nonzero at the support edge");
      break;
    }
    case ProfileKind::positive_Phi: {
      if (!(w.constant("min_on_unit") > 1.0)) fail("inverse transform not > 1 on [-1, 1]");
      if (std::abs(w.inverse_at(0.7) - w.inverse_at(-0.7)) > 1e-12 * w.inverse_at(0.0))
        fail("inverse transform not symmetric");
      break;
    }
    case ProfileKind::nonneg_eta: {
      if (!(w.constant("c_eta") > 0.0)) fail("eta not bounded below on [-1, 1]");
      if (w.coefficients.size() < 2 || !(w.coefficients[1] > 0.0)) fail("c_1 is not positive");
      for (double c : w.coefficients) {
        if (c < 0.0) fail("negative Fourier coefficient");
      }
      break;
    }
    case ProfileKind::partition_bar1: {
      for (double x = 0.0; x < 1.0; x += 1.0 / 512.0) {
        double s = 0.0;
        for (int n = -2; n <= 2; ++n) s += w(x - n);
        if (std::abs(s - 1.0) > 1e-8) fail("translates do not sum to 1");
      }
      for (double x = -0.25; x <= 0.25; x += 1.0 / 256.0) {
        if (w(x) != 1.0) fail("not 1 on [-1/4, 1/4]");
      }
      break;
    }
  }
}

std::string profile_to_json(const WindowProfile& w) {
  nlohmann::json j;
  j["version"] = WindowProfile::kFormatVersion;
  j["kind"] = to_string(w.kind);
  j["resolution"] = w.resolution;
  j["plateau"] = w.options.plateau;
  j["nominal"] = {w.nominal_lo, w.nominal_hi};
  j["samples"] = w.samples;
  j["constants"] = w.constants;
  j["coefficients"] = w.coefficients;
  return j.dump();
}

WindowProfile profile_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("version").get<int>() != WindowProfile::kFormatVersion)
    throw GridError("unsupported profile format version");
  WindowProfile w;
  w.kind = parse_profile_kind(j.at("kind").get<std::string>());
  w.resolution = j.at("resolution").get<std::size_t>();
  w.options.plateau = j.at("plateau").get<double>();
  w.nominal_lo = j.at("nominal").at(0).get<double>();
  w.nominal_hi = j.at("nominal").at(1).get<double>();
  w.samples = j.at("samples").get<std::vector<double>>();
  w.constants = j.at("constants").get<std::map<std::string, double>>();
  w.coefficients = j.at("coefficients").get<std::vector<double>>();
  certify(w);
  return w;
}

double fejer(int k, double t) {
  if (k < 1) throw GridError("fejer: k must be >= 1");
  const long n = 1L << (k - 1);
  const double r = t - std::round(t);
  double acc = 1.0;
  for (long g = 1; g < n; ++g) {
    acc += 2.0 * (1.0 - static_cast<double>(g) / static_cast<double>(n)) * std::cos(2.0 * kPi * g * r);
  }
  return std::max(acc, 0.0);
}

double fejer_decay_constant(int k, std::size_t samples_per_unit) {
  const double scale = std::ldexp(1.0, k);
  const std::size_t steps = samples_per_unit * static_cast<std::size_t>(scale);
  double c = 0.0;
  for (std::size_t i = 0; i <= steps / 2; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps);
    const double bound = scale / (1.0 + (scale * t) * (scale * t));
    c = std::max(c, fejer(k, t) / bound);
  }
  return c;
}

TentPair tent(double x) {
  const double r = x - std::round(x);
  const double t = 1.0 - 2.0 * std::abs(r);
  return {t, 1.0 - t};
}

TentWeights tent_weights(const FrequencySquare& q) {
  const double a = tent(q.p1.center - q.side() / 2.0).t;
  return {a, 1.0 - a};
}

double exp_sum_norm(const Progression& prog, double p_prime) {
  if (!(p_prime > 1.0 && p_prime <= 2.0)) throw GridError("exp_sum_norm: p' must lie in (1, 2]");
  if (prog.length < 1) throw GridError("exp_sum_norm: empty progression");
  const double n = static_cast<double>(prog.length);
  auto integrand = [&](double x) {
    const double u = prog.step * x;
    const double e = u - std::round(u);
    if (e == 0.0) return std::pow(n, p_prime);
    return std::pow(std::abs(std::sin(kPi * n * e) / std::sin(kPi * e)), p_prime);
  };
  auto trapezoid = [&](std::size_t nodes) {
    double acc = 0.5 * (integrand(0.0) + integrand(1.0));
    for (std::size_t i = 1; i < nodes; ++i) acc += integrand(static_cast<double>(i) / static_cast<double>(nodes));
    return acc / static_cast<double>(nodes);
  };
  std::size_t nodes = 64 * prog.length;
  double prev = trapezoid(nodes);
  for (int it = 0; it < 20; ++it) {
    nodes *= 2;
    const double cur = trapezoid(nodes);
    const bool done = std::abs(cur - prev) < 1e-6 * std::abs(cur);
    prev = cur;
    if (done) break;
  }
  return std::pow(prev, 1.0 / p_prime);
}

double wiener_norm(const GridSignal& f, double p1) {
  if (!(p1 >= 2.0)) throw GridError("wiener_norm: p1 must be >= 2");
  const double pp = std::isinf(p1) ? 1.0 : p1 / (p1 - 1.0);
  const std::vector<cplx> bins = dft(f);
  const double h = f.spacing();
  double acc = 0.0;
  for (const cplx& b : bins) acc += std::pow(std::abs(b) * h, pp);
  return std::pow(acc / f.period(), 1.0 / pp);
}

}  // namespace varlab
