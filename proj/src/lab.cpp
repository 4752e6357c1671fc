#include "varlab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "varlab/adversary.hpp"
#include "varlab/varops.hpp"
#include "varlab/windows.hpp"

namespace varlab::lab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw LabError("setting " + key + ": not a number: " + v);
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(parse_number(key, item));
  }
  return out;
}

// Like parse_list, but an item "a..b" expands to the integers a, a+1, ..., b.
std::vector<double> parse_params(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      for (double x : parse_list("params", item)) out.push_back(x);
      continue;
    }
    const double lo = parse_number("params", item.substr(0, dots));
    const double hi = parse_number("params", item.substr(dots + 2));
    if (lo != std::round(lo) || hi != std::round(hi) || hi < lo) throw LabError("params: bad range " + item);
    for (double x = lo; x <= hi; x += 1.0) out.push_back(x);
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
  return out;
}

std::size_t next_pow2(double x) {
  std::size_t m = 8;
  while (static_cast<double>(m) < x) m <<= 1U;
  return m;
}

int as_count(double param, const char* what) {
  const double r = std::round(param);
  if (r != param || r < 1.0) throw LabError(std::string(what) + " must be a positive integer");
  return static_cast<int>(r);
}

// Profiles are expensive to certify; build each variant once.
const WindowProfile& profile(ProfileKind kind, double plateau = 0.25) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, WindowProfile> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_pair(static_cast<int>(kind), kind == ProfileKind::plateau_phi ? plateau : 0.0);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, build_profile(kind, 8192, ProfileOptions{plateau})).first;
  }
  return it->second;
}

void record_constants(Environment& env, const std::string& prefix, const WindowProfile& w) {
  for (const auto& [name, value] : w.constants) env.profile_constants[prefix + "." + name] = value;
}

// Chirp trains on [1, N]: period 8N centred on the train, nyquist above N + 2.
// Explicit period / grid_m settings win over the derived values.
Geometry chirp_geometry(const Descriptor& d, int N) {
  Geometry g;
  g.period = d.number("period", d.number("period_factor", 8.0) * N);
  g.size = static_cast<std::size_t>(d.integer("grid_m", static_cast<long>(next_pow2(2.0 * g.period * (N + 2)))));
  g.origin = N / 2.0 - g.period / 2.0;
  return g;
}

Row make_row(double param, std::vector<double> inputs, double output) {
  Row r;
  r.param = param;
  r.input_norms = std::move(inputs);
  r.output_norm = output;
  return r;
}

double level_factor(const Descriptor& d) { return std::ldexp(1.0, d.level); }

// ---- evaluators ----

Evaluation eval_identity(const Descriptor& d, const std::vector<double>& params) {
  Evaluation ev;
  const WindowProfile& phi = profile(ProfileKind::plateau_phi, d.number("phi_plateau", 0.25));
  for (double param : params) {
    const int N = as_count(param, "N");
    const Geometry g = chirp_geometry(d, N);
    const GridSignal f = scale(chirp_train(N, phi, g), d.number("scale", 1.0));
    ev.rows.push_back(make_row(param, {lp_norm(f, d.p1)}, lp_norm(f, d.p_out)));
    ev.environment.grid_m = g.size;
    ev.environment.period = g.period;
  }
  record_constants(ev.environment, "phi", phi);
  return ev;
}

Evaluation eval_v2(const Descriptor& d, const std::vector<double>& params) {
  Evaluation ev;
  const WindowProfile& phi = profile(ProfileKind::plateau_phi, d.number("phi_plateau", 0.25));
  const WindowProfile& w = profile(ProfileKind::smooth_indicator);
  const double tau_step = d.number("tau_step", 1.0) / level_factor(d);
  for (double param : params) {
    const int N = as_count(param, "N");
    const Geometry g = chirp_geometry(d, N);
    const GridSignal f = scale(chirp_train(N, phi, g), d.number("scale", 1.0));
    const int K = std::max(2, static_cast<int>(std::lround(N * d.number("k_max_fraction", 0.5))));
    const double tau_max = N * d.number("tau_fraction", 0.5);
    std::vector<double> taus;
    for (long i = 0; i * tau_step <= tau_max + 1e-12; ++i) taus.push_back(static_cast<double>(i) * tau_step);
    const GridSignal V = v2_translation_square(f, K, taus, w);
    Row row = make_row(param, {lp_norm(f, d.p1)}, lp_norm(V, d.p_out));
    double lowest = INFINITY;
    for (std::size_t i = 0; i < V.size(); ++i) {
      const double x = g.position(i);
      if (x >= 1.0 && x <= N / 2.0) lowest = std::min(lowest, std::abs(V.samples[i]));
    }
    row.extras["pointwise_min"] = lowest / std::sqrt(std::log(static_cast<double>(N)));
    row.extras["tau_count"] = static_cast<double>(taus.size());
    ev.rows.push_back(std::move(row));
    ev.environment.grid_m = g.size;
    ev.environment.period = g.period;
  }
  record_constants(ev.environment, "window", w);
  return ev;
}

Evaluation eval_tm3(const Descriptor& d, const std::vector<double>& params) {
  Evaluation ev;
  const WindowProfile& phi = profile(ProfileKind::plateau_phi, d.number("phi_plateau", 0.49));
  const WindowProfile& w = profile(ProfileKind::positive_Phi);
  const double gamma = d.number("gamma", 2.0);
  const int shift = static_cast<int>(d.integer("lambda_shift", 2));
  const int k_min = d.settings.count("k_min") ? static_cast<int>(d.integer("k_min", 0)) : c_gamma(gamma, shift);
  const int k_max = static_cast<int>(d.integer("k_max", 10));
  const double p2 = d.p2.value_or(d.p1);
  for (double param : params) {
    const int N = as_count(param, "N");
    Geometry g;
    g.size = static_cast<std::size_t>(d.integer("grid_m", 1L << 22));
    g.period = d.number("period", 4096.0);
    g.origin = N / 2.0 - g.period / 2.0;
    SignalPair pair = bichirp_pair(N, phi, g);
    const double c = d.number("scale", 1.0);
    pair.first = scale(pair.first, c);
    pair.second = scale(pair.second, c);
    // P1 of a tile at integer m only meets the spectrum of f1 when 0 <= m <= N + 1.
    const TileSet tiles = make_tiles(TileFamily::section3_lambda, gamma, {k_min, k_max}, {0, N + 1},
                                     Orientation::reflected, shift);
    const TmOutput out = bilinear_tm(pair.first, pair.second, tiles, w, w, TmMode::full_sum);
    Row row = make_row(param, {lp_norm(pair.first, d.p1), lp_norm(pair.second, p2)}, lp_norm(out.full, d.p_out));
    row.extras["tiles"] = static_cast<double>(tiles.squares.size());
    row.extras["k_min"] = k_min;
    row.extras["k_max"] = k_max;
    ev.rows.push_back(std::move(row));
    ev.environment.grid_m = g.size;
    ev.environment.period = g.period;
  }
  record_constants(ev.environment, "window", w);
  return ev;
}

std::vector<double> v2res_r_set(const Descriptor& d, int lo, int hi) {
  const int per_octave = static_cast<int>(d.integer("per_octave", 2) * std::lround(level_factor(d)));
  return r_grid(static_cast<int>(d.integer("r_lo", lo)), static_cast<int>(d.integer("r_hi", hi)), per_octave);
}

int v2res_alpha_count(const Descriptor& d) {
  return static_cast<int>(d.integer("alpha_count", 4) * std::lround(level_factor(d)));
}

Evaluation eval_v2res(const Descriptor& d, const std::vector<double>& params) {
  Evaluation ev;
  const WindowProfile& w = profile(ProfileKind::smooth_indicator);
  const int alphas = v2res_alpha_count(d);
  const double c = d.number("scale", 1.0);
  for (double param : params) {
    GridSignal f;
    if (d.generator == "corpus") {
      Geometry g;
      g.size = static_cast<std::size_t>(d.integer("grid_m", 4096));
      g.period = d.number("period", 64.0);
      g.origin = -g.period / 2.0;
      const double idx = std::round(param);
      if (idx != param || idx < 0.0) throw LabError("corpus index must be a non-negative integer");
      f = random_bandlimited(d.seed, static_cast<std::uint64_t>(idx), g, d.number("band", 4.0));
    } else {
      const int N = as_count(param, "N");
      f = chirp_train(N, profile(ProfileKind::plateau_phi, d.number("phi_plateau", 0.25)),
                      chirp_geometry(d, N));
    }
    f = scale(f, c);
    const GridSignal V = v2res(f, v2res_r_set(d, -4, 6), alphas, w);
    ev.rows.push_back(make_row(param, {lp_norm(f, d.p1)}, lp_norm(V, d.p_out)));
    ev.environment.grid_m = f.size();
    ev.environment.period = f.period();
  }
  record_constants(ev.environment, "window", w);
  return ev;
}

Evaluation eval_v2res_l2(const Descriptor& d, const std::vector<double>& params) {
  Evaluation ev;
  const WindowProfile& w = profile(ProfileKind::smooth_indicator);
  const WindowProfile& phi = profile(ProfileKind::plateau_phi, 0.25);
  Geometry g;
  g.size = static_cast<std::size_t>(d.integer("grid_m", 1L << 18));
  g.period = d.number("period", 32768.0);
  g.origin = -g.period / 2.0;
  // phi^ = 1 on [-width/4, width/4], 0 outside [-width/2, width/2].
  const double width = d.number("bump_width", 4.0);
  std::vector<cplx> spec(g.size);
  for (std::size_t j = 0; j < g.size; ++j) spec[j] = phi(g.frequency(j) / width);
  const GridSignal f = scale(from_spectrum(g, std::move(spec)), d.number("scale", 1.0));
  const GridSignal V = v2res(f, v2res_r_set(d, -12, 1), v2res_alpha_count(d), w);
  const double input = lp_norm(f, d.p1);
  for (double T : params) {
    if (!(T > 0.0) || T > g.period / 2.0) throw LabError("v2res_l2: T must lie in (0, period/2]");
    std::vector<double> kept;
    for (std::size_t i = 0; i < V.size(); ++i) {
      if (std::abs(g.position(i)) <= T) kept.push_back(std::abs(V.samples[i]));
    }
    ev.rows.push_back(make_row(T, {input}, lp_norm(kept, g.spacing(), d.p_out)));
  }
  ev.environment.grid_m = g.size;
  ev.environment.period = g.period;
  record_constants(ev.environment, "window", w);
  return ev;
}

std::vector<SignalPair> whitney_corpus(const Descriptor& d, const Geometry& g) {
  std::vector<SignalPair> pairs;
  const long count = d.integer("corpus", 20);
  const std::vector<double> chirps = parse_list("bichirps", d.text("bichirps", "2,4,6"));
  if (count < static_cast<long>(chirps.size())) throw LabError("whitney: corpus smaller than the bichirp list");
  const double band = d.number("band", 2.0);
  for (long i = 0; i < count - static_cast<long>(chirps.size()); ++i) {
    pairs.push_back({random_bandlimited(d.seed, 2 * i, g, band), random_bandlimited(d.seed, 2 * i + 1, g, band)});
  }
  const WindowProfile& phi = profile(ProfileKind::plateau_phi, d.number("phi_plateau", 0.49));
  for (double n : chirps) {
    pairs.push_back(bichirp_pair(as_count(n, "bichirp N"), phi, g));
  }
  return pairs;
}

Evaluation eval_whitney(const Descriptor& d, const std::vector<double>& params) {
  Evaluation ev;
  const WindowProfile& w = profile(ProfileKind::smooth_indicator);
  Geometry g;
  g.size = static_cast<std::size_t>(d.integer("grid_m", 1L << 20));
  g.period = d.number("period", 32768.0);
  g.origin = -g.period / 2.0;
  const int k_min = static_cast<int>(d.integer("k_min", 0));
  int k_top = k_min;
  for (double K : params) {
    if (K != std::round(K) || K < k_min) throw LabError("whitney: K must be an integer >= k_min");
    k_top = std::max(k_top, static_cast<int>(K));
  }
  const Orientation orient = parse_orientation(d.text("orientation", "reflected"));
  const double tile_band = d.number("tile_band", 7.0);
  const TileSet tiles = make_band_tiles(d.number("gamma", 2.0), {k_min, k_top}, tile_band, orient);
  const double c = d.number("scale", 1.0);
  const double p2 = d.p2.value_or(d.p1);

  struct Best {
    double ratio = -1.0, lowest = INFINITY, in1 = 0.0, in2 = 0.0, out = 0.0;
    long index = -1;
  };
  std::vector<Best> best(params.size());
  const std::vector<SignalPair> pairs = whitney_corpus(d, g);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const GridSignal f1 = scale(pairs[p].first, c);
    const GridSignal f2 = scale(pairs[p].second, c);
    const double n1 = lp_norm(f1, d.p1);
    const double n2 = lp_norm(f2, p2);
    const TmOutput out = bilinear_tm(f1, f2, tiles, w, w, TmMode::per_scale);
    for (std::size_t r = 0; r < params.size(); ++r) {
      const int K = static_cast<int>(params[r]);
      GridSignal partial = make_grid(g);
      for (std::size_t s = 0; s < out.scales.size(); ++s) {
        if (out.scales[s] <= K) partial = add(partial, out.per_scale[s]);
      }
      const double norm = lp_norm(partial, d.p_out);
      const double ratio = norm / (n1 * n2);
      Best& b = best[r];
      b.lowest = std::min(b.lowest, ratio);
      if (ratio > b.ratio) b = Best{ratio, b.lowest, n1, n2, norm, static_cast<long>(p)};
    }
  }
  for (std::size_t r = 0; r < params.size(); ++r) {
    Row row = make_row(params[r], {best[r].in1, best[r].in2}, best[r].out);
    row.extras["argmax"] = static_cast<double>(best[r].index);
    row.extras["min_ratio"] = best[r].lowest;
    ev.rows.push_back(std::move(row));
  }
  ev.environment.grid_m = g.size;
  ev.environment.period = g.period;
  record_constants(ev.environment, "window", w);
  return ev;
}

Evaluation eval_badjoint(const Descriptor& d, const std::vector<double>& params) {
  Evaluation ev;
  const WindowProfile& eta = profile(ProfileKind::nonneg_eta);
  Geometry g;
  g.size = static_cast<std::size_t>(d.integer("grid_m", 1L << 15));
  g.period = d.number("period", 8.0);
  g.origin = -g.period / 2.0;
  const GridSignal indicator = sample(g, [](double x) { return cplx(x >= -1.0 && x < 1.0 ? 1.0 : 0.0); });
  const double c = d.number("scale", 1.0);
  const int sub = static_cast<int>(std::lround(level_factor(d)));
  const AdjointMethod method =
      d.text("method", "frequency_side") == "time_side" ? AdjointMethod::time_side : AdjointMethod::frequency_side;
  for (double param : params) {
    const int k0 = as_count(param, "k0");
    const ShiftCover cover = greedy_cover(k0);
    const double width = d.number("width_factor", 2.0) * std::ldexp(1.0, -k0);
    const GridSignal f = scale(spike_train(k0, cover.shifts, width, g), c);
    ScaleFamily sigmas;
    for (int j = sub; j <= k0 * sub; ++j) sigmas.sigmas.push_back(std::exp2(static_cast<double>(j) / sub));
    const GridSignal M = maximal_adjoint(f, indicator, sigmas, eta, method);
    const double nf = lp_norm(f, d.p1);
    Row row = make_row(param, {nf, lp_norm(indicator, d.p2.value_or(INFINITY))}, lp_norm(M, d.p_out));
    row.extras["f_norm_scaled"] = nf * std::pow(static_cast<double>(k0), 1.0 / d.p1);
    row.extras["shift_count"] = static_cast<double>(cover.shifts.size());
    ev.certificates["cover_k0_" + std::to_string(k0)] = cover_to_json(cover);
    ev.rows.push_back(std::move(row));
  }
  ev.environment.grid_m = g.size;
  ev.environment.period = g.period;
  record_constants(ev.environment, "eta", eta);
  return ev;
}

Evaluation eval_expsum(const Descriptor& d, const std::vector<double>& params) {
  Evaluation ev;
  const double pp = d.number("p_prime", 1.5);
  const double inv_p = 1.0 - 1.0 / pp;
  for (double param : params) {
    const int n = as_count(param, "n");
    const Progression prog{d.number("start", 0.0), d.number("step", 1.0), static_cast<std::size_t>(n)};
    ev.rows.push_back(make_row(param, {std::pow(static_cast<double>(n), inv_p)}, exp_sum_norm(prog, pp)));
  }
  return ev;
}

}  // namespace

std::string to_string(GrowthModel m) {
  switch (m) {
    case GrowthModel::log_power: return "log_power";
    case GrowthModel::poly_power: return "poly_power";
    case GrowthModel::constant: return "constant";
  }
  return "?";
}

GrowthModel parse_growth_model(const std::string& s) {
  if (s == "log_power") return GrowthModel::log_power;
  if (s == "poly_power") return GrowthModel::poly_power;
  if (s == "constant") return GrowthModel::constant;
  throw LabError("unknown growth model: " + s);
}

Fit fit_growth(const std::vector<double>& params, const std::vector<double>& ratios, GrowthModel model) {
  if (params.size() != ratios.size()) throw LabError("fit_growth: params and ratios differ in length");
  if (params.size() < 4) throw LabError("fit_growth: need at least 4 rows");
  std::vector<double> x(params.size()), y(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(ratios[i] > 0.0) || !std::isfinite(ratios[i])) throw LabError("fit_growth: ratios must be positive");
    y[i] = std::log(ratios[i]);
    switch (model) {
      case GrowthModel::log_power:
        if (!(params[i] > 1.0)) throw LabError("fit_growth: log_power needs params > 1");
        x[i] = std::log(std::log(params[i]));
        break;
      case GrowthModel::poly_power:
        if (!(params[i] > 0.0)) throw LabError("fit_growth: poly_power needs positive params");
        x[i] = std::log(params[i]);
        break;
      case GrowthModel::constant: x[i] = params[i]; break;
    }
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-24 * std::max(1.0, mx * mx))) throw LabError("fit_growth: degenerate (all-equal) params");
  Fit fit;
  if (model == GrowthModel::constant) {
    fit.exponent = 0.0;
    fit.log_prefactor = my;
  } else {
    fit.exponent = sxy / sxx;
    fit.log_prefactor = my - fit.exponent * mx;
  }
  const double slope = model == GrowthModel::constant ? 0.0 : fit.exponent;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.log_prefactor + slope * x[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

Fit fit_growth(const std::vector<Row>& rows, GrowthModel model) {
  std::vector<double> p, r;
  for (const Row& row : rows) {
    p.push_back(row.param);
    r.push_back(row.ratio);
  }
  return fit_growth(p, r, model);
}

// ---- descriptors ----

double Descriptor::number(const std::string& key, double fallback) const {
  auto it = settings.find(key);
  return it == settings.end() ? fallback : parse_number(key, it->second);
}

long Descriptor::integer(const std::string& key, long fallback) const {
  auto it = settings.find(key);
  if (it == settings.end()) return fallback;
  const double v = parse_number(key, it->second);
  if (v != std::round(v)) throw LabError("setting " + key + " must be an integer");
  return static_cast<long>(v);
}

std::string Descriptor::text(const std::string& key, const std::string& fallback) const {
  auto it = settings.find(key);
  return it == settings.end() ? fallback : it->second;
}

Descriptor descriptor_from_settings(const Settings& s) {
  Descriptor d;
  for (const auto& [key, value] : s) {
    if (key == "id") {
      d.id = value;
    } else if (key == "operator") {
      d.op = value;
    } else if (key == "generator") {
      d.generator = value;
    } else if (key == "model") {
      d.model = parse_growth_model(value);
    } else if (key == "p1") {
      d.p1 = parse_number(key, value);
    } else if (key == "p2") {
      d.p2 = value == "inf" ? INFINITY : parse_number(key, value);
    } else if (key == "p_out") {
      d.p_out = parse_number(key, value);
    } else if (key == "seed") {
      d.seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "level") {
      d.level = static_cast<int>(parse_number(key, value));
    } else if (key == "params") {
      d.params = parse_params(value);
    } else if (key == "band.exponent") {
      const std::vector<double> b = parse_list(key, value);
      if (b.size() != 2) throw LabError("band.exponent needs lo,hi");
      d.bands.exponent_lo = b[0];
      d.bands.exponent_hi = b[1];
    } else if (key == "band.residual") {
      d.bands.residual_max = parse_number(key, value);
    } else if (key == "band.spread") {
      d.bands.spread_max = parse_number(key, value);
    } else if (key == "band.refinement") {
      d.bands.refinement_change_max = parse_number(key, value);
    } else if (key == "band.increasing") {
      d.bands.strictly_increasing = value == "true" || value == "1";
    } else {
      d.settings[key] = value;
    }
  }
  if (d.id.empty()) d.id = d.op;
  return d;
}

Settings descriptor_to_settings(const Descriptor& d) {
  Settings s = d.settings;
  s["id"] = d.id;
  s["operator"] = d.op;
  s["generator"] = d.generator;
  s["model"] = to_string(d.model);
  s["p1"] = format_number(d.p1);
  if (d.p2) s["p2"] = std::isinf(*d.p2) ? "inf" : format_number(*d.p2);
  s["p_out"] = format_number(d.p_out);
  s["seed"] = std::to_string(d.seed);
  s["level"] = std::to_string(d.level);
  if (!d.params.empty()) s["params"] = join(d.params);
  if (d.bands.exponent_lo && d.bands.exponent_hi) s["band.exponent"] = join({*d.bands.exponent_lo, *d.bands.exponent_hi});
  if (d.bands.residual_max) s["band.residual"] = format_number(*d.bands.residual_max);
  if (d.bands.spread_max) s["band.spread"] = format_number(*d.bands.spread_max);
  if (d.bands.refinement_change_max) s["band.refinement"] = format_number(*d.bands.refinement_change_max);
  if (d.bands.strictly_increasing) s["band.increasing"] = "true";
  return s;
}

Descriptor load_descriptor(const std::string& path) { return descriptor_from_settings(load_key_values(path)); }

// ---- corpora ----

GridSignal random_bandlimited(std::uint64_t seed, std::uint64_t index, const Geometry& g, double band, int terms) {
  validate(g);
  if (!(band > 0.0) || band > g.nyquist()) throw LabError("random_bandlimited: band must lie in (0, nyquist]");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32U)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const WindowProfile& w = profile(ProfileKind::smooth_indicator);
  const double reach = std::min(8.0, g.period / 8.0);
  std::vector<cplx> spec(g.size);
  for (int t = 0; t < terms; ++t) {
    const cplx a(gauss(rng), gauss(rng));
    const double s = 1.0 + unit(rng);                      // spatial width in [1, 2)
    const double centre = (2.0 * unit(rng) - 1.0) * reach;  // position
    // The packet spectrum has half-width 1/(2s) <= 1/2.
    const double xi0 = (2.0 * unit(rng) - 1.0) * std::max(0.0, band - 0.5 / s);
    for (std::size_t j = 0; j < g.size; ++j) {
      const double xi = g.frequency(j);
      const double v = w(s * (xi - xi0));
      if (v == 0.0) continue;
      spec[j] += a * s * v * std::polar(1.0, -kTwoPi * xi * centre);
    }
  }
  return from_spectrum(g, std::move(spec));
}

// ---- registry ----

const std::vector<OperatorEntry>& operator_registry() {
  static const std::vector<OperatorEntry> registry = {
      {"identity", {"chirp_train"}, "f -> f on chirp trains", eval_identity},
      {"v2", {"chirp_train"}, "maximal translation square function on chirp trains (param N)", eval_v2},
      {"tm3", {"bichirp"}, "lambda-clustered bilinear multiplier on bichirp pairs (param N)", eval_tm3},
      {"v2res", {"chirp_train", "corpus"}, "restricted 2-variation (param N or corpus index)", eval_v2res},
      {"v2res_l2", {"plateau_bump"}, "restricted 2-variation of one bump on [-T, T] (param T)", eval_v2res_l2},
      {"whitney", {"corpus_pairs"}, "periodic Whitney multiplier truncated at scale K (param K)", eval_whitney},
      {"badjoint", {"spike_train"}, "maximal adjoint on greedy spike trains (param k0)", eval_badjoint},
      {"expsum", {"progression"}, "L^p' norm of an exponential sum (param length)", eval_expsum},
  };
  return registry;
}

const OperatorEntry& find_operator(const std::string& name) {
  for (const OperatorEntry& e : operator_registry()) {
    if (e.name == name) return e;
  }
  throw LabError("unknown operator: " + name);
}

GrowthReport growth_study(const Descriptor& d, std::vector<double> params) {
  const OperatorEntry& op = find_operator(d.op);
  if (std::find(op.generators.begin(), op.generators.end(), d.generator) == op.generators.end())
    throw LabError("operator " + d.op + " has no generator " + d.generator);
  if (params.size() < 4) throw LabError("growth_study: need at least 4 params");
  std::sort(params.begin(), params.end());
  if (std::adjacent_find(params.begin(), params.end()) != params.end())
    throw LabError("growth_study: repeated param");

  Evaluation ev = op.evaluate(d, params);
  if (ev.rows.size() != params.size()) throw LabError("growth_study: evaluator returned the wrong row count");
  GrowthReport r;
  r.experiment_id = d.id;
  r.p1 = d.p1;
  r.p2 = d.p2;
  r.p_out = d.p_out;
  r.model = d.model;
  for (Row& row : ev.rows) {
    double denom = 1.0;
    for (double v : row.input_norms) denom *= v;
    if (!(denom > 0.0)) throw LabError("growth_study: zero input norm at param " + format_number(row.param));
    row.ratio = row.output_norm / denom;
  }
  r.rows = std::move(ev.rows);
  const Fit fit = fit_growth(r.rows, d.model);
  r.fitted_exponent = fit.exponent;
  r.residual = fit.residual;
  r.environment = std::move(ev.environment);
  r.environment.seed = d.seed;
  r.environment.refinement_level = d.level;
  r.certificates = std::move(ev.certificates);
  return r;
}

GrowthReport growth_study(const Descriptor& d) { return growth_study(d, d.params); }

RefinementReport refinement_study(const Descriptor& d, int levels) {
  if (levels < 2) throw LabError("refinement_study: need at least 2 levels");
  RefinementReport rep;
  rep.experiment_id = d.id;
  Descriptor cur = d;
  for (int l = 0; l < levels; ++l) {
    cur.level = d.level + l;
    const GrowthReport g = growth_study(cur);
    RefinementLevel lev;
    lev.level = cur.level;
    for (const Row& row : g.rows) lev.ratios.push_back(row.ratio);
    lev.max_ratio = *std::max_element(lev.ratios.begin(), lev.ratios.end());
    if (!rep.levels.empty()) {
      const RefinementLevel& prev = rep.levels.back();
      for (std::size_t i = 0; i < lev.ratios.size(); ++i)
        lev.row_change = std::max(lev.row_change, std::abs(lev.ratios[i] - prev.ratios[i]) / prev.ratios[i]);
      lev.max_ratio_change = std::abs(lev.max_ratio - prev.max_ratio) / prev.max_ratio;
    }
    if (rep.params.empty()) {
      for (const Row& row : g.rows) rep.params.push_back(row.param);
    }
    rep.levels.push_back(std::move(lev));
  }
  return rep;
}

std::vector<std::string> band_violations(const Descriptor& d, const GrowthReport& r) {
  std::vector<std::string> out;
  const Bands& b = d.bands;
  if (b.exponent_lo && r.fitted_exponent < *b.exponent_lo)
    out.push_back("exponent " + format_number(r.fitted_exponent) + " below " + format_number(*b.exponent_lo));
  if (b.exponent_hi && r.fitted_exponent > *b.exponent_hi)
    out.push_back("exponent " + format_number(r.fitted_exponent) + " above " + format_number(*b.exponent_hi));
  if (b.residual_max && r.residual > *b.residual_max)
    out.push_back("residual " + format_number(r.residual) + " above " + format_number(*b.residual_max));
  if (b.spread_max && !r.rows.empty()) {
    double lo = INFINITY, hi = 0.0;
    for (const Row& row : r.rows) {
      lo = std::min(lo, row.ratio);
      hi = std::max(hi, row.ratio);
    }
    if (hi / lo > *b.spread_max) out.push_back("ratio spread " + format_number(hi / lo) + " above " + format_number(*b.spread_max));
  }
  if (b.strictly_increasing) {
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
      if (!(r.rows[i].ratio > r.rows[i - 1].ratio))
        out.push_back("ratio not increasing at param " + format_number(r.rows[i].param));
    }
  }
  return out;
}

std::vector<std::string> band_violations(const Descriptor& d, const RefinementReport& r) {
  std::vector<std::string> out;
  if (d.bands.refinement_change_max && r.final_max_change() > *d.bands.refinement_change_max)
    out.push_back("max-ratio change " + format_number(r.final_max_change()) + " above " +
                  format_number(*d.bands.refinement_change_max));
  return out;
}

}  // namespace varlab::lab
