#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "varlab/grid.hpp"
#include "varlab/varops.hpp"
#include "varlab/windows.hpp"

using namespace varlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Random spectrum on the bins with |xi| <= band.
GridSignal random_band(const Geometry& g, double band, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<cplx> bins(g.size);
  for (std::size_t j = 0; j < g.size; ++j) {
    if (std::abs(g.frequency(j)) <= band) bins[j] = cplx(n(rng), n(rng));
  }
  return idft(g, bins);
}

GridSignal window_filter(const GridSignal& f, const Interval& I, const WindowProfile& w) {
  return apply_multiplier(f, [&](double xi) { return cplx(w.at_interval(xi, I)); });
}

double max_diff(const GridSignal& a, const GridSignal& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.samples[i] - b.samples[i]));
  return d;
}

double sup(const GridSignal& a) { return lp_norm(a, INFINITY); }

// sqrt(sum |f * w_I|^2) maximised over the translates, all at full length.
GridSignal brute_square(const GridSignal& f, const std::vector<std::vector<Interval>>& families,
                        const WindowProfile& w) {
  std::vector<double> best(f.size(), 0.0);
  for (const auto& fam : families) {
    std::vector<double> acc(f.size(), 0.0);
    for (const Interval& I : fam) {
      const GridSignal p = window_filter(f, I, w);
      for (std::size_t i = 0; i < f.size(); ++i) acc[i] += std::norm(p.samples[i]);
    }
    for (std::size_t i = 0; i < f.size(); ++i) best[i] = std::max(best[i], std::sqrt(acc[i]));
  }
  GridSignal out = make_grid(f.geom);
  for (std::size_t i = 0; i < f.size(); ++i) out.samples[i] = best[i];
  return out;
}

// c_gamma oracle: walk every square of one cell explicitly.
int brute_c_gamma(double gamma, int shift, double eps) {
  for (int k = shift; k < 40; ++k) {
    const double side = std::ldexp(1.0, -k);
    const long lb = (1L << (k - shift)) - 1;
    bool ok = true;
    for (long lam = -lb; lam <= lb && ok; ++lam) {
      const double c1 = lam * side;
      const double c2 = -c1 + gamma * side;
      for (double c : {c1, c2}) {
        if (c - side / 2 < -0.5 + eps || c + side / 2 > 0.5 - eps) ok = false;
      }
    }
    if (ok) return k;
  }
  return -1;
}

}  // namespace

TEST_CASE("scale family validation", "[varops]") {
  CHECK_NOTHROW((ScaleFamily{{1.0, 2.0, 8.0}}.validate()));
  CHECK_THROWS_AS(ScaleFamily{{}}.validate(), GridError);
  CHECK_THROWS_AS((ScaleFamily{{1.0, 1.0}}.validate()), GridError);
  CHECK_THROWS_AS((ScaleFamily{{0.0, 1.0}}.validate()), GridError);
}

TEST_CASE("tile construction", "[varops][tiles]") {
  SECTION("lambda family counts and geometry") {
    const TileSet t = make_tiles(TileFamily::section3_lambda, 100.0, {8, 10}, {-1, 2}, Orientation::reflected, 8);
    // k = 8, 9, 10 give 1, 3, 7 values of lambda per m, times 4 values of m.
    CHECK(t.squares.size() == 44);
    CHECK(expected_tile_count(TileFamily::section3_lambda, {8, 10}, {-1, 2}, 8) == 44);
    for (const FrequencySquare& q : t.squares) {
      const double side = std::ldexp(1.0, -q.scale_exp);
      CHECK(q.side() == side);
      CHECK(q.p2.width == side);
      CHECK(q.p2.center == -q.p1.center + 100.0 * side);
      CHECK_THAT(std::abs(q.weight), WithinAbs(1.0, 1e-15));
      const double m = std::round(q.p1.center);
      CHECK(std::abs(q.p1.center - m) < std::ldexp(1.0, q.scale_exp - 8) * side);
      const cplx expect = std::polar(1.0, kTwoPi * 100.0 * side * m);
      CHECK(std::abs(q.weight - expect) < 1e-12);
    }
  }
  SECTION("periodic family, literal orientation") {
    const TileSet t = make_tiles(TileFamily::section7_periodic, 4.0, {2, 3}, {0, 5}, Orientation::literal);
    CHECK(t.squares.size() == 12);
    CHECK(expected_tile_count(TileFamily::section7_periodic, {2, 3}, {0, 5}) == 12);
    for (const FrequencySquare& q : t.squares) {
      const double side = std::ldexp(1.0, -q.scale_exp);
      CHECK(q.p2.center == q.p1.center + 4.0 * side);
      CHECK(q.weight == cplx(1.0));
    }
  }
  SECTION("band tiles cover the band at every scale") {
    const TileSet t = make_band_tiles(2.0, {1, 3}, 1.0);
    for (int k = 1; k <= 3; ++k) {
      double lo = INFINITY, hi = -INFINITY;
      for (const FrequencySquare& q : t.squares) {
        if (q.scale_exp != k) continue;
        lo = std::min(lo, q.p1.lo());
        hi = std::max(hi, q.p1.hi());
      }
      CHECK(lo <= -1.0);
      CHECK(hi >= 1.0);
    }
  }
  CHECK_THROWS_AS(make_tiles(TileFamily::section7_periodic, 4.0, {3, 2}, {0, 1}), GridError);
  CHECK(parse_family(to_string(TileFamily::section3_lambda)) == TileFamily::section3_lambda);
  CHECK(parse_orientation(to_string(Orientation::literal)) == Orientation::literal);
  CHECK_THROWS_AS(parse_orientation("sideways"), GridError);
}

TEST_CASE("c_gamma agrees with an explicit walk over squares", "[varops][tiles]") {
  for (double gamma : {2.0, 4.0, 100.0}) {
    for (int shift : {1, 2, 8}) {
      CAPTURE(gamma, shift);
      const int expect = brute_c_gamma(gamma, shift, 0.01);
      if (expect < 0) {
        CHECK_THROWS_AS(c_gamma(gamma, shift), GridError);
      } else {
        CHECK(c_gamma(gamma, shift) == expect);
      }
    }
  }
  CHECK(c_gamma(100.0, 8) == 8);
}

TEST_CASE("v2 intervals and R grid", "[varops]") {
  const std::vector<Interval> iv = v2_intervals(5);
  CHECK(iv.size() == 15);
  std::size_t idx = 0;
  for (int k = 1; k <= 5; ++k) {
    for (int l = 0; l < k; ++l, ++idx) {
      CHECK_THAT(iv[idx].width, WithinRel(1.0 / k, 1e-14));
      CHECK_THAT(iv[idx].lo(), WithinAbs(k + static_cast<double>(l) / k, 1e-14));
    }
  }
  const std::vector<double> r = r_grid(-1, 1, 2);
  REQUIRE(r.size() == 5);
  CHECK(r[0] == 0.5);
  CHECK_THAT(r[1], WithinRel(std::sqrt(0.5), 1e-15));
  CHECK(r[2] == 1.0);
  CHECK(r[4] == 2.0);
  CHECK_THROWS_AS(r_grid(2, 1, 1), GridError);
}

TEST_CASE("v2 translation square matches full-length filtering", "[varops]") {
  const WindowProfile w = build_profile(ProfileKind::smooth_indicator, 1024);
  const Geometry g{512, 32.0, -16.0};
  const GridSignal f = random_band(g, 5.0, 1);
  const int K = 4;
  const std::vector<double> taus = {-0.3, 0.0, 0.125, 0.5};
  std::vector<std::vector<Interval>> fams;
  for (double tau : taus) {
    std::vector<Interval> fam;
    for (const Interval& I : v2_intervals(K)) fam.push_back(Interval{I.center + tau, I.width});
    fams.push_back(fam);
  }
  const GridSignal fast = v2_translation_square(f, K, taus, w);
  CHECK(max_diff(fast, brute_square(f, fams, w)) < 1e-10 * sup(f));
  CHECK_THROWS_AS(v2_translation_square(f, 1, taus, w), GridError);
  CHECK_THROWS_AS(v2_translation_square(f, 40, taus, w), GridError);
}

TEST_CASE("v2res matches full-length filtering", "[varops]") {
  const WindowProfile w = build_profile(ProfileKind::smooth_indicator, 1024);
  const Geometry g{512, 32.0, -16.0};
  const GridSignal f = random_band(g, 3.0, 2);
  const std::vector<double> Rs = {0.5, 1.0, 2.0};
  const int alphas = 3;
  std::vector<std::vector<Interval>> fams;
  for (double R : Rs) {
    for (int i = 0; i < alphas; ++i) {
      std::vector<Interval> fam;
      for (int j = -20; j <= 20; ++j) {
        const double lo = R * i / alphas + j * R;
        if (lo + R > -g.nyquist() && lo < g.nyquist()) fam.push_back(Interval{lo + R / 2, R});
      }
      fams.push_back(fam);
    }
  }
  const GridSignal fast = v2res(f, Rs, alphas, w);
  CHECK(max_diff(fast, brute_square(f, fams, w)) < 1e-10 * sup(f));
  CHECK_THROWS_AS(v2res(f, {0.01}, 2, w), GridError);
  CHECK_THROWS_AS(v2res(f, Rs, 0, w), GridError);

  // Homogeneous of degree one.
  const GridSignal scaled = v2res(scale(f, cplx(0.0, 3.0)), Rs, alphas, w);
  for (std::size_t i = 0; i < g.size; i += 11) CHECK_THAT(scaled.samples[i].real(), WithinAbs(3.0 * fast.samples[i].real(), 1e-10));
}

TEST_CASE("bilinear multiplier matches a full-length sum over squares", "[varops][tm]") {
  const WindowProfile w1 = build_profile(ProfileKind::plateau_phi, 1024, ProfileOptions{0.3});
  const WindowProfile w2 = build_profile(ProfileKind::smooth_indicator, 1024);
  const Geometry g{512, 64.0, -32.0};
  const GridSignal f1 = random_band(g, 1.5, 3);
  const GridSignal f2 = random_band(g, 1.5, 4);
  const TileSet tiles = make_tiles(TileFamily::section3_lambda, 4.0, {2, 3}, {-1, 1}, Orientation::reflected, 1);

  GridSignal brute = make_grid(g);
  for (const FrequencySquare& q : tiles.squares) {
    const GridSignal a = window_filter(f1, q.p1, w1);
    const GridSignal b = window_filter(f2, q.p2, w2);
    for (std::size_t i = 0; i < g.size; ++i) brute.samples[i] += q.weight * a.samples[i] * b.samples[i];
  }
  const TmOutput full = bilinear_tm(f1, f2, tiles, w1, w2, TmMode::full_sum);
  const double s = sup(brute);
  REQUIRE(s > 0.0);
  CHECK(max_diff(full.full, brute) < 1e-10 * s);

  const TmOutput per = bilinear_tm(f1, f2, tiles, w1, w2, TmMode::per_scale);
  CHECK(per.scales == std::vector<int>{2, 3});
  REQUIRE(per.per_scale.size() == 2);
  CHECK(max_diff(per.full, full.full) < 1e-10 * s);

  const TileSet wide = make_tiles(TileFamily::section7_periodic, 4.0, {0, 0}, {-10, 10});
  CHECK_THROWS_AS(bilinear_tm(f1, f2, wide, w1, w2, TmMode::full_sum), GridError);
}

TEST_CASE("bilinear scale term matches full-length filtering", "[varops][tm]") {
  const WindowProfile w = build_profile(ProfileKind::smooth_indicator, 1024);
  const Geometry g{256, 32.0, -16.0};
  const GridSignal f1 = random_band(g, 3.0, 5);
  const GridSignal f2 = random_band(g, 3.0, 6);
  const int k = -1;
  const double width = 0.5;
  GridSignal brute = make_grid(g);
  for (int m = -16; m < 16; ++m) {
    const double c = (m + 0.5) * width;
    if (c - width / 2 < -g.nyquist() || c + width / 2 > g.nyquist()) continue;
    const GridSignal a = window_filter(f1, Interval{c, width}, w);
    const GridSignal b = window_filter(f2, Interval{-c, width}, w);
    for (std::size_t i = 0; i < g.size; ++i) brute.samples[i] += a.samples[i] * b.samples[i];
  }
  CHECK(max_diff(bilinear_scale_term(f1, f2, k, w), brute) < 1e-10 * sup(brute));
  const GridSignal s = bilinear_scale_sup(f1, f2, {-2, 0}, w);
  for (std::size_t i = 0; i < g.size; i += 7) CHECK(s.samples[i].real() >= std::abs(brute.samples[i]) - 1e-12);
  CHECK_THROWS_AS(bilinear_scale_term(f1, f2, 8, w), GridError);
}

TEST_CASE("maximal adjoint: both evaluation routes and the definition agree", "[varops][adjoint]") {
  const WindowProfile eta = build_profile(ProfileKind::nonneg_eta, 4096);
  const Geometry g{1024, 64.0, -32.0};
  const GridSignal f = random_band(g, 3.0, 7);
  const GridSignal h = random_band(g, 3.0, 8);
  for (double sigma : {0.5, 2.0}) {
    CAPTURE(sigma);
    // Definition: translates of the window at multiples of sigma.
    GridSignal F = make_grid(g);
    for (int tau = -40; tau <= 40; ++tau) F = add(F, window_filter(f, Interval{tau * sigma, sigma}, eta));
    const GridSignal G = window_filter(h, Interval{0.0, sigma}, eta);
    GridSignal def = make_grid(g);
    for (std::size_t i = 0; i < g.size; ++i) def.samples[i] = F.samples[i] * G.samples[i];

    const GridSignal freq = maximal_adjoint_term(f, h, sigma, eta, AdjointMethod::frequency_side);
    const GridSignal time = maximal_adjoint_term(f, h, sigma, eta, AdjointMethod::time_side);
    const double s = sup(def);
    CHECK(max_diff(freq, def) < 1e-10 * s);
    CHECK(max_diff(time, def) < 1e-8 * s);
  }
  const GridSignal m = maximal_adjoint(f, h, ScaleFamily{{0.5, 1.0, 2.0}}, eta, AdjointMethod::frequency_side);
  const GridSignal t1 = maximal_adjoint_term(f, h, 1.0, eta, AdjointMethod::frequency_side);
  for (std::size_t i = 0; i < g.size; i += 5) CHECK(m.samples[i].real() >= std::abs(t1.samples[i]) - 1e-12);
  CHECK_THROWS_AS(maximal_adjoint_term(f, h, 0.001, eta, AdjointMethod::frequency_side), GridError);
}

TEST_CASE("lacunary square function", "[varops]") {
  for (int k = -2; k <= 4; ++k) {
    const double s = std::ldexp(1.0, k);
    CHECK(lacunary_symbol(k, 0.5 * s) == 1.0);
    CHECK(lacunary_symbol(k, -0.9 * s) == 1.0);
    CHECK(lacunary_symbol(k, 0.44 * s) == 0.0);
    CHECK(lacunary_symbol(k, 1.0 * s) == 0.0);
  }
  // The squares telescope, so on spectra inside [2^{lo-1}, 0.9 * 2^hi] the
  // square function preserves the L^2 norm.
  const Geometry g{1024, 32.0, -16.0};
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<cplx> bins(g.size);
  for (std::size_t j = 0; j < g.size; ++j) {
    const double a = std::abs(g.frequency(j));
    if (a >= 0.25 && a <= 0.9 * 8.0) bins[j] = cplx(n(rng), n(rng));
  }
  const GridSignal f = idft(g, bins);
  CHECK_THAT(lp_norm(square_function(f, {-1, 3}), 2.0), WithinRel(lp_norm(f, 2.0), 1e-10));
  CHECK_THROWS_AS(square_function(f, {0, 6}), GridError);
}

TEST_CASE("lacunary atom", "[varops]") {
  const WindowProfile w = build_profile(ProfileKind::smooth_indicator, 2048);
  const Geometry g{2048, 256.0, -128.0};
  const int k = 2;
  const double gamma = 2.0, theta = 0.3, shift = 1.7;
  const GridSignal a = lemma_ml_atom(g, w, k, theta, shift, gamma);

  // Closed form: each factor is 2 W(2 (x - c) / 2^k), W the inverse transform.
  // The atom samples the interpolated profile, W sums the table, hence 1e-7.
  const double s = std::ldexp(1.0, k);
  for (std::size_t i = 0; i < g.size; i += 31) {
    const double x = g.position(i);
    const cplx expect = 2.0 * w.inverse_at(2.0 * (x - theta) / s) * 2.0 * w.inverse_at(2.0 * (x - theta - shift) / s) *
                        std::polar(1.0, kTwoPi * gamma / s * (x - theta - shift));
    CHECK(std::abs(a.samples[i] - expect) < 1e-7);
  }

  // Spectrum inside [(gamma - 2) 2^-k, (gamma + 2) 2^-k].
  const std::vector<cplx> bins = dft(a);
  double in = 0.0, out = 0.0;
  for (std::size_t j = 0; j < g.size; ++j) {
    const double xi = g.frequency(j);
    (xi >= (gamma - 2.0) / s - 1e-12 && xi <= (gamma + 2.0) / s + 1e-12 ? in : out) += std::norm(bins[j]);
  }
  CHECK(out <= 1e-20 * in);
  CHECK_THROWS_AS(lemma_ml_atom(g, w, -3, theta, shift, gamma), GridError);
}
