#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "varlab/grid.hpp"
#include "varlab/windows.hpp"

using namespace varlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

const ProfileKind kAllKinds[] = {ProfileKind::smooth_indicator, ProfileKind::plateau_phi,
                                 ProfileKind::positive_Phi, ProfileKind::nonneg_eta,
                                 ProfileKind::partition_bar1};

// Midpoint rule on the interpolated profile, independent of the tabulated sum.
double inverse_by_quadrature(const WindowProfile& w, double x) {
  const int n = 200000;
  const double a = w.nominal_lo, b = w.nominal_hi, h = (b - a) / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = a + (i + 0.5) * h;
    acc += w(u) * std::cos(2.0 * kPi * u * x);
  }
  return acc * h;
}

}  // namespace

TEST_CASE("every profile kind builds, certifies and is even", "[windows]") {
  for (ProfileKind k : kAllKinds) {
    CAPTURE(to_string(k));
    const WindowProfile w = build_profile(k, 2048);
    CHECK_NOTHROW(certify(w));
    CHECK(parse_profile_kind(to_string(k)) == k);
    CHECK(w(w.nominal_lo - 0.01) == 0.0);
    CHECK(w(w.nominal_hi + 0.01) == 0.0);
    CHECK(w(w.nominal_lo) == 0.0);
    for (double u = 0.0; u < w.nominal_hi; u += 0.013) {
      CHECK(w(u) >= 0.0);
      CHECK_THAT(w(u), WithinAbs(w(-u), 1e-12));
    }
  }
  CHECK_THROWS_AS(parse_profile_kind("gaussian"), GridError);
}

TEST_CASE("build_profile rejects bad options", "[windows]") {
  CHECK_THROWS_AS(build_profile(ProfileKind::smooth_indicator, 100), GridError);
  CHECK_THROWS_AS(build_profile(ProfileKind::plateau_phi, 1024, ProfileOptions{0.5}), GridError);
  CHECK_THROWS_AS(build_profile(ProfileKind::plateau_phi, 1024, ProfileOptions{0.0}), GridError);
}

TEST_CASE("plateau profile is exactly one on its plateau", "[windows]") {
  for (double p : {0.1, 0.25, 0.49}) {
    const WindowProfile w = build_profile(ProfileKind::plateau_phi, 4096, ProfileOptions{p});
    for (double u = -p; u <= p; u += p / 97.0) CHECK(w(u) == 1.0);
    CHECK(w(0.5) == 0.0);
    for (double u = p; u < 0.5; u += 0.001) CHECK(w(u) <= 1.0);
    CHECK(w.constant("plateau") == p);
  }
}

TEST_CASE("partition profile translates sum to one", "[windows]") {
  const WindowProfile w = build_profile(ProfileKind::partition_bar1, 4096);
  for (double x = -0.5; x < 0.5; x += 0.0071) {
    double s = 0.0;
    for (int n = -3; n <= 3; ++n) s += w(x - n);
    CHECK_THAT(s, WithinAbs(1.0, 1e-8));
  }
  for (double x = -0.25; x <= 0.25; x += 0.01) CHECK(w(x) == 1.0);
}

TEST_CASE("inverse transform matches direct quadrature", "[windows]") {
  for (ProfileKind k : kAllKinds) {
    CAPTURE(to_string(k));
    const WindowProfile w = build_profile(k, 4096);
    for (double x : {0.0, 0.3, 1.0, 2.7, 9.0}) CHECK_THAT(w.inverse_at(x), WithinAbs(inverse_by_quadrature(w, x), 2e-6));
  }
}

TEST_CASE("positive and eta profiles have their lower bounds", "[windows]") {
  const WindowProfile Phi = build_profile(ProfileKind::positive_Phi, 4096);
  for (double x = -1.0; x <= 1.0; x += 0.01) CHECK(Phi.inverse_at(x) > 1.0);

  const WindowProfile eta = build_profile(ProfileKind::nonneg_eta, 4096);
  const double c = eta.constant("c_eta");
  CHECK(c > 0.0);
  for (double x = -1.0; x <= 1.0; x += 0.01) CHECK(eta.inverse_at(x) >= c - 1e-12);
  REQUIRE(eta.coefficients.size() >= 2);
  CHECK(eta.coefficients[1] > 0.0);
  for (std::size_t n = 0; n < eta.coefficients.size(); ++n) {
    CHECK(eta.coefficients[n] >= 0.0);
    CHECK_THAT(eta.coefficients[n], WithinAbs(std::max(eta.inverse_at(static_cast<double>(n)), 0.0), 1e-15));
  }
  CHECK_THAT(eta.coefficients[0], WithinRel(1.0, 1e-12));
}

TEST_CASE("profile JSON round-trips and re-certifies", "[windows]") {
  for (ProfileKind k : kAllKinds) {
    const WindowProfile w = build_profile(k, 1024, ProfileOptions{0.3});
    const WindowProfile r = profile_from_json(profile_to_json(w));
    CHECK(r.kind == w.kind);
    CHECK(r.samples == w.samples);
    CHECK(r.constants == w.constants);
    CHECK(r.coefficients == w.coefficients);
    CHECK(r(0.123) == w(0.123));
  }

  nlohmann::json j = nlohmann::json::parse(profile_to_json(build_profile(ProfileKind::plateau_phi, 1024)));
  j["samples"][1] = -0.5;
  CHECK_THROWS_AS(profile_from_json(j.dump()), CertificationError);
  j["version"] = 99;
  CHECK_THROWS_AS(profile_from_json(j.dump()), GridError);
}

TEST_CASE("Fejer kernel matches its closed form", "[windows]") {
  for (int k = 1; k <= 8; ++k) {
    const double n = std::ldexp(1.0, k - 1);
    CHECK_THAT(fejer(k, 0.0), WithinRel(n, 1e-12));
    for (double t = 0.013; t < 1.0; t += 0.0517) {
      const double closed = std::pow(std::sin(kPi * n * t) / std::sin(kPi * t), 2) / n;
      CHECK_THAT(fejer(k, t), WithinAbs(closed, 1e-10 * n));
      CHECK_THAT(fejer(k, t + 3.0), WithinAbs(fejer(k, t), 1e-9 * n));
    }
  }
  CHECK_THROWS_AS(fejer(0, 0.1), GridError);
}

TEST_CASE("Fejer decay constant stays bounded across scales", "[windows]") {
  double lo = INFINITY, hi = 0.0;
  for (int k = 2; k <= 10; ++k) {
    const double c = fejer_decay_constant(k);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
    CHECK(c >= 0.5);  // at t = 0 the ratio is exactly 1/2
  }
  CHECK(hi < 2.0);
  CHECK(hi / lo < 1.5);
}

TEST_CASE("tent pair and weights", "[windows]") {
  CHECK(tent(0.0).t == 1.0);
  CHECK(tent(0.5).t == 0.0);
  CHECK(tent(0.25).t == 0.5);
  CHECK(tent(3.25).t == 0.5);
  for (double x = -2.0; x < 2.0; x += 0.037) CHECK(tent(x).t + tent(x).t_shifted == 1.0);
  FrequencySquare q;
  q.p1 = Interval{0.375, 0.25};
  const TentWeights tw = tent_weights(q);
  CHECK(tw.a == tent(0.25).t);
  CHECK(tw.a + tw.b == 1.0);
}

TEST_CASE("exponential sum norms", "[windows]") {
  // p' = 2 with integer frequencies: orthogonality gives sqrt(length).
  for (std::size_t n : {1u, 7u, 64u, 300u}) {
    CHECK_THAT(exp_sum_norm(Progression{0.0, 1.0, n}, 2.0), WithinRel(std::sqrt(static_cast<double>(n)), 1e-6));
    CHECK_THAT(exp_sum_norm(Progression{5.0, 3.0, n}, 2.0), WithinRel(std::sqrt(static_cast<double>(n)), 1e-6));
  }
  // For p' < 2 the norm grows like n^{1 - 1/p'}.
  const double p = 1.5;
  const double r = exp_sum_norm(Progression{0.0, 1.0, 2048}, p) / exp_sum_norm(Progression{0.0, 1.0, 1024}, p);
  CHECK_THAT(r, WithinRel(std::pow(2.0, 1.0 - 1.0 / p), 0.01));
  CHECK_THROWS_AS(exp_sum_norm(Progression{0.0, 1.0, 8}, 1.0), GridError);
  CHECK_THROWS_AS(exp_sum_norm(Progression{0.0, 1.0, 0}, 1.5), GridError);
}

TEST_CASE("Wiener norm", "[windows]") {
  const Geometry g{256, 8.0, -4.0};
  // Pure on-grid exponential: one bin of size L, so the norm is L^{1/p1}.
  const GridSignal e = sample(g, [](double x) { return std::polar(1.0, 2.0 * kPi * 1.5 * x); });
  for (double p1 : {2.0, 4.0, 8.0}) CHECK_THAT(wiener_norm(e, p1), WithinRel(std::pow(8.0, 1.0 / p1), 1e-12));
  CHECK_THAT(wiener_norm(e, INFINITY), WithinRel(1.0, 1e-12));

  // p1 = 2 is Plancherel.
  const GridSignal f = sample(g, [](double x) { return cplx(std::exp(-x * x), std::sin(x)); });
  CHECK_THAT(wiener_norm(f, 2.0), WithinRel(lp_norm(f, 2.0), 1e-10));
  CHECK_THROWS_AS(wiener_norm(f, 1.5), GridError);
}
