#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include "varlab/lab.hpp"

using namespace varlab::lab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> doubling(double lo, double hi) {
  std::vector<double> out;
  for (double v = lo; v <= hi; v *= 2.0) out.push_back(v);
  return out;
}

Descriptor expsum_descriptor(double p_prime) {
  Descriptor d;
  d.op = "expsum";
  d.id = "expsum";
  d.generator = "progression";
  d.model = GrowthModel::constant;
  d.settings["p_prime"] = format_number(p_prime);
  d.params = doubling(16, 256);
  return d;
}

Descriptor corpus_descriptor() {
  Descriptor d;
  d.op = "v2res";
  d.id = "corpus";
  d.generator = "corpus";
  d.model = GrowthModel::constant;
  d.p1 = d.p_out = 4.0;
  d.settings["grid_m"] = "1024";
  d.settings["period"] = "32";
  d.settings["band"] = "2";
  d.settings["r_lo"] = "-2";
  d.settings["r_hi"] = "2";
  d.params = {0, 1, 2, 3};
  return d;
}

}  // namespace

TEST_CASE("fit examples", "[lab][fit]") {
  const std::vector<double> N = doubling(16, 4096);
  std::vector<double> exact, flat, noisy;
  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (double n : N) {
    exact.push_back(3.0 * std::sqrt(std::log(n)));
    flat.push_back(7.0);
    noisy.push_back(3.0 * std::sqrt(std::log(n)) * (1.0 + noise(rng)));
  }
  const Fit a = fit_growth(N, exact, GrowthModel::log_power);
  CHECK_THAT(a.exponent, WithinAbs(0.5, 1e-12));
  CHECK(a.residual < 1e-10);
  CHECK_THAT(std::exp(a.log_prefactor), WithinRel(3.0, 1e-10));

  CHECK_THAT(fit_growth(N, flat, GrowthModel::log_power).exponent, WithinAbs(0.0, 1e-6));
  const Fit c = fit_growth(N, flat, GrowthModel::constant);
  CHECK(c.exponent == 0.0);
  CHECK(c.residual < 1e-12);

  const double b = fit_growth(N, noisy, GrowthModel::log_power).exponent;
  CHECK(b >= 0.45);
  CHECK(b <= 0.55);

  std::vector<double> poly;
  for (double n : N) poly.push_back(2.0 * std::pow(n, 0.25));
  CHECK_THAT(fit_growth(N, poly, GrowthModel::poly_power).exponent, WithinAbs(0.25, 1e-12));
}

TEST_CASE("fit preconditions", "[lab][fit]") {
  CHECK_THROWS_AS(fit_growth({2, 4, 8}, {1, 1, 1}, GrowthModel::poly_power), LabError);
  CHECK_THROWS_AS(fit_growth({2, 4, 8, 16}, {1, 0, 1, 1}, GrowthModel::poly_power), LabError);
  CHECK_THROWS_AS(fit_growth({2, 4, 8, 16}, {1, 1, 1}, GrowthModel::poly_power), LabError);
  CHECK_THROWS_AS(fit_growth({1, 2, 4, 8}, {1, 1, 1, 1}, GrowthModel::log_power), LabError);
  CHECK_THROWS_AS(fit_growth({5, 5, 5, 5}, {1, 2, 3, 4}, GrowthModel::poly_power), LabError);
  CHECK(parse_growth_model(to_string(GrowthModel::poly_power)) == GrowthModel::poly_power);
  CHECK_THROWS_AS(parse_growth_model("cubic"), LabError);
}

TEST_CASE("key=value parsing", "[lab][config]") {
  const Settings s = parse_key_values("# header\n\n a = 1 \nb=two # trailing\n");
  CHECK(s.size() == 2);
  CHECK(s.at("a") == "1");
  CHECK(s.at("b") == "two");
  CHECK_THROWS_AS(parse_key_values("a = 1\nnot a pair\n"), LabError);
  CHECK_THROWS_AS(parse_key_values("= 3\n"), LabError);
  CHECK_THROWS_AS(load_key_values("/nonexistent/file.cfg"), LabError);
}

TEST_CASE("descriptor parsing", "[lab][config]") {
  Settings s;
  s["operator"] = "tm3";
  s["generator"] = "bichirp";
  s["model"] = "log_power";
  s["p2"] = "inf";
  s["params"] = "1, 4..6, 10";
  s["band.exponent"] = "0.2,0.3";
  s["band.increasing"] = "true";
  s["band.spread"] = "1.5";
  s["gamma"] = "2";
  const Descriptor d = descriptor_from_settings(s);
  CHECK(d.id == "tm3");
  CHECK(d.p2.has_value());
  CHECK(std::isinf(*d.p2));
  CHECK(d.params == std::vector<double>{1, 4, 5, 6, 10});
  CHECK(d.bands.exponent_lo == 0.2);
  CHECK(d.bands.exponent_hi == 0.3);
  CHECK(d.bands.strictly_increasing);
  CHECK(d.number("gamma", 0.0) == 2.0);
  CHECK(d.integer("gamma", 0) == 2);
  CHECK(d.text("missing", "x") == "x");

  const Descriptor r = descriptor_from_settings(descriptor_to_settings(d));
  CHECK(r.id == d.id);
  CHECK(r.op == d.op);
  CHECK(r.params == d.params);
  CHECK(r.bands == d.bands);
  CHECK(r.settings == d.settings);
  CHECK(std::isinf(*r.p2));

  Settings bad = s;
  bad["params"] = "6..4";
  CHECK_THROWS_AS(descriptor_from_settings(bad), LabError);
  bad["params"] = "1.5..4";
  CHECK_THROWS_AS(descriptor_from_settings(bad), LabError);
  bad = s;
  bad["band.exponent"] = "0.1";
  CHECK_THROWS_AS(descriptor_from_settings(bad), LabError);
  bad = s;
  bad["gamma"] = "2.5";
  CHECK_THROWS_AS(descriptor_from_settings(bad).integer("gamma", 0), LabError);
}

TEST_CASE("shipped descriptors load and name registered operators", "[lab][config]") {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(VARLAB_DESCRIPTOR_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    const Descriptor d = load_descriptor(entry.path().string());
    const OperatorEntry& op = find_operator(d.op);
    CHECK(std::find(op.generators.begin(), op.generators.end(), d.generator) != op.generators.end());
    CHECK(d.params.size() >= 4);
    ++seen;
  }
  CHECK(seen >= 7);
}

TEST_CASE("growth study bookkeeping", "[lab][study]") {
  Descriptor d = expsum_descriptor(2.0);
  // Orthogonality: the L^2 norm of n exponentials is sqrt(n), so ratio 1.
  const GrowthReport r = growth_study(d, {256, 16, 64, 32, 128});
  REQUIRE(r.rows.size() == 5);
  CHECK(r.rows.front().param == 16);
  CHECK(r.rows.back().param == 256);
  for (const Row& row : r.rows) {
    CHECK_THAT(row.ratio, WithinRel(1.0, 1e-6));
    CHECK(row.ratio == row.output_norm / row.input_norms[0]);
  }
  CHECK(r.environment.seed == d.seed);

  CHECK_THROWS_AS(growth_study(d, {16, 32, 64}), LabError);
  CHECK_THROWS_AS(growth_study(d, {16, 32, 32, 64}), LabError);
  Descriptor e = d;
  e.op = "nonesuch";
  CHECK_THROWS_AS(growth_study(e), LabError);
  e = d;
  e.generator = "corpus";
  CHECK_THROWS_AS(growth_study(e), LabError);
  CHECK(operator_registry().size() >= 7);
}

TEST_CASE("corpus signals are deterministic and band-limited", "[lab][corpus]") {
  const varlab::Geometry g{1024, 32.0, -16.0};
  const varlab::GridSignal a = random_bandlimited(7, 3, g, 2.0);
  const varlab::GridSignal b = random_bandlimited(7, 3, g, 2.0);
  const varlab::GridSignal c = random_bandlimited(7, 4, g, 2.0);
  const varlab::GridSignal d = random_bandlimited(8, 3, g, 2.0);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
  CHECK(a.samples != d.samples);
  const std::vector<varlab::cplx> bins = varlab::dft(a);
  for (std::size_t j = 0; j < g.size; ++j) {
    if (std::abs(g.frequency(j)) > 2.0) CHECK(std::abs(bins[j]) < 1e-12);
  }
  CHECK_THROWS_AS(random_bandlimited(7, 3, g, 100.0), LabError);
}

TEST_CASE("studies are deterministic and scale-invariant", "[lab][study]") {
  Descriptor d = corpus_descriptor();
  const GrowthReport a = growth_study(d);
  const GrowthReport b = growth_study(d);
  CHECK(a == b);
  d.settings["scale"] = "3";
  const GrowthReport c = growth_study(d);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK_THAT(c.rows[i].output_norm, WithinRel(3.0 * a.rows[i].output_norm, 1e-12));
    CHECK_THAT(c.rows[i].ratio, WithinRel(a.rows[i].ratio, 1e-12));
  }
}

TEST_CASE("report CSV and JSON round-trips", "[lab][report]") {
  GrowthReport r;
  r.experiment_id = "demo";
  r.p1 = 4.0;
  r.p2 = INFINITY;
  r.p_out = 1.0;
  r.model = GrowthModel::poly_power;
  r.fitted_exponent = 0.25;
  r.residual = 0.01;
  for (int i = 0; i < 4; ++i) {
    Row row;
    row.param = 4 + i;
    row.input_norms = {1.0 / 3.0 + i, 2.0};
    row.output_norm = 0.1 * (i + 1);
    row.ratio = row.output_norm / (row.input_norms[0] * row.input_norms[1]);
    row.extras["hits"] = i;
    r.rows.push_back(row);
  }
  r.environment.grid_m = 4096;
  r.environment.period = 64.0;
  r.environment.seed = 99;
  r.environment.profile_constants["eta.c_eta"] = 0.5;
  r.certificates["theta"] = R"({"k":4})";

  CHECK(growth_report_from_json(to_json(r)) == r);

  const std::string csv = to_csv(r);
  CHECK(csv.rfind(kCsvHeader, 0) == 0);
  const GrowthReport back = growth_report_from_csv(csv);
  CHECK(back.experiment_id == r.experiment_id);
  CHECK(back.p1 == r.p1);
  CHECK(std::isinf(*back.p2));
  REQUIRE(back.rows.size() == r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    CHECK(back.rows[i].param == r.rows[i].param);
    CHECK(back.rows[i].input_norms == r.rows[i].input_norms);
    CHECK(back.rows[i].output_norm == r.rows[i].output_norm);
    CHECK(back.rows[i].ratio == r.rows[i].ratio);
  }
  CHECK_THROWS_AS(growth_report_from_csv("param,ratio\n1,2\n"), LabError);
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("band checks", "[lab][bands]") {
  Descriptor d;
  d.bands.exponent_lo = 0.3;
  d.bands.exponent_hi = 0.7;
  d.bands.residual_max = 0.1;
  d.bands.spread_max = 2.0;
  d.bands.strictly_increasing = true;
  GrowthReport r;
  r.fitted_exponent = 0.5;
  r.residual = 0.05;
  for (double v : {1.0, 1.2, 1.5}) r.rows.push_back(Row{v, {1.0}, v, v, {}});
  CHECK(band_violations(d, r).empty());
  r.fitted_exponent = 0.8;
  r.residual = 0.2;
  r.rows.push_back(Row{4.0, {1.0}, 1.4, 1.4, {}});
  r.rows.push_back(Row{5.0, {1.0}, 3.0, 3.0, {}});
  CHECK(band_violations(d, r).size() == 4);

  d.bands.refinement_change_max = 0.02;
  RefinementReport rep;
  rep.levels.push_back(RefinementLevel{0, {1.0}, 1.0, 0.0, 0.0});
  rep.levels.push_back(RefinementLevel{1, {1.01}, 1.01, 0.01, 0.01});
  CHECK(band_violations(d, rep).empty());
  rep.levels.back().max_ratio_change = 0.05;
  CHECK(band_violations(d, rep).size() == 1);
}

TEST_CASE("refinement study", "[lab][study]") {
  const Descriptor d = corpus_descriptor();
  const RefinementReport rep = refinement_study(d, 2);
  REQUIRE(rep.levels.size() == 2);
  CHECK(rep.levels[0].level == 0);
  CHECK(rep.levels[1].level == 1);
  CHECK(rep.params == d.params);
  // A finer sup sampling can only raise the pointwise maximum.
  for (std::size_t i = 0; i < d.params.size(); ++i) CHECK(rep.levels[1].ratios[i] >= rep.levels[0].ratios[i] * (1 - 1e-12));
  CHECK(rep.final_max_change() < 0.05);
  CHECK_THROWS_AS(refinement_study(d, 1), LabError);
}
