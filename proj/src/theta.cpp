#include <algorithm>
#include <cmath>

#include <mpfr.h>
#include <nlohmann/json.hpp>

#include "varlab/adversary.hpp"

namespace varlab {

namespace {

// RAII holder for one mpfr_t.
class Big {
 public:
  explicit Big(long prec) { mpfr_init2(v_, static_cast<mpfr_prec_t>(prec)); mpfr_set_zero(v_, 1); }
  Big(const Big&) = delete;
  Big& operator=(const Big&) = delete;
  ~Big() { mpfr_clear(v_); }
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
};

void set_scaled(Big& out, const ScaledReal& a) {
  mpfr_set_d(out.get(), a.mantissa, MPFR_RNDN);
  mpfr_mul_2si(out.get(), out.get(), a.exponent, MPFR_RNDN);
}

double log2_of(const ScaledReal& a) { return std::log2(a.mantissa) + static_cast<double>(a.exponent); }

// Distance to the nearest integer, computed in `scratch`.
double torus_distance(Big& scratch, mpfr_srcptr x) {
  Big r(mpfr_get_prec(scratch.get()));
  mpfr_round(r.get(), x);
  mpfr_sub(scratch.get(), x, r.get(), MPFR_RNDN);
  mpfr_abs(scratch.get(), scratch.get(), MPFR_RNDN);
  return mpfr_get_d(scratch.get(), MPFR_RNDN);
}

double target_fraction(int j, int k) { return std::min(static_cast<double>(j) / k, 0.5); }

struct Plan {
  int C = 0;
  int j0 = 0;
  double slack = 0.0;
};

// Ratio alpha_a / alpha_b as a double (may underflow to zero).
double ratio(const std::vector<ScaledReal>& al, int a, int b) {
  return std::exp2(log2_of(al[a - 1]) - log2_of(al[b - 1]));
}

// Smallest C for which the construction's error budget closes.
Plan discover_constant(const std::vector<ScaledReal>& al, int k) {
  const double lk = std::log2(static_cast<double>(std::max(k, 2)));
  for (int C = 1; C < 64; ++C) {
    const int j0 = std::max(1, static_cast<int>(std::ceil(C * lk)));
    if (j0 > k) return {C, j0, 1.0 / (8.0 * k)};
    // theta moves by less than sum_{l >= j0} 1 / alpha_l in total.
    double drift = 0.0;
    for (int l = j0; l <= k; ++l) drift += std::exp2(-log2_of(al[l - 1]));
    if (drift > 1.0 / (8.0 * k)) continue;
    bool ok = true;
    for (int j = j0; j < k && ok; ++j) {
      // Later steps push frac(alpha_j theta) up by less than this tail.
      double tail = 0.0;
      for (int l = j + 1; l <= k; ++l) tail += ratio(al, j, l);
      const double t = target_fraction(j, k);
      const double lower = static_cast<double>(j) / (2.0 * k);
      const double upper = 2.0 * static_cast<double>(j) / k;
      const double top = std::min(t + tail, 1.0 - t - tail);  // worst distance after drift
      ok = top >= lower && t + tail <= upper && std::min(t, 1.0 - t - tail) >= lower;
    }
    if (ok) return {C, j0, 1.0 / (8.0 * k)};
  }
  throw GridError("theta_construct: no admissible constant");
}

void check_growth(const std::vector<ScaledReal>& al, int k) {
  if (static_cast<int>(al.size()) < k) throw GridError("theta_construct: fewer than k alphas");
  if (al[0].mantissa * std::exp2(static_cast<double>(al[0].exponent)) != 1.0)
    throw GridError("theta_construct: alpha_1 must be 1");
  for (int j = 1; j < k; ++j) {
    // alpha_{j+1} >= 2^j alpha_j, compared in log2 with a hair of slack for
    // the double mantissas.
    if (log2_of(al[j]) < log2_of(al[j - 1]) + j - 1e-12)
      throw GridError("theta_construct: growth condition alpha_{j+1} >= 2^j alpha_j fails");
  }
}

std::string to_hex(mpfr_srcptr x) {
  char* s = nullptr;
  mpfr_asprintf(&s, "%Ra", x);
  std::string out(s);
  mpfr_free_str(s);
  return out;
}

std::vector<ThetaBandEntry> measure_band(const std::vector<ScaledReal>& al, int k, int j0, mpfr_srcptr theta,
                                         long prec) {
  std::vector<ThetaBandEntry> band;
  Big a(prec), prod(prec), scratch(prec);
  for (int j = j0; j <= k; ++j) {
    set_scaled(a, al[j - 1]);
    mpfr_mul(prod.get(), a.get(), theta, MPFR_RNDN);
    ThetaBandEntry e;
    e.j = j;
    e.distance = torus_distance(scratch, prod.get());
    e.lower = static_cast<double>(j) / (2.0 * k);
    e.upper = 2.0 * static_cast<double>(j) / k;
    // Compare exactly rather than through the rounded double.
    Big lo(prec), hi(prec);
    mpfr_set_si(lo.get(), j, MPFR_RNDN);
    mpfr_div_si(lo.get(), lo.get(), 2L * k, MPFR_RNDD);
    mpfr_set_si(hi.get(), 2L * j, MPFR_RNDN);
    mpfr_div_si(hi.get(), hi.get(), k, MPFR_RNDU);
    e.ok = mpfr_cmp(scratch.get(), lo.get()) >= 0 && mpfr_cmp(scratch.get(), hi.get()) <= 0;
    band.push_back(e);
  }
  return band;
}

}  // namespace

bool ThetaCertificate::valid() const {
  if (j0 > k) return true;
  const double shift = theta - 1.0 / k;
  if (shift < -1e-15 * theta || shift > slack * (1.0 + 1e-12)) return false;
  return std::all_of(band.begin(), band.end(), [](const ThetaBandEntry& e) { return e.ok; });
}

std::vector<ScaledReal> triangular_alphas(int count) {
  std::vector<ScaledReal> a;
  for (int j = 1; j <= count; ++j) a.push_back(ScaledReal{1.0, static_cast<long>(j) * (j - 1) / 2});
  return a;
}

long required_precision(const std::vector<ScaledReal>& alphas, int k) {
  const double top = alphas.empty() ? 0.0 : log2_of(alphas[std::min<std::size_t>(alphas.size(), k) - 1]);
  return static_cast<long>(std::ceil(std::max(top, 0.0) + 32.0 + std::log2(std::max(k, 2)))) + 8;
}

ThetaCertificate theta_construct(const std::vector<ScaledReal>& alphas, int k, long precision_bits) {
  if (k < 1) throw GridError("theta_construct: k must be >= 1");
  check_growth(alphas, k);
  const long need = required_precision(alphas, k);
  const long prec = precision_bits == 0 ? need + 64 : precision_bits;
  if (prec < need) throw PrecisionError("theta_construct: precision below the required " + std::to_string(need) + " bits");

  const Plan plan = discover_constant(alphas, k);
  ThetaCertificate c;
  c.k = k;
  c.C = plan.C;
  c.j0 = plan.j0;
  c.precision_bits = prec;
  c.alphas.assign(alphas.begin(), alphas.begin() + k);
  c.slack = plan.slack;

  Big theta(prec), a(prec), y(prec), n(prec), t(prec);
  mpfr_set_ui(theta.get(), 1, MPFR_RNDN);
  mpfr_div_ui(theta.get(), theta.get(), static_cast<unsigned long>(k), MPFR_RNDU);
  for (int j = plan.j0; j <= k; ++j) {
    // Smallest theta' >= theta with frac(alpha_j theta') = t_j.
    set_scaled(a, alphas[j - 1]);
    if (2 * j < k) {
      mpfr_set_si(t.get(), j, MPFR_RNDN);
      mpfr_div_si(t.get(), t.get(), k, MPFR_RNDN);
    } else {
      mpfr_set_d(t.get(), 0.5, MPFR_RNDN);
    }
    mpfr_mul(y.get(), a.get(), theta.get(), MPFR_RNDN);
    mpfr_sub(n.get(), y.get(), t.get(), MPFR_RNDN);
    mpfr_ceil(n.get(), n.get());
    mpfr_add(n.get(), n.get(), t.get(), MPFR_RNDN);
    mpfr_div(theta.get(), n.get(), a.get(), MPFR_RNDN);
  }
  c.theta = mpfr_get_d(theta.get(), MPFR_RNDN);
  c.theta_hex = to_hex(theta.get());
  if (plan.j0 <= k) c.band = measure_band(alphas, k, plan.j0, theta.get(), prec);
  return c;
}

ThetaCertificate verify_theta(const ThetaCertificate& c, long precision_bits) {
  ThetaCertificate out = c;
  out.precision_bits = precision_bits;
  out.band.clear();
  if (c.j0 > c.k) return out;
  Big theta(precision_bits);
  if (mpfr_set_str(theta.get(), c.theta_hex.c_str(), 0, MPFR_RNDN) != 0)
    throw GridError("verify_theta: stored theta is not exact at this precision");
  out.band = measure_band(c.alphas, c.k, c.j0, theta.get(), precision_bits);
  return out;
}

std::string theta_to_json(const ThetaCertificate& c) {
  nlohmann::json j;
  j["k"] = c.k;
  j["C"] = c.C;
  j["j0"] = c.j0;
  j["precision_bits"] = c.precision_bits;
  nlohmann::json al = nlohmann::json::array();
  for (const ScaledReal& a : c.alphas) al.push_back({a.mantissa, a.exponent});
  j["alphas"] = al;
  j["theta_hex"] = c.theta_hex;
  j["theta"] = c.theta;
  j["slack"] = c.slack;
  j["c1"] = c.c1;
  j["c2"] = c.c2;
  nlohmann::json band = nlohmann::json::array();
  for (const ThetaBandEntry& e : c.band)
    band.push_back({{"j", e.j}, {"distance", e.distance}, {"lower", e.lower}, {"upper", e.upper}, {"ok", e.ok}});
  j["band"] = band;
  return j.dump();
}

ThetaCertificate theta_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ThetaCertificate c;
  c.k = j.at("k").get<int>();
  c.C = j.at("C").get<int>();
  c.j0 = j.at("j0").get<int>();
  c.precision_bits = j.at("precision_bits").get<long>();
  for (const auto& a : j.at("alphas")) c.alphas.push_back(ScaledReal{a.at(0).get<double>(), a.at(1).get<long>()});
  c.theta_hex = j.at("theta_hex").get<std::string>();
  c.theta = j.at("theta").get<double>();
  c.slack = j.at("slack").get<double>();
  c.c1 = j.at("c1").get<double>();
  c.c2 = j.at("c2").get<double>();
  for (const auto& e : j.at("band"))
    c.band.push_back(ThetaBandEntry{e.at("j").get<int>(), e.at("distance").get<double>(), e.at("lower").get<double>(),
                                    e.at("upper").get<double>(), e.at("ok").get<bool>()});
  return c;
}

}  // namespace varlab
