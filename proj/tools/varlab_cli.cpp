// varlab: command-line driver for the growth studies and certificates.
//
// Exit codes: 0 success, 2 a report violates its descriptor's bands (or a
// certificate fails to verify), 1 usage or runtime error.

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "varlab/adversary.hpp"
#include "varlab/lab.hpp"

namespace lab = varlab::lab;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kBandViolation = 2;

struct CommonFlags {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::string orientation;
  long grid_m = 0;
  double period = 0.0;
  double p = 0.0;
  double p1 = 0.0;
  std::string p2;
  long n_max = 0;
  long k0 = 0;
  long m = 0;
  std::uint64_t seed = 0;
  int levels = 2;
};

// Flags that were actually given on the command line. Options the
// subcommand does not define count as absent.
struct Given {
  const CLI::App* app = nullptr;
  bool operator()(const std::string& name) const {
    const CLI::Option* opt = app->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  }
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "key=value descriptor file; flags override it");
  sub->add_option("--out", f.out, "write the report here instead of stdout");
  sub->add_option("--format", f.format, "report format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--orientation", f.orientation, "tile orientation")->check(CLI::IsMember({"reflected", "literal"}));
  sub->add_option("--grid-m", f.grid_m, "grid size M (power of two)")->check(CLI::PositiveNumber);
  sub->add_option("--period", f.period, "grid period L")->check(CLI::PositiveNumber);
  sub->add_option("--p", f.p, "output exponent (also the input one for single-input studies)");
  sub->add_option("--p1", f.p1, "exponent of the first input");
  sub->add_option("--p2", f.p2, "exponent of the second input (number or inf)");
  sub->add_option("--n-max", f.n_max, "largest family parameter")->check(CLI::PositiveNumber);
  sub->add_option("--k0", f.k0, "largest k0 / scale parameter")->check(CLI::PositiveNumber);
  sub->add_option("--m", f.m, "orbit exponent")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "corpus seed");
  sub->add_option("--levels", f.levels, "refinement levels")->check(CLI::PositiveNumber);
}

std::string doubling(long lo, long hi) {
  std::string out;
  for (long n = lo; n <= hi; n *= 2) out += (out.empty() ? "" : ",") + std::to_string(n);
  return out;
}

std::string counting(long lo, long hi) { return std::to_string(lo) + ".." + std::to_string(hi); }

void emit(const CommonFlags& f, const std::string& text) {
  if (f.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream os(f.out);
  if (!os) throw lab::LabError("cannot write " + f.out);
  os << text;
}

// How each experiment subcommand fills in its defaults and maps the range flag.
struct Experiment {
  std::string name;
  std::string summary;
  lab::Settings defaults;
  std::function<void(lab::Settings&, const CommonFlags&, const Given&)> range;
};

std::vector<Experiment> experiments() {
  auto by_n = [](long lo, long fallback_hi, bool dbl) {
    return [=](lab::Settings& s, const CommonFlags& f, const Given& given) {
      if (given("--n-max")) s["params"] = dbl ? doubling(lo, f.n_max) : counting(lo, f.n_max);
      else if (!s.count("params")) s["params"] = dbl ? doubling(lo, fallback_hi) : counting(lo, fallback_hi);
    };
  };
  auto by_k0 = [](long lo, long fallback_hi) {
    return [=](lab::Settings& s, const CommonFlags& f, const Given& given) {
      if (given("--k0")) s["params"] = counting(lo, f.k0);
      else if (!s.count("params")) s["params"] = counting(lo, fallback_hi);
    };
  };
  return {
      {"v2-blowup", "maximal translation square function on chirp trains",
       {{"operator", "v2"}, {"generator", "chirp_train"}, {"model", "log_power"}, {"p1", "4"}, {"p_out", "4"}},
       by_n(16, 256, true)},
      {"tm3-blowup", "lambda-clustered bilinear multiplier on bichirp pairs",
       {{"operator", "tm3"}, {"generator", "bichirp"}, {"model", "log_power"}, {"p1", "4"}, {"p2", "4"},
        {"p_out", "2"}},
       by_n(16, 256, true)},
      {"v2res-bound", "restricted variation on chirp trains or the seeded corpus",
       {{"operator", "v2res"}, {"generator", "chirp_train"}, {"p1", "4"}, {"p_out", "4"}},
       [](lab::Settings& s, const CommonFlags& f, const Given& given) {
         const bool corpus = s["generator"] == "corpus";
         if (given("--n-max")) s["params"] = corpus ? counting(0, f.n_max - 1) : doubling(16, f.n_max);
         else if (!s.count("params")) s["params"] = corpus ? counting(0, 49) : doubling(16, 256);
         if (!s.count("model")) s["model"] = corpus ? "constant" : "poly_power";
       }},
      {"v2res-l2fail", "restricted variation of a single bump, L2 on [-T, T]",
       {{"operator", "v2res_l2"}, {"generator", "plateau_bump"}, {"model", "log_power"}, {"p1", "2"}, {"p_out", "2"}},
       by_n(16, 4096, true)},
      {"whitney-bound", "periodic Whitney multiplier over scale truncations K",
       {{"operator", "whitney"}, {"generator", "corpus_pairs"}, {"model", "poly_power"}, {"p1", "4"}, {"p2", "4"},
        {"p_out", "2"}},
       by_k0(4, 12)},
      {"badjoint-counter", "maximal adjoint on covering spike trains",
       {{"operator", "badjoint"}, {"generator", "spike_train"}, {"model", "poly_power"}, {"p1", "4"}, {"p2", "inf"},
        {"p_out", "1"}},
       by_k0(4, 10)},
      {"expsum", "exponential sums over arithmetic progressions",
       {{"operator", "expsum"}, {"generator", "progression"}, {"model", "constant"}, {"p1", "1"}, {"p_out", "1"}},
       by_n(16, 1024, true)},
  };
}

// defaults < config file < flags; `extra` carries subcommand-specific flags.
lab::Settings assemble(const Experiment& e, const CommonFlags& f, const Given& given, const lab::Settings& extra) {
  lab::Settings s = e.defaults;
  if (!f.config.empty()) {
    for (const auto& [k, v] : lab::load_key_values(f.config)) s[k] = v;
  }
  for (const auto& [k, v] : extra) s[k] = v;
  if (given("--grid-m")) {
    if ((f.grid_m & (f.grid_m - 1)) != 0) throw lab::LabError("--grid-m must be a power of two");
    s["grid_m"] = std::to_string(f.grid_m);
  }
  if (given("--period")) s["period"] = lab::format_number(f.period);
  if (given("--p")) {
    // Output exponent; single-input studies measure the input in the same norm.
    s["p_out"] = lab::format_number(f.p);
    if (!e.defaults.count("p2")) s["p1"] = s["p_out"];
  }
  if (given("--p1")) s["p1"] = lab::format_number(f.p1);
  if (given("--p2")) s["p2"] = f.p2;
  if (given("--seed")) s["seed"] = std::to_string(f.seed);
  if (given("--orientation")) s["orientation"] = f.orientation;
  if (!s.count("id")) s["id"] = e.name;
  e.range(s, f, given);
  return s;
}

int run_growth(const Experiment& e, const CommonFlags& f, const Given& given, const lab::Settings& extra) {
  const lab::Descriptor d = lab::descriptor_from_settings(assemble(e, f, given, extra));
  const lab::GrowthReport r = lab::growth_study(d);
  emit(f, f.format == "json" ? lab::to_json(r) : lab::to_csv(r));
  const std::vector<std::string> bad = lab::band_violations(d, r);
  for (const std::string& msg : bad) std::cerr << "band violation: " << msg << '\n';
  std::cerr << e.name << ": fitted exponent " << lab::format_number(r.fitted_exponent) << " ("
            << lab::to_string(r.model) << "), residual " << lab::format_number(r.residual) << '\n';
  return bad.empty() ? kOk : kBandViolation;
}

int run_refine(const std::string& which, const CommonFlags& f, const Given& given, const lab::Settings& extra) {
  for (const Experiment& e : experiments()) {
    if (e.name != which) continue;
    const lab::Descriptor d = lab::descriptor_from_settings(assemble(e, f, given, extra));
    const lab::RefinementReport r = lab::refinement_study(d, f.levels);
    emit(f, lab::to_json(r));
    const std::vector<std::string> bad = lab::band_violations(d, r);
    for (const std::string& msg : bad) std::cerr << "band violation: " << msg << '\n';
    return bad.empty() ? kOk : kBandViolation;
  }
  throw lab::LabError("refine: unknown experiment " + which);
}

int run_cover(const CommonFlags& f, bool verify) {
  const varlab::ShiftCover c = varlab::greedy_cover(static_cast<int>(f.k0 > 0 ? f.k0 : 8));
  emit(f, varlab::cover_to_json(c));
  if (!c.certified()) {
    std::cerr << "cover: covered measure below target\n";
    return kBandViolation;
  }
  if (verify) {
    const std::size_t n = varlab::recount_cover(c);
    if (static_cast<double>(n) != c.covered_measure) {
      std::cerr << "cover: recount " << n << " != certified " << c.covered_measure << '\n';
      return kBandViolation;
    }
    std::cerr << "cover: recount agrees (" << n << ")\n";
  }
  return kOk;
}

// k0 distinct points in [1, 2^{k0-1}] with unit separation, drawn from the seed.
std::vector<double> random_separated(int k0, std::uint64_t seed) {
  const double hi = std::ldexp(1.0, k0 - 1);
  if (hi - 1.0 < k0 - 1) throw lab::LabError("cover-cont: k0 too small for a unit-separated set");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Spread k0 - 1 unit gaps plus random slack over the interval.
  std::vector<double> cuts(k0);
  double total = 0.0;
  for (double& c : cuts) total += (c = unit(rng));
  const double slack = (hi - 1.0) - (k0 - 1);
  std::vector<double> K;
  double x = 1.0 + slack * cuts[0] / total;
  for (int i = 0; i < k0; ++i) {
    K.push_back(x);
    if (i + 1 < k0) x += 1.0 + slack * cuts[i + 1] / total;
  }
  return K;
}

int run_cover_cont(const CommonFlags& f, const Given& given) {
  const int k0 = static_cast<int>(f.k0 > 0 ? f.k0 : 8);
  const std::vector<double> K = random_separated(k0, given("--seed") ? f.seed : 20240601);
  const varlab::ShiftCover c = varlab::greedy_cover_continuous(K, k0);
  emit(f, varlab::cover_to_json(c));
  return c.certified() ? kOk : kBandViolation;
}

int run_orbit(const CommonFlags& f) {
  const int m = static_cast<int>(f.m > 0 ? f.m : 3);
  const varlab::OrbitResult r = varlab::orbit_distinct(m, true);
  const std::size_t expected = 4 * static_cast<std::size_t>(std::pow(5.0, m - 1));
  if (f.format == "json") {
    emit(f, nlohmann::json{{"m", r.m},
                           {"modulus", r.modulus},
                           {"count", r.count},
                           {"all_distinct", r.all_distinct},
                           {"residues", r.residues}}
                .dump(2));
  } else {
    std::string text = "k,residue\n";
    for (std::size_t k = 0; k < r.residues.size(); ++k) text += std::to_string(k) + ',' + std::to_string(r.residues[k]) + '\n';
    emit(f, text);
  }
  std::cerr << "orbit: " << r.count << " residues mod " << r.modulus << (r.all_distinct ? ", all distinct" : ", repeats")
            << '\n';
  return r.all_distinct && r.count == expected ? kOk : kBandViolation;
}

int run_theta(const CommonFlags& f, long precision, bool verify) {
  const int k = static_cast<int>(f.k0 > 0 ? f.k0 : 16);
  const varlab::ThetaCertificate c = varlab::theta_construct(varlab::triangular_alphas(k), k, precision);
  emit(f, nlohmann::json::parse(varlab::theta_to_json(c)).dump(2));
  if (!c.valid()) {
    std::cerr << "theta: certificate outside its band\n";
    return kBandViolation;
  }
  if (verify) {
    const varlab::ThetaCertificate again = varlab::verify_theta(c, 2 * c.precision_bits);
    for (std::size_t i = 0; i < c.band.size(); ++i) {
      if (again.band[i].distance != c.band[i].distance || again.band[i].ok != c.band[i].ok) {
        std::cerr << "theta: re-verification differs at j = " << c.band[i].j << '\n';
        return kBandViolation;
      }
    }
    std::cerr << "theta: re-verified at " << again.precision_bits << " bits\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"varlab: growth studies for variation and bilinear multiplier operators"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::map<std::string, CLI::App*> growth;
  const std::vector<Experiment> exps = experiments();
  std::string generator;
  double p_prime = 0.0;
  for (const Experiment& e : exps) {
    CLI::App* sub = app.add_subcommand(e.name, e.summary);
    add_common(sub, flags);
    growth[e.name] = sub;
  }
  growth["v2res-bound"]->add_option("--generator", generator, "chirp_train or corpus")
      ->check(CLI::IsMember({"chirp_train", "corpus"}));
  growth["expsum"]->add_option("--p-prime", p_prime, "dual exponent p' of the sum norm")->check(CLI::PositiveNumber);

  CLI::App* cover = app.add_subcommand("cover", "greedy shift cover of [1, 2^k0] by dyadic orbits");
  add_common(cover, flags);
  bool verify = false;
  cover->add_flag("--verify", verify, "recount the certificate independently");

  CLI::App* cover_cont = app.add_subcommand("cover-cont", "continuous cover of [1, 2^k0] by a unit-separated set");
  add_common(cover_cont, flags);

  CLI::App* orbit = app.add_subcommand("orbit", "distinct residues of 2^k mod 5^m");
  add_common(orbit, flags);

  CLI::App* theta = app.add_subcommand("theta", "Diophantine theta for alpha_j = 2^{j(j-1)/2}, k = --k0");
  add_common(theta, flags);
  long precision = 0;
  theta->add_option("--precision", precision, "MPFR bits (0 = automatic)");
  theta->add_flag("--verify", verify, "re-verify at doubled precision");

  CLI::App* refine = app.add_subcommand("refine", "refinement study of an experiment");
  add_common(refine, flags);
  std::string which = "v2res-bound";
  refine->add_option("--experiment", which, "experiment subcommand to refine");
  refine->add_option("--generator", generator, "generator override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    for (const Experiment& e : exps) {
      CLI::App* sub = growth[e.name];
      if (!sub->parsed()) continue;
      lab::Settings extra;
      if (!generator.empty()) extra["generator"] = generator;
      if (Given{sub}("--p-prime")) extra["p_prime"] = lab::format_number(p_prime);
      return run_growth(e, flags, Given{sub}, extra);
    }
    if (cover->parsed()) return run_cover(flags, verify);
    if (cover_cont->parsed()) return run_cover_cont(flags, Given{cover_cont});
    if (orbit->parsed()) return run_orbit(flags);
    if (theta->parsed()) return run_theta(flags, precision, verify);
    if (refine->parsed()) {
      lab::Settings extra;
      if (!generator.empty()) extra["generator"] = generator;
      return run_refine(which, flags, Given{refine}, extra);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
