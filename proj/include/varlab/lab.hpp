#pragma once

// Experiment driver: growth studies over one-parameter input families,
// exponent fits, refinement studies and report I/O.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "varlab/grid.hpp"

namespace varlab::lab {

class LabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GrowthModel { log_power, poly_power, constant };

std::string to_string(GrowthModel m);
GrowthModel parse_growth_model(const std::string& s);

struct Row {
  double param = 0.0;
  std::vector<double> input_norms;
  double output_norm = 0.0;
  double ratio = 0.0;
  // Diagnostics that only the JSON report carries.
  std::map<std::string, double> extras;

  bool operator==(const Row&) const = default;
};

struct Fit {
  double exponent = 0.0;
  double residual = 0.0;   // RMS of the fit errors in log coordinates
  double log_prefactor = 0.0;
};

// log_power: ratio ~ a (log param)^b; poly_power: ratio ~ a param^b;
// constant: b = 0 and residual = dispersion of log ratio.
Fit fit_growth(const std::vector<double>& params, const std::vector<double>& ratios, GrowthModel model);
Fit fit_growth(const std::vector<Row>& rows, GrowthModel model);

// ---- configuration ----

using Settings = std::map<std::string, std::string>;

// Flat key=value lines; '#' starts a comment, blank lines are skipped.
Settings parse_key_values(const std::string& text);
Settings load_key_values(const std::string& path);

struct Bands {
  std::optional<double> exponent_lo;
  std::optional<double> exponent_hi;
  std::optional<double> residual_max;
  std::optional<double> spread_max;             // max ratio / min ratio
  std::optional<double> refinement_change_max;  // relative, between the last two levels
  bool strictly_increasing = false;

  bool operator==(const Bands&) const = default;
};

struct Descriptor {
  std::string id;
  std::string op;
  std::string generator;
  GrowthModel model = GrowthModel::log_power;
  double p1 = 4.0;
  std::optional<double> p2;
  double p_out = 4.0;
  std::uint64_t seed = 20240601;
  int level = 0;
  std::vector<double> params;
  Settings settings;  // operator-specific knobs
  Bands bands;

  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
};

// Recognised keys: id, operator, generator, model, p1, p2, p_out, seed, level,
// params (comma list; "a..b" expands to consecutive integers), band.exponent
// (lo,hi), band.residual, band.spread, band.refinement, band.increasing.
// Everything else lands in settings.
Descriptor descriptor_from_settings(const Settings& s);
Settings descriptor_to_settings(const Descriptor& d);
Descriptor load_descriptor(const std::string& path);

// ---- reports ----

struct Environment {
  std::size_t grid_m = 0;
  double period = 0.0;
  std::string rng = "mt19937_64";
  std::uint64_t seed = 0;
  int refinement_level = 0;
  std::map<std::string, double> profile_constants;

  bool operator==(const Environment&) const = default;
};

struct GrowthReport {
  std::string experiment_id;
  double p1 = 0.0;
  std::optional<double> p2;
  double p_out = 0.0;
  std::vector<Row> rows;
  GrowthModel model = GrowthModel::log_power;
  double fitted_exponent = 0.0;
  double residual = 0.0;
  Environment environment;
  std::map<std::string, std::string> certificates;  // name -> JSON document

  bool operator==(const GrowthReport&) const = default;
};

// ---- corpora ----

// Sum of `terms` modulated smooth packets with spectrum inside [-band, band],
// drawn from mt19937_64 seeded with (seed, index). Deterministic per index.
varlab::GridSignal random_bandlimited(std::uint64_t seed, std::uint64_t index, const varlab::Geometry& g,
                                      double band, int terms = 4);

// ---- operator registry ----

struct Evaluation {
  std::vector<Row> rows;  // same order as the requested params
  Environment environment;
  std::map<std::string, std::string> certificates;
};

using Evaluator = std::function<Evaluation(const Descriptor&, const std::vector<double>& params)>;

struct OperatorEntry {
  std::string name;
  std::vector<std::string> generators;
  std::string summary;
  Evaluator evaluate;
};

const std::vector<OperatorEntry>& operator_registry();
const OperatorEntry& find_operator(const std::string& name);

// Rows sorted by param; ratio = output_norm / prod(input_norms). Throws
// LabError for unknown operators or generators and for fewer than 4 params.
GrowthReport growth_study(const Descriptor& d, std::vector<double> params);
GrowthReport growth_study(const Descriptor& d);

struct RefinementLevel {
  int level = 0;
  std::vector<double> ratios;
  double max_ratio = 0.0;
  double row_change = 0.0;        // max relative change of any row vs the previous level
  double max_ratio_change = 0.0;  // relative change of max_ratio vs the previous level
};

struct RefinementReport {
  std::string experiment_id;
  std::vector<double> params;
  std::vector<RefinementLevel> levels;

  double final_row_change() const { return levels.empty() ? 0.0 : levels.back().row_change; }
  double final_max_change() const { return levels.empty() ? 0.0 : levels.back().max_ratio_change; }
};

// Recomputes the study at levels d.level, d.level + 1, ...; each level doubles
// the operator's sup sampling (tau, alpha, R or sigma grids).
RefinementReport refinement_study(const Descriptor& d, int levels);

std::vector<std::string> band_violations(const Descriptor& d, const GrowthReport& r);
std::vector<std::string> band_violations(const Descriptor& d, const RefinementReport& r);

// ---- serialization ----

extern const char* const kCsvHeader;

std::string format_number(double v);  // %.17g
std::string to_csv(const GrowthReport& r);
// Rebuilds id, p1, p2 and the CSV-visible row fields.
GrowthReport growth_report_from_csv(const std::string& text);
std::string to_json(const GrowthReport& r);
GrowthReport growth_report_from_json(const std::string& text);
std::string to_json(const RefinementReport& r);

}  // namespace varlab::lab
