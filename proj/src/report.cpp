#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "varlab/lab.hpp"

namespace varlab::lab {

const char* const kCsvHeader = "experiment,param,p1,p2,input_norm1,input_norm2,output_norm,ratio";

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// JSON has no infinities; p = inf is written as the string "inf".
nlohmann::json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    throw LabError("report: bad number " + s);
  }
  return j.get<double>();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double csv_number(const std::string& s) {
  if (s == "inf") return INFINITY;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw LabError("csv: bad number " + s);
  return v;
}

}  // namespace

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Settings parse_key_values(const std::string& text) {
  Settings out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw LabError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw LabError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

Settings load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LabError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

std::string to_csv(const GrowthReport& r) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const Row& row : r.rows) {
    out += r.experiment_id + ',' + format_number(row.param) + ',' + format_number(r.p1) + ',';
    if (r.p2) out += format_number(*r.p2);
    out += ',';
    out += row.input_norms.empty() ? "" : format_number(row.input_norms[0]);
    out += ',';
    if (row.input_norms.size() > 1) out += format_number(row.input_norms[1]);
    out += ',' + format_number(row.output_norm) + ',' + format_number(row.ratio) + '\n';
  }
  return out;
}

GrowthReport growth_report_from_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || trim(line) != kCsvHeader) throw LabError("csv: missing or wrong header");
  GrowthReport r;
  bool first = true;
  while (std::getline(ss, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> c = split_csv(line);
    if (c.size() != 8) throw LabError("csv: expected 8 columns");
    if (first) {
      r.experiment_id = c[0];
      r.p1 = csv_number(c[2]);
      if (!c[3].empty()) r.p2 = csv_number(c[3]);
      first = false;
    }
    Row row;
    row.param = csv_number(c[1]);
    if (!c[4].empty()) row.input_norms.push_back(csv_number(c[4]));
    if (!c[5].empty()) row.input_norms.push_back(csv_number(c[5]));
    row.output_norm = csv_number(c[6]);
    row.ratio = csv_number(c[7]);
    r.rows.push_back(std::move(row));
  }
  return r;
}

std::string to_json(const GrowthReport& r) {
  nlohmann::json j;
  j["experiment_id"] = r.experiment_id;
  j["p1"] = number_json(r.p1);
  j["p2"] = r.p2 ? number_json(*r.p2) : nlohmann::json();
  j["p_out"] = number_json(r.p_out);
  j["model"] = to_string(r.model);
  j["fitted_exponent"] = r.fitted_exponent;
  j["residual"] = r.residual;
  nlohmann::json rows = nlohmann::json::array();
  for (const Row& row : r.rows) {
    rows.push_back({{"param", row.param},
                    {"input_norms", row.input_norms},
                    {"output_norm", row.output_norm},
                    {"ratio", row.ratio},
                    {"extras", row.extras}});
  }
  j["rows"] = rows;
  const Environment& e = r.environment;
  j["environment"] = {{"grid_m", e.grid_m},
                      {"period", e.period},
                      {"rng", e.rng},
                      {"seed", e.seed},
                      {"refinement_level", e.refinement_level},
                      {"profile_constants", e.profile_constants}};
  nlohmann::json certs = nlohmann::json::object();
  for (const auto& [name, doc] : r.certificates) certs[name] = nlohmann::json::parse(doc);
  j["certificates"] = certs;
  return j.dump(2);
}

GrowthReport growth_report_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  GrowthReport r;
  r.experiment_id = j.at("experiment_id").get<std::string>();
  r.p1 = number_from(j.at("p1"));
  if (!j.at("p2").is_null()) r.p2 = number_from(j.at("p2"));
  r.p_out = number_from(j.at("p_out"));
  r.model = parse_growth_model(j.at("model").get<std::string>());
  r.fitted_exponent = j.at("fitted_exponent").get<double>();
  r.residual = j.at("residual").get<double>();
  for (const auto& jr : j.at("rows")) {
    Row row;
    row.param = jr.at("param").get<double>();
    row.input_norms = jr.at("input_norms").get<std::vector<double>>();
    row.output_norm = jr.at("output_norm").get<double>();
    row.ratio = jr.at("ratio").get<double>();
    row.extras = jr.at("extras").get<std::map<std::string, double>>();
    r.rows.push_back(std::move(row));
  }
  const auto& e = j.at("environment");
  r.environment.grid_m = e.at("grid_m").get<std::size_t>();
  r.environment.period = e.at("period").get<double>();
  r.environment.rng = e.at("rng").get<std::string>();
  r.environment.seed = e.at("seed").get<std::uint64_t>();
  r.environment.refinement_level = e.at("refinement_level").get<int>();
  r.environment.profile_constants = e.at("profile_constants").get<std::map<std::string, double>>();
  for (const auto& [name, doc] : j.at("certificates").items()) r.certificates[name] = doc.dump();
  return r;
}

std::string to_json(const RefinementReport& r) {
  nlohmann::json j;
  j["experiment_id"] = r.experiment_id;
  j["params"] = r.params;
  nlohmann::json levels = nlohmann::json::array();
  for (const RefinementLevel& l : r.levels) {
    levels.push_back({{"level", l.level},
                      {"ratios", l.ratios},
                      {"max_ratio", l.max_ratio},
                      {"row_change", l.row_change},
                      {"max_ratio_change", l.max_ratio_change}});
  }
  j["levels"] = levels;
  return j.dump(2);
}

}  // namespace varlab::lab
