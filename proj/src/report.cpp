#include <cstdio>

#include "cubevar/harness.hpp"
#include "json.hpp"

namespace cubevar {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

}  // namespace

void write_report_csv(std::ostream& os, const ExperimentReport& r, bool header) {
  if (header) os << "experiment,trial,d,G,param_json,lhs,rhs,slack,pass,empirical_constant\n";
  for (const auto& row : r.rows)
    os << row.experiment << ',' << row.trial << ',' << row.d << ',' << row.grid << ',' << csv_quote(row.param_json)
       << ',' << num(row.lhs) << ',' << num(row.rhs) << ',' << num(row.slack) << ',' << (row.pass ? "true" : "false")
       << ',' << num(row.empirical_constant) << '\n';
}

void write_report_json(std::ostream& os, const ExperimentReport& r) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  auto value = [](double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(num(x)); };
  for (const auto& row : r.rows) {
    nlohmann::ordered_json o;
    o["experiment"] = row.experiment;
    o["trial"] = row.trial;
    o["d"] = row.d;
    o["G"] = row.grid;
    o["params"] = nlohmann::ordered_json::parse(row.param_json);
    o["lhs"] = value(row.lhs);
    o["rhs"] = value(row.rhs);
    o["slack"] = value(row.slack);
    o["pass"] = row.pass;
    o["empirical_constant"] = value(row.empirical_constant);
    out.push_back(std::move(o));
  }
  os << out.dump(2) << '\n';
}

}  // namespace cubevar
