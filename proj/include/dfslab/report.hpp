// report.hpp — checks, reports and their canonical JSON / CSV / markdown forms
//
// Canonical JSON: keys sorted, two-space indent, LF, floats as %.12e,
// non-finite floats as the strings "inf", "-inf", "nan". Values that depend
// on the machine (timings) never enter the canonical form.

#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dfslab {

using json = nlohmann::json;

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation;  // "<=", ">=", "<", ">", "=="
  bool pass = false;
  bool volatile_value = false;  // timing-like; omitted from canonical output
};

inline bool compare(double value, const std::string& relation, double tolerance) {
  if (relation == "<=") return value <= tolerance;
  if (relation == "<") return value < tolerance;
  if (relation == ">=") return value >= tolerance;
  if (relation == ">") return value > tolerance;
  if (relation == "==") return value == tolerance;
  return false;
}

inline Check make_check(std::string name, double value, std::string relation, double tolerance) {
  Check c{std::move(name), value, tolerance, std::move(relation), false, false};
  c.pass = compare(value, c.relation, tolerance);  // NaN never passes
  return c;
}

inline Check make_timing_check(std::string name, double value_ms, double limit_ms) {
  Check c = make_check(std::move(name), value_ms, "<", limit_ms);
  c.volatile_value = true;
  return c;
}

// Tabular data for CSV output (trajectories, spectra).
struct Series {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

struct Report {
  std::string kind;
  json scenario = json::object();
  json results = json::object();
  std::vector<Check> checks;
  Series series;
  double wall_time_ms = 0.0;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

inline void write_canonical(const json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        write_canonical(it.value(), out, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ",\n";
        out += pad;
        write_canonical(j[k], out, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

inline std::string canonical_json(const json& j) {
  std::string out;
  detail::write_canonical(j, out, 0);
  out += "\n";
  return out;
}

inline json check_to_json(const Check& c) {
  json j;
  j["name"] = c.name;
  j["value"] = c.volatile_value ? json(nullptr) : json(c.value);
  j["tolerance"] = c.tolerance;
  j["relation"] = c.relation;
  j["pass"] = c.pass;
  return j;
}

inline json report_to_json(const Report& r) {
  json j;
  j["kind"] = r.kind;
  j["scenario"] = r.scenario;
  j["results"] = r.results;
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(check_to_json(c));
  j["checks"] = checks;
  j["pass"] = r.pass();
  return j;
}

inline std::string emit_json(const Report& r) { return canonical_json(report_to_json(r)); }

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string cell_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    std::string s = format_double(v.get<double>());
    if (!s.empty() && s.front() == '"') s = s.substr(1, s.size() - 2);
    return s;
  }
  return v.dump();
}

}  // namespace detail

// RFC 4180: CRLF line endings, quoted fields where needed. Emits the series
// when the report has one, otherwise the check table.
inline std::string emit_csv(const Report& r) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ",";
      out += detail::csv_field(cells[k]);
    }
    out += "\r\n";
  };
  if (!r.series.columns.empty()) {
    line(r.series.columns);
    for (const auto& row : r.series.rows) {
      std::vector<std::string> cells;
      for (const auto& v : row) cells.push_back(detail::cell_text(v));
      line(cells);
    }
    return out;
  }
  line({"check", "value", "relation", "tolerance", "pass"});
  for (const auto& c : r.checks) {
    line({c.name, c.volatile_value ? std::string() : detail::cell_text(json(c.value)), c.relation,
          detail::cell_text(json(c.tolerance)), c.pass ? "true" : "false"});
  }
  return out;
}

inline std::string emit_markdown(const Report& r) {
  std::ostringstream os;
  os << "# dfs-lab report: " << r.kind << "\n\n";
  os << "Overall: " << (r.pass() ? "PASS" : "FAIL") << "\n\n";
  char wall[64];
  std::snprintf(wall, sizeof wall, "%.1f", r.wall_time_ms);
  os << "Wall time: " << wall << " ms\n\n";
  os << "| check | value | relation | tolerance | pass |\n";
  os << "|---|---|---|---|---|\n";
  for (const auto& c : r.checks) {
    os << "| " << c.name << " | " << detail::cell_text(json(c.value))
       << " | " << c.relation << " | " << detail::cell_text(json(c.tolerance)) << " | " << (c.pass ? "yes" : "no")
       << " |\n";
  }
  return os.str();
}

}  // namespace dfslab
