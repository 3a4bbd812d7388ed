#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "descriptor_minimax/cli_io.hpp"

namespace dminimax {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": \"" + text + "\" is not a number");
  }
  return v;
}

}  // namespace

json report_to_json(const ResultReport& report) {
  json doc;
  doc["command"] = report.command;
  doc["kind"] = report.kind;
  doc["mode"] = report.mode;
  doc["feasible"] = report.feasible;
  doc["estimate"] = report.estimate ? json(*report.estimate) : json(nullptr);
  doc["sigma_hat"] = std::isinf(report.sigma_hat) ? json("infinite") : json(report.sigma_hat);
  doc["diagnostics"] = report.diagnostics;
  doc["timings"] = report.timings;
  return doc;
}

ResultReport report_from_json(const json& doc) {
  try {
    ResultReport report;
    report.command = doc.at("command").get<std::string>();
    report.kind = doc.at("kind").get<std::string>();
    report.mode = doc.at("mode").get<std::string>();
    report.feasible = doc.at("feasible").get<bool>();
    if (!doc.at("estimate").is_null()) report.estimate = doc["estimate"].get<double>();
    const json& sigma = doc.at("sigma_hat");
    if (sigma.is_string()) {
      if (sigma.get<std::string>() != "infinite") throw Error(ErrorKind::SchemaError, "sigma_hat: expected a number or \"infinite\"");
      report.sigma_hat = std::numeric_limits<double>::infinity();
    } else {
      report.sigma_hat = sigma.get<double>();
    }
    if (doc.contains("diagnostics")) report.diagnostics = doc["diagnostics"];
    if (doc.contains("timings")) report.timings = doc["timings"].get<std::map<std::string, double>>();
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("report: ") + e.what());
  }
}

bool operator==(const ResultReport& a, const ResultReport& b) {
  return a.command == b.command && a.kind == b.kind && a.mode == b.mode && a.feasible == b.feasible &&
         a.estimate == b.estimate && a.sigma_hat == b.sigma_hat && a.diagnostics == b.diagnostics &&
         a.timings == b.timings;
}

std::string format_trajectory_csv(const std::vector<Vector<double>>& rows, const std::string& prefix) {
  const Index width = rows.empty() ? 0 : rows.front().size();
  std::string out = "k";
  for (Index j = 0; j < width; ++j) out += "," + prefix + std::to_string(j);
  out += "\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != width) throw Error(ErrorKind::InvalidInput, "trajectory rows have unequal lengths");
    out += std::to_string(k);
    for (Index j = 0; j < width; ++j) out += "," + format_double(rows[k](j));
    out += "\n";
  }
  return out;
}

std::vector<Vector<double>> parse_trajectory_csv(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() < 2 || header.front() != "k") {
    throw Error(ErrorKind::ParseError, "line 1: header must be k," + prefix + "0,...");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != prefix + std::to_string(j - 1)) {
      throw Error(ErrorKind::ParseError, "line 1: column " + std::to_string(j + 1) + " must be " + prefix +
                                             std::to_string(j - 1) + ", found \"" + header[j] + "\"");
    }
  }
  const auto width = static_cast<Index>(header.size() - 1);
  std::vector<Vector<double>> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<Index>(fields.size()) != width + 1) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(number) + ": expected " +
                                             std::to_string(width + 1) + " fields");
    }
    if (fields.front() != std::to_string(rows.size())) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(number) + ": expected k = " +
                                             std::to_string(rows.size()));
    }
    Vector<double> v(width);
    for (Index j = 0; j < width; ++j) v(j) = parse_double(fields[static_cast<std::size_t>(j) + 1], number);
    rows.push_back(std::move(v));
  }
  return rows;
}

void write_trajectory_csv(const std::string& path, const std::vector<Vector<double>>& rows, const std::string& prefix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  out << format_trajectory_csv(rows, prefix);
}

std::vector<Vector<double>> read_trajectory_csv(const std::string& path, const std::string& prefix) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_trajectory_csv(buffer.str(), prefix);
}

}  // namespace dminimax
