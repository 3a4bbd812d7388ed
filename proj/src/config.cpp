#include <fstream>
#include <set>
#include <sstream>

#include "descriptor_minimax/cli_io.hpp"

namespace dminimax {

using nlohmann::json;

namespace {

using Mat = Matrix<double>;
using Vec = Vector<double>;

[[noreturn]] void schema_error(const std::string& path, const std::string& message) {
  throw Error(ErrorKind::SchemaError, path + ": " + message);
}

[[noreturn]] void dimension_error(const std::string& path, const std::string& message) {
  throw Error(ErrorKind::DimensionError, path + ": " + message);
}

std::string shape(const Mat& a) { return std::to_string(a.rows()) + "x" + std::to_string(a.cols()); }

// 0: number, 1: array of numbers, 2: array of arrays of numbers, ...; -1 otherwise.
int depth(const json& j) {
  if (j.is_number()) return 0;
  if (!j.is_array() || j.empty()) return -1;
  const int inner = depth(j.front());
  if (inner < 0) return -1;
  for (const auto& item : j) {
    if (depth(item) != inner) return -1;
  }
  return inner + 1;
}

const json& require_key(const json& object, const std::string& key, const std::string& path) {
  if (!object.is_object()) schema_error(path, "expected an object");
  const auto it = object.find(key);
  if (it == object.end()) schema_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

Vec vector_from_json(const json& j, const std::string& path) {
  if (depth(j) != 1) schema_error(path, "expected a non-empty array of numbers");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

Mat matrix_from_json(const json& j, const std::string& path) {
  if (depth(j) != 2) schema_error(path, "expected a matrix (non-empty array of rows)");
  const std::size_t cols = j.front().size();
  Mat a(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != cols) schema_error(item(path, r), "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) a(static_cast<Index>(r), static_cast<Index>(c)) = j[r][c].get<double>();
  }
  return a;
}

json to_json_matrix(const Mat& a) {
  json rows = json::array();
  for (Index r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json_vector(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

/// A single matrix broadcast to `count` steps, or a list of exactly `count` matrices.
std::vector<Mat> matrix_sequence(const json& j, std::size_t count, const std::string& path) {
  const int d = depth(j);
  if (d == 2) return std::vector<Mat>(count, matrix_from_json(j, path));
  if (d == 3 || (j.is_array() && j.empty())) {
    if (j.size() != count) {
      dimension_error(path, "has " + std::to_string(j.size()) + " entries, expected " + std::to_string(count));
    }
    std::vector<Mat> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(matrix_from_json(j[i], item(path, i)));
    return out;
  }
  schema_error(path, "expected a matrix or a list of matrices");
}

void require_shape(const Mat& a, Index rows, Index cols, const std::string& path, const std::string& reason) {
  if (a.rows() != rows || a.cols() != cols) {
    dimension_error(path, "is " + shape(a) + ", expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                              " (" + reason + ")");
  }
}

void require_spd_field(const Mat& q, const std::string& path) {
  if (!is_symmetric_positive_definite(q)) schema_error(path, "not symmetric positive definite");
}

TimeFunction time_function_from_json(const json& j, const std::string& path) {
  const int d = depth(j);
  if (d == 2) return TimeFunction(matrix_from_json(j, path));
  if (d == 1) return TimeFunction(Mat(vector_from_json(j, path)));
  if (!j.is_object()) schema_error(path, "expected a matrix or a time-function object");
  auto value = [&](const json& v, const std::string& p) {
    return depth(v) == 1 ? Mat(vector_from_json(v, p)) : matrix_from_json(v, p);
  };
  const std::string type = require_key(j, "type", path).is_string() ? j["type"].get<std::string>() : "";
  try {
    if (type == "constant") return TimeFunction(value(require_key(j, "value", path), child(path, "value")));
    if (type == "table") {
      const json& times = require_key(j, "times", path);
      const json& values = require_key(j, "values", path);
      if (depth(times) != 1) schema_error(child(path, "times"), "expected an array of numbers");
      if (!values.is_array()) schema_error(child(path, "values"), "expected a list of matrices");
      std::vector<double> t = times.get<std::vector<double>>();
      std::vector<Mat> v;
      for (std::size_t i = 0; i < values.size(); ++i) v.push_back(value(values[i], item(child(path, "values"), i)));
      return TimeFunction::table(std::move(t), std::move(v));
    }
    if (type == "polynomial") {
      const json& coefficients = require_key(j, "coefficients", path);
      if (!coefficients.is_array()) schema_error(child(path, "coefficients"), "expected a list of matrices");
      std::vector<Mat> c;
      for (std::size_t i = 0; i < coefficients.size(); ++i) {
        c.push_back(value(coefficients[i], item(child(path, "coefficients"), i)));
      }
      return TimeFunction::polynomial(std::move(c));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidInput) schema_error(path, e.what());
    throw;
  }
  schema_error(child(path, "type"), "must be \"constant\", \"table\" or \"polynomial\"");
}

json time_function_to_json(const TimeFunction& f) {
  json out;
  switch (f.kind()) {
    case TimeFunction::Kind::constant:
      out["type"] = "constant";
      out["value"] = to_json_matrix(f.values().front());
      break;
    case TimeFunction::Kind::table: {
      out["type"] = "table";
      out["times"] = f.times();
      json values = json::array();
      for (const auto& v : f.values()) values.push_back(to_json_matrix(v));
      out["values"] = std::move(values);
      break;
    }
    case TimeFunction::Kind::polynomial: {
      out["type"] = "polynomial";
      json c = json::array();
      for (const auto& v : f.values()) c.push_back(to_json_matrix(v));
      out["coefficients"] = std::move(c);
      break;
    }
  }
  return out;
}

void require_time_shape(const TimeFunction& f, Index rows, Index cols, const std::string& path,
                        const std::string& reason) {
  if (f.rows() != rows || f.cols() != cols) {
    dimension_error(path, "is " + std::to_string(f.rows()) + "x" + std::to_string(f.cols()) + ", expected " +
                              std::to_string(rows) + "x" + std::to_string(cols) + " (" + reason + ")");
  }
}

EstimationMode mode_from_string(const std::string& s, const std::string& path) {
  if (s == "apriori") return EstimationMode::apriori;
  if (s == "aposteriori") return EstimationMode::aposteriori;
  if (s == "filter") return EstimationMode::filter;
  if (s == "riccati") return EstimationMode::riccati;
  if (s == "tikhonov") return EstimationMode::tikhonov;
  schema_error(path, "unknown mode \"" + s + "\"");
}

void parse_static(const json& doc, ProblemConfig& cfg) {
  const json& model = require_key(doc, "model", "");
  auto& m = cfg.static_model;
  m.F = matrix_from_json(require_key(model, "F", "model"), "model.F");
  m.B = matrix_from_json(require_key(model, "B", "model"), "model.B");
  m.H = matrix_from_json(require_key(model, "H", "model"), "model.H");
  if (m.B.rows() != m.F.rows()) {
    dimension_error("model.B", "has " + std::to_string(m.B.rows()) + " rows, model.F has " + std::to_string(m.F.rows()));
  }
  if (m.H.cols() != m.F.cols()) {
    dimension_error("model.H", "has " + std::to_string(m.H.cols()) + " columns, model.F has " +
                                   std::to_string(m.F.cols()));
  }
  const json& bounds = require_key(doc, "bounds", "");
  auto& b = cfg.static_bounds;
  b.Q1 = matrix_from_json(require_key(bounds, "Q1", "bounds"), "bounds.Q1");
  b.Q2 = matrix_from_json(require_key(bounds, "Q2", "bounds"), "bounds.Q2");
  require_shape(b.Q1, m.B.cols(), m.B.cols(), "bounds.Q1", "input dimension of model.B");
  require_shape(b.Q2, m.H.rows(), m.H.rows(), "bounds.Q2", "rows of model.H");
  require_spd_field(b.Q1, "bounds.Q1");
  require_spd_field(b.Q2, "bounds.Q2");
}

void parse_discrete(const json& doc, ProblemConfig& cfg) {
  const json& model = require_key(doc, "model", "");
  const json& horizon = require_key(model, "horizon", "model");
  if (!horizon.is_number_integer() || horizon.get<long long>() < 0) {
    schema_error("model.horizon", "expected a non-negative integer");
  }
  auto& dae = cfg.dae;
  dae.horizon = horizon.get<Index>();
  const auto steps = static_cast<std::size_t>(dae.horizon) + 1;
  const auto transitions = static_cast<std::size_t>(dae.horizon);
  dae.F = matrix_sequence(require_key(model, "F", "model"), steps, "model.F");
  dae.H = matrix_sequence(require_key(model, "H", "model"), steps, "model.H");
  dae.C = transitions > 0 ? matrix_sequence(require_key(model, "C", "model"), transitions, "model.C")
                          : std::vector<Mat>{};
  dae.B = transitions > 0 ? matrix_sequence(require_key(model, "B", "model"), transitions, "model.B")
                          : std::vector<Mat>{};
  const Index m = dae.F.front().rows();
  const Index n = dae.F.front().cols();
  const Index l = dae.H.front().rows();
  dae.S = model.contains("S") ? matrix_from_json(model["S"], "model.S") : Mat(Mat::Identity(m, m));
  for (std::size_t k = 0; k < steps; ++k) {
    require_shape(dae.F[k], m, n, item("model.F", k), "shape of model.F[0]");
    require_shape(dae.H[k], l, n, item("model.H", k), "columns must match model.F");
  }
  const Index p = transitions > 0 ? dae.B.front().cols() : 0;
  for (std::size_t k = 0; k < transitions; ++k) {
    require_shape(dae.C[k], m, n, item("model.C", k), "shape of model.F");
    require_shape(dae.B[k], m, p, item("model.B", k), "rows must match model.F");
  }
  require_shape(dae.S, m, m, "model.S", "rows of model.F");

  const json& bounds = require_key(doc, "bounds", "");
  auto& b = cfg.dae_bounds;
  b.Q0 = matrix_from_json(require_key(bounds, "Q0", "bounds"), "bounds.Q0");
  require_shape(b.Q0, m, m, "bounds.Q0", "rows of model.F");
  require_spd_field(b.Q0, "bounds.Q0");
  b.Q1 = transitions > 0 ? matrix_sequence(require_key(bounds, "Q1", "bounds"), transitions, "bounds.Q1")
                         : std::vector<Mat>{};
  b.Q2 = matrix_sequence(require_key(bounds, "Q2", "bounds"), steps, "bounds.Q2");
  for (std::size_t k = 0; k < transitions; ++k) {
    require_shape(b.Q1[k], p, p, item("bounds.Q1", k), "columns of model.B");
    require_spd_field(b.Q1[k], item("bounds.Q1", k));
  }
  for (std::size_t k = 0; k < steps; ++k) {
    require_shape(b.Q2[k], l, l, item("bounds.Q2", k), "rows of model.H");
    require_spd_field(b.Q2[k], item("bounds.Q2", k));
  }
}

void parse_continuous(const json& doc, ProblemConfig& cfg) {
  const json& model = require_key(doc, "model", "");
  auto& sys = cfg.continuous;
  sys.F = matrix_from_json(require_key(model, "F", "model"), "model.F");
  sys.C = time_function_from_json(require_key(model, "C", "model"), "model.C");
  sys.H = time_function_from_json(require_key(model, "H", "model"), "model.H");
  const json& interval = require_key(model, "interval", "model");
  if (depth(interval) != 1 || interval.size() != 2) schema_error("model.interval", "expected [a, c]");
  sys.a = interval[0].get<double>();
  sys.c = interval[1].get<double>();
  if (!(sys.a < sys.c)) schema_error("model.interval", "needs a < c");
  const Index m = sys.F.rows();
  const Index n = sys.F.cols();
  require_time_shape(sys.C, m, n, "model.C", "shape of model.F");
  if (sys.H.cols() != n) {
    dimension_error("model.H", "has " + std::to_string(sys.H.cols()) + " columns, model.F has " + std::to_string(n));
  }
  const Index l = sys.H.rows();

  const json& grid = require_key(doc, "grid", "");
  const json& steps = require_key(grid, "steps", "grid");
  if (!steps.is_number_integer() || steps.get<long long>() < 1) schema_error("grid.steps", "expected a positive integer");
  cfg.grid_steps = steps.get<Index>();

  const json& bounds = require_key(doc, "bounds", "");
  auto& b = cfg.continuous_bounds;
  b.Q0 = matrix_from_json(require_key(bounds, "Q0", "bounds"), "bounds.Q0");
  require_shape(b.Q0, m, m, "bounds.Q0", "rows of model.F");
  require_spd_field(b.Q0, "bounds.Q0");
  b.Q1 = time_function_from_json(require_key(bounds, "Q1", "bounds"), "bounds.Q1");
  b.Q2 = time_function_from_json(require_key(bounds, "Q2", "bounds"), "bounds.Q2");
  require_time_shape(b.Q1, m, m, "bounds.Q1", "rows of model.F");
  require_time_shape(b.Q2, l, l, "bounds.Q2", "rows of model.H");
  const auto g = cfg.grid();
  for (Index k = 0; k <= g.steps; ++k) {
    const double t = g.node(k);
    if (!is_symmetric_positive_definite(b.Q1(t))) schema_error("bounds.Q1", "not symmetric positive definite at t=" + std::to_string(t));
    if (!is_symmetric_positive_definite(b.Q2(t))) schema_error("bounds.Q2", "not symmetric positive definite at t=" + std::to_string(t));
  }
}

bool mode_allowed(ProblemKind kind, EstimationMode mode) {
  switch (kind) {
    case ProblemKind::static_model:
      return mode == EstimationMode::apriori || mode == EstimationMode::aposteriori;
    case ProblemKind::discrete_dae:
      return mode == EstimationMode::apriori || mode == EstimationMode::aposteriori || mode == EstimationMode::filter;
    case ProblemKind::continuous_dae:
      return mode == EstimationMode::apriori || mode == EstimationMode::riccati || mode == EstimationMode::tikhonov;
  }
  return false;
}

void parse_estimation(const json& doc, ProblemConfig& cfg) {
  const json& est = require_key(doc, "estimation", "");
  const json& mode = require_key(est, "mode", "estimation");
  if (!mode.is_string()) schema_error("estimation.mode", "expected a string");
  auto& target = cfg.estimation;
  target.mode = mode_from_string(mode.get<std::string>(), "estimation.mode");
  if (!mode_allowed(cfg.kind, target.mode)) {
    schema_error("estimation.mode", std::string("\"") + to_string(target.mode) + "\" is not available for kind " +
                                        to_string(cfg.kind));
  }
  const Index n = cfg.state_dim();
  if (est.contains("alpha")) {
    const json& alpha = est["alpha"];
    if (depth(alpha) != 1) schema_error("estimation.alpha", "expected an array of numbers");
    target.alpha = alpha.get<std::vector<double>>();
  }
  if (est.contains("ell0")) {
    target.ell0 = vector_from_json(est["ell0"], "estimation.ell0");
    if (target.ell0->size() != n) {
      dimension_error("estimation.ell0", "has length " + std::to_string(target.ell0->size()) + ", expected " +
                                             std::to_string(n));
    }
  }

  switch (cfg.kind) {
    case ProblemKind::static_model: {
      Vec ell = vector_from_json(require_key(est, "ell", "estimation"), "estimation.ell");
      if (ell.size() != n) {
        dimension_error("estimation.ell", "has length " + std::to_string(ell.size()) + ", expected " + std::to_string(n));
      }
      target.ell = {ell};
      break;
    }
    case ProblemKind::discrete_dae: {
      const json& ell = require_key(est, "ell", "estimation");
      const auto steps = cfg.dae.steps();
      if (depth(ell) == 1) {
        // A single vector is a functional of the final state.
        target.ell.assign(steps, Vec::Zero(n));
        target.ell.back() = vector_from_json(ell, "estimation.ell");
      } else if (depth(ell) == 2) {
        if (ell.size() != steps) {
          dimension_error("estimation.ell", "has " + std::to_string(ell.size()) + " blocks, expected " +
                                                std::to_string(steps));
        }
        for (std::size_t k = 0; k < steps; ++k) target.ell.push_back(vector_from_json(ell[k], item("estimation.ell", k)));
      } else {
        schema_error("estimation.ell", "expected a vector or a list of vectors");
      }
      for (std::size_t k = 0; k < target.ell.size(); ++k) {
        if (target.ell[k].size() != n) {
          dimension_error(item("estimation.ell", k), "has length " + std::to_string(target.ell[k].size()) +
                                                         ", expected " + std::to_string(n));
        }
      }
      break;
    }
    case ProblemKind::continuous_dae: {
      if (target.mode == EstimationMode::riccati) {
        if (!target.ell0) schema_error("estimation.ell0", "required for riccati mode");
        if (est.contains("ell")) target.ell_function = time_function_from_json(est["ell"], "estimation.ell");
      } else {
        target.ell_function = time_function_from_json(require_key(est, "ell", "estimation"), "estimation.ell");
      }
      if (!target.ell_function.empty()) require_time_shape(target.ell_function, n, 1, "estimation.ell", "state dimension");
      break;
    }
  }
  for (std::size_t i = 0; i < target.alpha.size(); ++i) {
    if (!(target.alpha[i] > 0) || (i > 0 && !(target.alpha[i] < target.alpha[i - 1]))) {
      schema_error("estimation.alpha", "must be positive and strictly decreasing");
    }
  }
}

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

bool same(const Mat& a, const Mat& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; }

bool same(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same(a[i], b[i])) return false;
  }
  return true;
}

bool same(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size() || a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::static_model: return "static";
    case ProblemKind::discrete_dae: return "discrete_dae";
    case ProblemKind::continuous_dae: return "continuous_dae";
  }
  return "unknown";
}

const char* to_string(EstimationMode mode) {
  switch (mode) {
    case EstimationMode::apriori: return "apriori";
    case EstimationMode::aposteriori: return "aposteriori";
    case EstimationMode::filter: return "filter";
    case EstimationMode::riccati: return "riccati";
    case EstimationMode::tikhonov: return "tikhonov";
  }
  return "unknown";
}

TimeGrid ProblemConfig::grid() const {
  if (kind != ProblemKind::continuous_dae || !grid_steps) {
    throw Error(ErrorKind::InvalidGrid, "only continuous problems carry a grid");
  }
  return TimeGrid::uniform(continuous.a, continuous.c, *grid_steps);
}

Index ProblemConfig::state_dim() const {
  switch (kind) {
    case ProblemKind::static_model: return static_model.state_dim();
    case ProblemKind::discrete_dae: return dae.state_dim();
    case ProblemKind::continuous_dae: return continuous.state_dim();
  }
  return 0;
}

Index ProblemConfig::observation_dim() const {
  switch (kind) {
    case ProblemKind::static_model: return static_model.observation_dim();
    case ProblemKind::discrete_dae: return dae.observation_dim();
    case ProblemKind::continuous_dae: return continuous.observation_dim();
  }
  return 0;
}

std::size_t ProblemConfig::observation_count() const {
  switch (kind) {
    case ProblemKind::static_model: return 1;
    case ProblemKind::discrete_dae: return dae.steps();
    case ProblemKind::continuous_dae: return grid().size();
  }
  return 0;
}

ProblemConfig config_from_json(const json& doc) {
  if (!doc.is_object()) schema_error("(root)", "expected an object");
  static const std::set<std::string> known{"kind", "model", "bounds", "estimation", "grid", "seed"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) schema_error(key, "unknown top-level key");
  }
  ProblemConfig cfg;
  const json& kind = require_key(doc, "kind", "");
  const std::string k = kind.is_string() ? kind.get<std::string>() : "";
  if (k == "static") {
    cfg.kind = ProblemKind::static_model;
    parse_static(doc, cfg);
  } else if (k == "discrete_dae") {
    cfg.kind = ProblemKind::discrete_dae;
    parse_discrete(doc, cfg);
  } else if (k == "continuous_dae") {
    cfg.kind = ProblemKind::continuous_dae;
    parse_continuous(doc, cfg);
  } else {
    schema_error("kind", "must be \"static\", \"discrete_dae\" or \"continuous_dae\"");
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) schema_error("seed", "expected a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  parse_estimation(doc, cfg);
  return cfg;
}

ProblemConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                                           e.what());
  }
  try {
    return config_from_json(doc);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, e.what());
  }
}

ProblemConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

json config_to_json(const ProblemConfig& cfg) {
  json doc;
  doc["kind"] = to_string(cfg.kind);
  doc["seed"] = cfg.seed;
  json model;
  json bounds;
  json est;
  est["mode"] = to_string(cfg.estimation.mode);
  switch (cfg.kind) {
    case ProblemKind::static_model:
      model["F"] = to_json_matrix(cfg.static_model.F);
      model["B"] = to_json_matrix(cfg.static_model.B);
      model["H"] = to_json_matrix(cfg.static_model.H);
      bounds["Q1"] = to_json_matrix(cfg.static_bounds.Q1);
      bounds["Q2"] = to_json_matrix(cfg.static_bounds.Q2);
      est["ell"] = to_json_vector(cfg.estimation.ell.front());
      break;
    case ProblemKind::discrete_dae: {
      auto list = [](const std::vector<Mat>& seq) {
        json out = json::array();
        for (const auto& a : seq) out.push_back(to_json_matrix(a));
        return out;
      };
      model["horizon"] = cfg.dae.horizon;
      model["F"] = list(cfg.dae.F);
      model["H"] = list(cfg.dae.H);
      model["C"] = list(cfg.dae.C);
      model["B"] = list(cfg.dae.B);
      model["S"] = to_json_matrix(cfg.dae.S);
      bounds["Q0"] = to_json_matrix(cfg.dae_bounds.Q0);
      bounds["Q1"] = list(cfg.dae_bounds.Q1);
      bounds["Q2"] = list(cfg.dae_bounds.Q2);
      json ell = json::array();
      for (const auto& v : cfg.estimation.ell) ell.push_back(to_json_vector(v));
      est["ell"] = std::move(ell);
      break;
    }
    case ProblemKind::continuous_dae:
      model["F"] = to_json_matrix(cfg.continuous.F);
      model["C"] = time_function_to_json(cfg.continuous.C);
      model["H"] = time_function_to_json(cfg.continuous.H);
      model["interval"] = {cfg.continuous.a, cfg.continuous.c};
      bounds["Q0"] = to_json_matrix(cfg.continuous_bounds.Q0);
      bounds["Q1"] = time_function_to_json(cfg.continuous_bounds.Q1);
      bounds["Q2"] = time_function_to_json(cfg.continuous_bounds.Q2);
      doc["grid"] = {{"steps", *cfg.grid_steps}};
      if (!cfg.estimation.ell_function.empty()) est["ell"] = time_function_to_json(cfg.estimation.ell_function);
      break;
  }
  if (cfg.estimation.ell0) est["ell0"] = to_json_vector(*cfg.estimation.ell0);
  if (!cfg.estimation.alpha.empty()) est["alpha"] = cfg.estimation.alpha;
  doc["model"] = std::move(model);
  doc["bounds"] = std::move(bounds);
  doc["estimation"] = std::move(est);
  return doc;
}

bool operator==(const ProblemConfig& a, const ProblemConfig& b) {
  if (a.kind != b.kind || a.seed != b.seed || a.grid_steps != b.grid_steps) return false;
  const auto& ea = a.estimation;
  const auto& eb = b.estimation;
  if (ea.mode != eb.mode || !same(ea.ell, eb.ell) || !(ea.ell_function == eb.ell_function) || ea.alpha != eb.alpha) {
    return false;
  }
  if (ea.ell0.has_value() != eb.ell0.has_value() || (ea.ell0 && !same(Mat(*ea.ell0), Mat(*eb.ell0)))) return false;
  switch (a.kind) {
    case ProblemKind::static_model:
      return same(a.static_model.F, b.static_model.F) && same(a.static_model.B, b.static_model.B) &&
             same(a.static_model.H, b.static_model.H) && same(a.static_bounds.Q1, b.static_bounds.Q1) &&
             same(a.static_bounds.Q2, b.static_bounds.Q2);
    case ProblemKind::discrete_dae:
      return a.dae.horizon == b.dae.horizon && same(a.dae.F, b.dae.F) && same(a.dae.C, b.dae.C) &&
             same(a.dae.B, b.dae.B) && same(a.dae.H, b.dae.H) && same(a.dae.S, b.dae.S) &&
             same(a.dae_bounds.Q0, b.dae_bounds.Q0) && same(a.dae_bounds.Q1, b.dae_bounds.Q1) &&
             same(a.dae_bounds.Q2, b.dae_bounds.Q2);
    case ProblemKind::continuous_dae:
      return same(a.continuous.F, b.continuous.F) && a.continuous.C == b.continuous.C &&
             a.continuous.H == b.continuous.H && a.continuous.a == b.continuous.a && a.continuous.c == b.continuous.c &&
             same(a.continuous_bounds.Q0, b.continuous_bounds.Q0) && a.continuous_bounds.Q1 == b.continuous_bounds.Q1 &&
             a.continuous_bounds.Q2 == b.continuous_bounds.Q2;
  }
  return false;
}

}  // namespace dminimax
