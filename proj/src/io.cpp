#include "ddlyap/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ddlyap::io {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) parse_fail(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) parse_fail(what + " is not finite");
  return v;
}

Vector parse_vector(const Json& j, const std::string& what) {
  if (!j.is_array()) parse_fail(what + " must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], what);
  return v;
}

Delay parse_delay(const Json& j) {
  if (j.is_number_integer()) return Delay::exact(Rational(j.get<std::int64_t>()));
  if (j.is_number()) return Delay::real(number(j, "delay"));
  if (j.is_object()) {
    if (!j.contains("num") || !j.contains("den") || !j["num"].is_number_integer() || !j["den"].is_number_integer())
      parse_fail("rational delay needs integer \"num\" and \"den\"");
    const auto den = j["den"].get<std::int64_t>();
    if (den == 0) parse_fail("rational delay has zero denominator");
    return Delay::exact(Rational(j["num"].get<std::int64_t>(), den));
  }
  parse_fail("delay must be a number or {\"num\", \"den\"}");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_fail(e.what());
  }
}

}  // namespace

Matrix parse_matrix(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) parse_fail(what + " must be a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) parse_fail(what + " rows must be arrays");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) parse_fail(what + " is ragged");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = number(j[r][c], what);
  }
  return m;
}

DelaySystem parse_system(const Json& j) {
  if (!j.is_object()) parse_fail("system descriptor must be an object");
  if (!j.contains("n") || !j["n"].is_number_integer()) parse_fail("\"n\" must be an integer");
  if (!j.contains("entries") || !j["entries"].is_array()) parse_fail("\"entries\" must be an array");
  const auto n = j["n"].get<std::int64_t>();
  std::vector<DelayTerm> terms;
  for (const auto& e : j["entries"]) {
    if (!e.is_object() || !e.contains("delay") || !e.contains("A")) parse_fail("entry needs \"delay\" and \"A\"");
    Matrix a = parse_matrix(e["A"], "A");
    if (a.rows() != n || a.cols() != n)
      throw Error(ErrorCode::DimensionMismatch, "entry matrix is not " + std::to_string(n) + "x" + std::to_string(n));
    terms.push_back(DelayTerm{parse_delay(e["delay"]), std::move(a)});
  }
  return DelaySystem(std::move(terms));
}

DelaySystem parse_system_text(const std::string& text) { return parse_system(parse_text(text)); }

DelaySystem load_system(const std::string& path) { return parse_system_text(read_file(path)); }

WeightMatrix load_weight(const std::string& path, Index n) {
  const Json j = parse_text(read_file(path));
  Matrix w = parse_matrix(j.is_object() && j.contains("W") ? j["W"] : j, "W");
  if (w.rows() != n || w.cols() != n) throw Error(ErrorCode::DimensionMismatch, "W must be n x n");
  return WeightMatrix(std::move(w));
}

InitialFunction parse_initial_function(const Json& j, double max_delay, Index n) {
  if (j.is_object() && j.contains("constant")) {
    Vector v = parse_vector(j["constant"], "phi.constant");
    if (v.size() != n) throw Error(ErrorCode::DimensionMismatch, "phi dimension");
    return InitialFunction::constant(std::move(v), max_delay);
  }
  if (j.is_object() && j.contains("pieces") && j["pieces"].is_array()) {
    std::vector<InitialFunction::Piece> pieces;
    for (const auto& p : j["pieces"]) {
      if (!p.is_object() || !p.contains("start") || !p.contains("value")) parse_fail("phi piece needs start/value");
      InitialFunction::Piece piece{number(p["start"], "phi.start"), parse_vector(p["value"], "phi.value"),
                                   p.contains("slope") ? parse_vector(p["slope"], "phi.slope") : Vector()};
      pieces.push_back(std::move(piece));
    }
    return InitialFunction::piecewise(std::move(pieces), max_delay);
  }
  parse_fail("phi must hold \"constant\" or \"pieces\"");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void header(std::ostream& os, const std::string& first, const std::string& label, Index n) {
  os << first;
  for (Index r = 1; r <= n; ++r)
    for (Index c = 1; c <= n; ++c) os << ',' << label << r << c;
}

void row(std::ostream& os, const Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) os << ',' << format_double(m(r, c));
}

}  // namespace

void write_step_csv(std::ostream& os, const StepMatrixFunction& k, const std::string& label,
                    std::optional<double> pre_start) {
  header(os, "t", label, k.pre_value().rows());
  os << '\n';
  if (pre_start) {
    os << format_double(*pre_start);
    row(os, k.pre_value());
    os << '\n';
  }
  for (std::size_t i = 0; i < k.breakpoints().size(); ++i) {
    os << format_double(k.breakpoints()[i]);
    row(os, k.values()[i]);
    os << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const std::vector<double>& grid, const Trajectory& x) {
  const Index n = x.empty() ? 0 : x.front().size();
  os << 't';
  for (Index i = 1; i <= n; ++i) os << ",x" << i;
  os << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << format_double(grid[i]);
    for (Index r = 0; r < n; ++r) os << ',' << format_double(x[i](r));
    os << '\n';
  }
}

void write_lyapunov_csv(std::ostream& os, const PiecewiseAffineMatrixFunction& u, const std::vector<double>& grid) {
  header(os, "tau", "U", u.dim());
  os << '\n';
  for (double tau : grid) {
    os << format_double(tau);
    row(os, u(tau));
    os << '\n';
  }
}

void write_spectrum_csv(std::ostream& os, const JumpSpectrum& spectrum, Index n) {
  header(os, "tau", "dU", n);
  os << ",bound\n";
  for (const auto& [tau, jump] : spectrum.entries) {
    os << format_double(tau);
    row(os, jump);
    os << ',' << format_double(spectrum.bound) << '\n';
  }
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row_j = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row_j.push_back(m(r, c));
    rows.push_back(std::move(row_j));
  }
  return rows;
}

Json to_json(const StabilityReport& r) {
  Json j;
  j["method"] = to_string(r.method);
  j["heuristic"] = r.method == StabilityMethod::TorusGridHeuristic;
  j["spectral_radius"] = r.spectral_radius;
  j["verdict"] = to_string(r.verdict);
  if (r.decay) {
    j["decay"] = {{"gamma", r.decay->gamma}, {"sigma", r.decay->sigma}, {"step", r.decay->step}};
  } else {
    j["decay"] = nullptr;
  }
  if (r.method == StabilityMethod::TorusGridHeuristic) j["grid_points"] = r.grid_points;
  return j;
}

Json to_json(const ResidualReport& r) {
  Json j;
  j["symmetry"] = r.symmetry;
  j["dynamic"] = r.dynamic;
  j["continuity"] = r.continuity;
  j["condition_estimate"] = r.condition_estimate;
  j["grid_points"] = r.grid_points;
  j["points_per_segment"] = r.points_per_segment;
  return j;
}

Json to_json(const JumpPropertyReport& r) {
  Json j;
  j["symmetry"] = r.symmetry;
  j["dynamic"] = r.dynamic;
  j["algebraic"] = r.algebraic;
  j["bound"] = r.bound;
  j["psd_margin"] = r.psd_margin;
  j["points"] = r.points;
  j["passed"] = r.passed();
  return j;
}

Json to_json(const CrossCheckReport& r, bool pointwise) {
  Json j;
  j["max_error"] = r.max_error;
  j["tail_bound"] = r.tail_bound;
  j["tolerance"] = r.tolerance;
  j["horizon"] = r.horizon;
  j["passed"] = r.passed();
  if (pointwise) {
    Json pts = Json::array();
    for (std::size_t i = 0; i < r.taus.size(); ++i) pts.push_back({{"tau", r.taus[i]}, {"error", r.errors[i]}});
    j["points"] = std::move(pts);
  }
  return j;
}

Json to_json(const SequenceResult& r) {
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    Json j;
    j["s"] = s.s;
    j["m"] = s.m;
    j["h"] = s.basic_delay.str();
    Json delays = Json::array();
    for (const auto& d : s.delays) delays.push_back(d.str());
    j["delays"] = std::move(delays);
    j["sup_diff"] = s.sup_diff ? Json(*s.sup_diff) : Json(nullptr);
    j["residuals"] = to_json(s.residual);
    j["stability"] = to_json(s.stability);
    steps.push_back(std::move(j));
  }
  Json out;
  out["steps"] = std::move(steps);
  out["stability_disagreement"] = r.stability_disagreement;
  return out;
}

}  // namespace ddlyap::io
