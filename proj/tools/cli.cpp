#include "cli.hpp"

#include "CLI11.hpp"
#include "ddlyap/ddlyap.hpp"
#include "ddlyap/io.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace ddlyap::cli {

using io::Json;

int exit_code(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::ParseError:
      return kParse;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonincreasingDelays:
    case ErrorCode::SingularK0:
    case ErrorCode::NonRationalInput:
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::NonFinite:
      return kInvalidSystem;
    case ErrorCode::CriticalSystem:
      return kSolver;
    case ErrorCode::NotStable:
      return kNotStable;
    case ErrorCode::SizeExceeded:
    case ErrorCode::HorizonTooLarge:
    case ErrorCode::RecursionDepthExceeded:
      return kSizeCap;
    default:
      return kFailure;
  }
}

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string w = "identity";
  double tol = 1e-8;
  double horizon = 0.0;
  int order = 0;
  int samples = 0;
  std::vector<int> orders;
  std::string side = "right";
  std::string method = "direct";
  bool segments_only = false;
  bool pointwise = false;

  CLI::Option* horizon_opt = nullptr;
  CLI::Option* order_opt = nullptr;
  CLI::Option* samples_opt = nullptr;
  CLI::Option* w_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
};

// Config file: the system descriptor, optionally carrying W, horizon, order,
// orders, samples, tol and phi. Flags win over these fields.
struct Setup {
  Json config;
  ValidatedSystem sys;
  double big_h;
};

Json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

Setup load(const Options& o) {
  Json cfg = read_config(o.config);
  ValidatedSystem v = validate(io::parse_system(cfg));
  const double h = v.max_delay();
  return Setup{std::move(cfg), std::move(v), h};
}

double number_field(const Json& cfg, const char* key) {
  if (!cfg[key].is_number()) throw Error(ErrorCode::ParseError, std::string("\"") + key + "\" must be a number");
  return cfg[key].get<double>();
}

double horizon_of(const Options& o, const Setup& s, double fallback) {
  double t = fallback;
  if (o.horizon_opt->count() > 0)
    t = o.horizon;
  else if (s.config.contains("horizon"))
    t = number_field(s.config, "horizon");
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  return t;
}

std::size_t samples_of(const Options& o, const Setup& s, std::size_t fallback) {
  long n = static_cast<long>(fallback);
  if (o.samples_opt->count() > 0)
    n = o.samples;
  else if (s.config.contains("samples"))
    n = static_cast<long>(number_field(s.config, "samples"));
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "samples must be at least 2");
  return static_cast<std::size_t>(n);
}

std::optional<int> order_of(const Options& o, const Setup& s) {
  if (o.order_opt->count() > 0) return o.order;
  if (s.config.contains("order")) return static_cast<int>(number_field(s.config, "order"));
  return std::nullopt;
}

double tol_of(const Options& o, const Setup& s) {
  if (o.tol_opt->count() > 0) return o.tol;
  if (s.config.contains("tol")) return number_field(s.config, "tol");
  return o.tol;
}

WeightMatrix weight_of(const Options& o, const Setup& s) {
  const Index n = s.sys.dim();
  std::optional<WeightMatrix> w;
  if (o.w_opt->count() > 0) {
    if (o.w == "identity")
      w = WeightMatrix::identity(n);
    else
      w = io::load_weight(o.w, n);
  } else if (s.config.contains("W")) {
    Matrix m = io::parse_matrix(s.config["W"], "W");
    if (m.rows() != n || m.cols() != n) throw Error(ErrorCode::DimensionMismatch, "W must be n x n");
    w = WeightMatrix(std::move(m));
  } else {
    w = WeightMatrix::identity(n);
  }
  w->require_positive_definite();
  return *w;
}

// "u.csv" -> "u"; sidecars hang off the stem.
std::string stem(const std::string& path) {
  const auto dot = path.rfind('.');
  const auto slash = path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  f << text;
}

// Primary artifact: the --out file, or stdout when absent.
void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty())
    out << text;
  else
    write_file(o.out, text);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// The construction and the (possibly rationalized) system its residuals refer to.
struct Built {
  PiecewiseAffineMatrixFunction u;
  ValidatedSystem sys;
  std::optional<int> order;
};

Built build(const Setup& s, const WeightMatrix& w, std::optional<int> order) {
  if (s.sys.size() == 1 || s.sys.system().all_rational()) {
    return Built{build_lyapunov(s.sys, w), s.sys, std::nullopt};
  }
  if (!order)
    throw Error(ErrorCode::NonRationalInput, "delays are not commensurate; pass --order s for a rational approximation");
  CommensurateForm cf = approximate_system(s.sys, *order);
  auto u = build_commensurate(cf, w);
  return Built{std::move(u), cf.system, order};
}

void note_condition(const PiecewiseAffineMatrixFunction& u, std::ostream& err) {
  if (u.condition_warning)
    err << "warning: condition estimate " << io::format_double(u.condition_estimate) << " for the linear system\n";
}

Json build_info(const Built& b) {
  Json j;
  j["basic_delay"] = b.u.basic_delay();
  j["m"] = b.u.m();
  j["unknowns"] = b.u.unknowns;
  j["sparse"] = b.u.sparse_solve;
  j["condition_estimate"] = b.u.condition_estimate;
  j["order"] = b.order ? Json(*b.order) : Json(nullptr);
  return j;
}

int cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
  Json cfg = read_config(o.config);
  Json report;
  std::optional<DelaySystem> sys;
  try {
    sys.emplace(io::parse_system(cfg));
    ValidatedSystem v = validate(*sys);
    report["valid"] = true;
    report["n"] = v.dim();
    Json delays = Json::array();
    for (const auto& t : v.terms()) {
      if (t.delay.rational())
        delays.push_back(t.delay.rational()->str());
      else
        delays.push_back(t.delay.value());
    }
    report["delays"] = std::move(delays);
    report["K0"] = io::to_json(v.k0());
    report["stability"] = io::to_json(stability_check(v));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    report = Json();
    report["valid"] = false;
    report["error"] = to_string(e.code());
    report["message"] = e.what();
    if (sys) report["stability"] = io::to_json(stability_check(*sys));
    emit(o, out, dump(report));
    err << "invalid system: " << e.what() << "\n";
    return kInvalidSystem;
  }
  emit(o, out, dump(report));
  return kOk;
}

int cmd_k(const Options& o, std::ostream& out, std::ostream&) {
  Setup s = load(o);
  const double t = horizon_of(o, s, 10 * s.big_h);
  if (o.side != "right" && o.side != "left") throw Error(ErrorCode::InvalidArgument, "--side is right or left");
  auto k = fundamental_matrix(s.sys, t, o.side == "left" ? Side::Left : Side::Right);
  std::ostringstream ss;
  io::write_step_csv(ss, k, "K", -s.big_h);
  emit(o, out, ss.str());
  return kOk;
}

int cmd_sim(const Options& o, std::ostream& out, std::ostream&) {
  Setup s = load(o);
  const double t = horizon_of(o, s, 10 * s.big_h);
  const std::size_t n = samples_of(o, s, 200);
  InitialFunction phi = s.config.contains("phi")
                            ? io::parse_initial_function(s.config["phi"], s.big_h, s.sys.dim())
                            : InitialFunction::constant(Vector::Ones(s.sys.dim()), s.big_h);
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = t * static_cast<double>(i) / static_cast<double>(n - 1);
  Trajectory x;
  if (o.method == "direct")
    x = simulate(s.sys, phi, grid);
  else if (o.method == "cauchy")
    x = simulate_cauchy(s.sys, phi, grid);
  else
    throw Error(ErrorCode::InvalidArgument, "--method is direct or cauchy");
  std::ostringstream ss;
  io::write_trajectory_csv(ss, grid, x);
  emit(o, out, ss.str());
  return kOk;
}

int cmd_lyap(const Options& o, std::ostream& out, std::ostream& err) {
  Setup s = load(o);
  WeightMatrix w = weight_of(o, s);
  Built b = build(s, w, order_of(o, s));
  note_condition(b.u, err);
  std::ostringstream ss;
  io::write_lyapunov_csv(ss, b.u, plot_grid(b.u, samples_of(o, s, 200)));
  emit(o, out, ss.str());

  Json side;
  side["residuals"] = io::to_json(residuals(b.u, b.sys, w));
  side["build"] = build_info(b);
  side["stability"] = io::to_json(stability_check(s.sys));
  if (o.out.empty())
    err << dump(side);
  else
    write_file(stem(o.out) + ".residuals.json", dump(side));
  return kOk;
}

int cmd_jumps(const Options& o, std::ostream& out, std::ostream& err) {
  Setup s = load(o);
  WeightMatrix w = weight_of(o, s);
  std::ostringstream ss;
  if (o.segments_only) {
    Built b = build(s, w, order_of(o, s));
    note_condition(b.u, err);
    io::write_spectrum_csv(ss, jumps_from_segments(b.u), s.sys.dim());
    emit(o, out, ss.str());
    return kOk;
  }
  std::optional<double> t;
  if (o.horizon_opt->count() > 0 || s.config.contains("horizon")) t = horizon_of(o, s, 1.0);
  JumpSeries series(s.sys, w, t);
  const auto grid = knot_grid(s.sys);
  io::write_spectrum_csv(ss, series_spectrum(series, grid), s.sys.dim());
  emit(o, out, ss.str());

  Json side = io::to_json(check_jump_properties(series, grid));
  side["horizon"] = series.horizon();
  // exact segment jumps against the series
  auto u = build_lyapunov(s.sys, w);
  const auto seg = jumps_from_segments(u);
  double mismatch = 0.0;
  for (double tau : grid) {
    if (std::abs(tau) >= s.big_h * (1 - 1e-12)) continue;
    mismatch = std::max(mismatch, max_abs(seg.at(tau, s.sys.dim()) - series.delta_u_prime(tau).value));
  }
  side["segment_mismatch"] = mismatch;
  if (o.out.empty())
    err << dump(side);
  else
    write_file(stem(o.out) + ".properties.json", dump(side));
  return kOk;
}

int cmd_approx(const Options& o, std::ostream& out, std::ostream& err) {
  Setup s = load(o);
  WeightMatrix w = weight_of(o, s);
  std::vector<int> orders = o.orders;
  if (orders.empty()) {
    if (auto one = order_of(o, s)) {
      orders.push_back(*one);
    } else if (s.config.contains("orders") && s.config["orders"].is_array()) {
      for (const auto& v : s.config["orders"]) {
        if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, "\"orders\" must hold integers");
        orders.push_back(v.get<int>());
      }
    }
  }
  if (orders.empty()) throw Error(ErrorCode::InvalidArgument, "pass --orders s1,s2,...");
  SequenceOptions opts;
  const std::size_t samples = samples_of(o, s, 200);
  opts.grid_points = std::max<std::size_t>(samples, 400);
  auto res = u_sequence(s.sys, w, orders, opts);
  for (const auto& st : res.steps) note_condition(st.u, err);
  if (res.stability_disagreement) err << "warning: stability verdicts differ across orders\n";
  Json report = io::to_json(res);
  if (o.out.empty()) {
    out << dump(report);
    return kOk;
  }
  const std::string base = stem(o.out);
  for (const auto& st : res.steps) {
    std::ostringstream ss;
    io::write_lyapunov_csv(ss, st.u, plot_grid(st.u, samples));
    write_file(base + ".s" + std::to_string(st.s) + ".csv", ss.str());
  }
  write_file(base + ".convergence.json", dump(report));
  return kOk;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  Setup s = load(o);
  WeightMatrix w = weight_of(o, s);
  const double tol = tol_of(o, s);
  Built b = build(s, w, order_of(o, s));
  note_condition(b.u, err);

  Json report;
  bool ok = true;
  auto gate = [&](const char* name, double value) {
    const bool pass = std::isfinite(value) && value <= tol;
    report["gates"][name] = {{"value", value}, {"passed", pass}};
    ok = ok && pass;
  };
  const auto r = residuals(b.u, b.sys, w);
  gate("symmetry", r.symmetry);
  gate("dynamic", r.dynamic);
  gate("continuity", r.continuity);
  const Matrix p = p_matrix(b.sys, w);
  gate("p_antisymmetry", max_abs(p + p.transpose()));
  report["build"] = build_info(b);

  const auto stab = stability_check(b.sys);
  report["stability"] = io::to_json(stab);
  if (stab.stable() && stab.decay) {
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(-b.u.max_delay() + 2 * b.u.max_delay() * i / 100.0);
    std::optional<double> t;
    if (o.horizon_opt->count() > 0 || s.config.contains("horizon")) t = horizon_of(o, s, 1.0);
    const auto cc = cross_check(b.u, b.sys, w, grid, t, tol);
    report["oracle"] = io::to_json(cc, o.pointwise);
    ok = ok && cc.passed();
    const auto po = p_integral_oracle(b.sys, w, t);
    const double pe = max_abs(po.value - p);
    report["p_oracle"] = {{"error", pe}, {"tail_bound", po.tail_bound}, {"passed", pe <= po.tail_bound + tol}};
    ok = ok && pe <= po.tail_bound + tol;
  } else {
    report["oracle"] = nullptr;
    err << "note: no integral oracle for a system without a decay estimate; residual gates only\n";
  }
  report["passed"] = ok;
  emit(o, out, dump(report));
  return ok ? kOk : kFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Delay Lyapunov matrices of linear delay difference equations"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "system descriptor (JSON)")->required();
    c->add_option("--out", o.out, "output file; stdout when omitted");
    o.tol_opt = c->add_option("--tol", o.tol, "residual gate tolerance");
    o.horizon_opt = c->add_option("--horizon", o.horizon, "time horizon");
    o.order_opt = c->add_option("--order", o.order, "continued-fraction order for incommensurate delays");
    o.samples_opt = c->add_option("--samples", o.samples, "number of uniform samples");
    o.w_opt = c->add_option("--w", o.w, "weight: identity or a JSON matrix file");
  };

  // CLI11 keeps option pointers per subcommand; rebind on the one selected.
  struct Sub {
    CLI::App* app;
    CLI::Option *tol, *horizon, *order, *samples, *w;
  };
  std::vector<Sub> subs;
  auto add = [&](const char* name, const char* help) {
    CLI::App* c = app.add_subcommand(name, help);
    common(c);
    subs.push_back(Sub{c, o.tol_opt, o.horizon_opt, o.order_opt, o.samples_opt, o.w_opt});
    return c;
  };

  add("check", "validate a system and report stability");
  add("k", "fundamental matrix K(t) as CSV")->add_option("--side", o.side, "right or left recursion");
  add("sim", "simulate from an initial function")->add_option("--method", o.method, "direct or cauchy");
  add("lyap", "build U on [-H, H] as CSV with a residual sidecar");
  add("jumps", "jumps of U' from the lattice series")
      ->add_flag("--segments-only", o.segments_only, "read jumps off the segments; no stability needed");
  add("approx", "rational approximations of incommensurate delays")
      ->add_option("--orders", o.orders, "orders s, comma separated")
      ->delimiter(',');
  add("verify", "residual gates plus the integral oracle when stable")
      ->add_flag("--pointwise", o.pointwise, "include pointwise oracle errors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kFailure;
  }

  for (const auto& s : subs) {
    if (!s.app->parsed()) continue;
    o.tol_opt = s.tol;
    o.horizon_opt = s.horizon;
    o.order_opt = s.order;
    o.samples_opt = s.samples;
    o.w_opt = s.w;
    const std::string name = s.app->get_name();
    try {
      if (name == "check") return cmd_check(o, out, err);
      if (name == "k") return cmd_k(o, out, err);
      if (name == "sim") return cmd_sim(o, out, err);
      if (name == "lyap") return cmd_lyap(o, out, err);
      if (name == "jumps") return cmd_jumps(o, out, err);
      if (name == "approx") return cmd_approx(o, out, err);
      if (name == "verify") return cmd_verify(o, out, err);
    } catch (const Error& e) {
      err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
      return exit_code(e.code());
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kFailure;
    }
  }
  return kFailure;
}

}  // namespace ddlyap::cli
