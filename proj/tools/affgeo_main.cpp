// Command-line front end: configuration parsing, verification suites,
// symmetric-reduction solves, inequality reports, and catalog/schema dumps.
// Reports are versioned JSON and are byte-identical for identical
// configurations; timing goes to standard output only.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "affgeo/catalog.hpp"
#include "affgeo/inequality.hpp"
#include "affgeo/reilly.hpp"
#include "affgeo/solver.hpp"

using affgeo::AffineConnection;
using affgeo::ConnectionParams;
using affgeo::DomainAssembly;
using affgeo::DomainSpec;
using affgeo::Error;
using affgeo::Field;
using affgeo::ProblemBC;
using affgeo::RiemannianTriple;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kSchema = "affgeo-report/1";

struct RunConfig {
  std::string triple = "sphere-2";
  bool triple_set = false;
  std::string domain;
  double alpha = 0.0;
  double gamma = 0.0;
  bool gamma_set = false;
  std::string u = "0";
  bool u_set = false;
  std::string phi;
  std::string f;
  int order = 16;
  int nodes = -1;  // resolved per command
  double tol = -1.0;
  std::string out;
  std::string format = "json";
  std::string which;
  std::string bc;
  std::string poincare_case;
  std::string c = "auto";
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
};

struct SuiteResult {
  std::string subject;
  std::vector<CheckResult> checks;
  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckResult& c) { return c.passed; });
  }
};

double finite_or(double v, double fallback) {
  return std::isfinite(v) ? v : fallback;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file " + path);
  out << content;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

/// Emits the JSON report: to --out when given, otherwise to stdout.
void emit_report(const RunConfig& cfg, const ordered_json& j) {
  if (cfg.out.empty())
    std::cout << dump(j);
  else
    write_text(cfg.out, dump(j));
}

/// Normalized effective configuration, echoed into every report. The output
/// path and format are plumbing and deliberately left out.
ordered_json config_json(const RunConfig& cfg) {
  return ordered_json{{"triple", cfg.triple}, {"domain", cfg.domain},
                      {"alpha", cfg.alpha},   {"gamma", cfg.gamma},
                      {"u", cfg.u},           {"phi", cfg.phi},
                      {"f", cfg.f},           {"order", cfg.order},
                      {"nodes", cfg.nodes},   {"tol", cfg.tol}};
}

/// Chart resolution: --domain (compact or JSON) wins; --triple accepts a
/// chart catalog name, a domain name, or inline triple JSON.
RiemannianTriple resolve_triple(RunConfig& cfg, DomainSpec* domain_out) {
  if (!cfg.domain.empty()) {
    DomainSpec spec = cfg.domain.front() == '{'
                          ? DomainSpec::from_json(nlohmann::json::parse(cfg.domain))
                          : DomainSpec::parse(cfg.domain);
    cfg.domain = spec.to_string();
    if (domain_out != nullptr) *domain_out = spec;
    return domain_triple(spec, cfg.u);
  }
  if (!cfg.triple.empty() && cfg.triple.front() == '{') {
    RiemannianTriple T =
        affgeo::triple_from_json(nlohmann::json::parse(cfg.triple));
    if (cfg.u_set) T = with_weight(T, cfg.u);
    return T;
  }
  const std::vector<std::string> names = affgeo::catalog_triple_names();
  if (std::find(names.begin(), names.end(), cfg.triple) != names.end())
    return affgeo::catalog_triple(cfg.triple, cfg.u);
  DomainSpec spec = DomainSpec::parse(cfg.triple);
  if (domain_out != nullptr) *domain_out = spec;
  return domain_triple(spec, cfg.u);
}

DomainSpec resolve_domain_spec(RunConfig& cfg, const char* fallback) {
  if (cfg.domain.empty()) cfg.domain = cfg.triple_set ? cfg.triple : fallback;
  DomainSpec spec = cfg.domain.front() == '{'
                        ? DomainSpec::from_json(nlohmann::json::parse(cfg.domain))
                        : DomainSpec::parse(cfg.domain);
  cfg.domain = spec.to_string();
  return spec;
}

std::string default_phi(int dim) {
  std::string s = "exp(0.2*x1)*(1 + 0.5*sin(x2))";
  if (dim >= 3) s += "*(1 + 0.25*cos(x3))";
  return s;
}

/// Deterministic interior sample points: fixed-seed uniform draws kept 5%
/// away from the chart box edges.
std::vector<std::vector<double>> sample_points(const RiemannianTriple& T,
                                               int count) {
  std::mt19937_64 rng(20260821ULL);
  auto unit = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  std::vector<std::vector<double>> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    std::vector<double> p(static_cast<std::size_t>(T.dim));
    for (int i = 0; i < T.dim; ++i) {
      const double lo = T.box[static_cast<std::size_t>(i)][0];
      const double hi = T.box[static_cast<std::size_t>(i)][1];
      p[static_cast<std::size_t>(i)] = lo + (hi - lo) * (0.05 + 0.9 * unit());
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

ordered_json suite_json(const RunConfig& cfg, const SuiteResult& suite) {
  ordered_json checks = ordered_json::array();
  for (const CheckResult& c : suite.checks)
    checks.push_back(ordered_json{{"name", c.name},
                                  {"passed", c.passed},
                                  {"residual", c.residual},
                                  {"tolerance", c.tolerance}});
  return ordered_json{{"schema", kSchema},
                      {"kind", "verify"},
                      {"subject", suite.subject},
                      {"config", config_json(cfg)},
                      {"checks", checks},
                      {"passed", suite.all_passed()}};
}

int finish_suite(const RunConfig& cfg, const SuiteResult& suite,
                 double seconds) {
  for (const CheckResult& c : suite.checks)
    std::printf("[%s] %s  residual=%.3e  tol=%.1e\n",
                c.passed ? "PASS" : "FAIL", c.name.c_str(), c.residual,
                c.tolerance);
  std::printf("verify %s: %zu/%zu checks passed in %.2fs\n",
              suite.subject.c_str(),
              static_cast<std::size_t>(std::count_if(
                  suite.checks.begin(), suite.checks.end(),
                  [](const CheckResult& c) { return c.passed; })),
              suite.checks.size(), seconds);
  emit_report(cfg, suite_json(cfg, suite));
  return suite.all_passed() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const std::string& subject, RunConfig cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.format == "csv")
    throw Error("reports are JSON; csv applies to nodal solution dumps only");
  if (cfg.nodes < 0) cfg.nodes = 100;
  SuiteResult suite;
  suite.subject = subject;

  if (subject == "ricci") {
    if (cfg.tol < 0) cfg.tol = 1e-8;
    RiemannianTriple T = resolve_triple(cfg, nullptr);
    AffineConnection conn = AffineConnection::make(T, cfg.alpha, cfg.gamma);
    double res = 0.0, asym = 0.0;
    for (const auto& p : sample_points(T, cfg.nodes)) {
      Eigen::MatrixXd direct = ricci_D_direct_at(conn, p);
      Eigen::MatrixXd closed = ricci_D_closed_at(conn, p);
      const double scale = 1.0 + closed.cwiseAbs().maxCoeff();
      res = std::max(res, (direct - closed).cwiseAbs().maxCoeff() / scale);
      asym = std::max(
          asym,
          (direct - direct.transpose()).cwiseAbs().maxCoeff() / scale);
    }
    suite.checks.push_back(
        {"commutator_matches_closed_form", res <= cfg.tol, res, cfg.tol});
    suite.checks.push_back(
        {"commutator_ricci_symmetric", asym <= cfg.tol, asym, cfg.tol});
  } else if (subject == "reilly") {
    if (cfg.tol < 0) cfg.tol = 1e-6;
    DomainSpec spec = resolve_domain_spec(cfg, "ball3:1");
    RiemannianTriple T = domain_triple(spec, cfg.u);
    // Default test field: polynomial in the first chart coordinate, smooth on
    // every catalog domain (radial charts included).
    if (cfg.phi.empty()) cfg.phi = "0.5*x1^2*(1 + 0.2*x1)";
    AffineConnection conn = AffineConnection::make(T, cfg.alpha, cfg.gamma);
    DomainAssembly A = build_domain(T, spec, cfg.order);
    Field phi = Field::parse(cfg.phi, T.dim);
    affgeo::ReillyReport rep = verify_identity(conn, A, phi);
    suite.checks.push_back({"integral_identity",
                            rep.relative_residual <= cfg.tol,
                            rep.relative_residual, cfg.tol});
    const double flux = lhs_via_flux(conn, A, phi);
    const double flux_res =
        std::abs(flux - rep.lhs) / (1.0 + std::abs(rep.lhs));
    suite.checks.push_back(
        {"volume_side_flux_route", flux_res <= cfg.tol, flux_res, cfg.tol});
  } else if (subject == "bochner") {
    if (cfg.tol < 0) cfg.tol = 1e-8;
    RiemannianTriple T = resolve_triple(cfg, nullptr);
    if (cfg.phi.empty()) cfg.phi = default_phi(T.dim);
    AffineConnection conn = AffineConnection::make(T, cfg.alpha, cfg.gamma);
    Field phi = Field::parse(cfg.phi, T.dim);
    double res_flux = 0.0, res_tensor = 0.0;
    for (const auto& p : sample_points(T, cfg.nodes)) {
      affgeo::BochnerBreakdown b = bochner_breakdown_at(conn, phi, p);
      const double scale = 1.0 + std::abs(b.lhs);
      res_flux = std::max(res_flux, std::abs(b.lhs - b.rhs_commutator) / scale);
      res_tensor = std::max(
          res_tensor, std::abs(b.rhs_commutator - b.rhs_tensor) / scale);
    }
    suite.checks.push_back({"flux_divergence_matches_commutator",
                            res_flux <= cfg.tol, res_flux, cfg.tol});
    suite.checks.push_back({"commutator_matches_tensor_form",
                            res_tensor <= cfg.tol, res_tensor, cfg.tol});
  } else if (subject == "divergence") {
    if (cfg.tol < 0) cfg.tol = 1e-10;
    RiemannianTriple T = resolve_triple(cfg, nullptr);
    AffineConnection conn = AffineConnection::make(T, cfg.alpha, cfg.gamma);
    std::vector<Field> W;
    for (int i = 0; i < T.dim; ++i) {
      std::ostringstream src;
      src << "cos(x1 + " << 0.6 * i << ")*(1 + 0.25*sin(x2))";
      W.push_back(Field::parse(src.str(), T.dim));
    }
    double res = 0.0;
    for (const auto& p : sample_points(T, cfg.nodes))
      res = std::max(res, weighted_divergence_residual(conn, W, p));
    suite.checks.push_back(
        {"weighted_divergence_identity", res <= cfg.tol, res, cfg.tol});
  } else {  // conformal
    if (cfg.tol < 0) cfg.tol = 1e-10;
    if (cfg.gamma_set && cfg.gamma != -cfg.alpha)
      throw Error("the conformal check fixes gamma = -alpha");
    cfg.gamma = -cfg.alpha;
    RiemannianTriple T = resolve_triple(cfg, nullptr);
    AffineConnection conn = AffineConnection::make(T, cfg.alpha, -cfg.alpha);
    RiemannianTriple rescaled = conformally_rescaled(T, cfg.alpha);
    double res = 0.0;
    for (const auto& p : sample_points(T, cfg.nodes)) {
      affgeo::ConnectionCoeffs cc = connection_coeffs_at(conn, p);
      std::vector<Eigen::MatrixXd> gamma2 = christoffel_at(rescaled, p);
      for (int k = 0; k < T.dim; ++k)
        res = std::max(res, (cc.C[static_cast<std::size_t>(k)] -
                             gamma2[static_cast<std::size_t>(k)])
                                .cwiseAbs()
                                .maxCoeff());
    }
    suite.checks.push_back(
        {"matches_rescaled_metric_connection", res <= cfg.tol, res, cfg.tol});
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return finish_suite(cfg, suite, seconds);
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

std::string csv_path_for(const std::string& out) {
  const std::string suffix = ".json";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0)
    return out.substr(0, out.size() - suffix.size()) + ".csv";
  return out + ".csv";
}

ProblemBC parse_bc(const std::string& s) {
  if (s == "closed") return ProblemBC::Closed;
  if (s == "dirichlet") return ProblemBC::Dirichlet;
  if (s == "neumann") return ProblemBC::Neumann;
  throw Error("unknown boundary condition '" + s + "'");
}

int cmd_solve(const std::string& problem, RunConfig cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.nodes < 0) cfg.nodes = 2000;
  if (cfg.tol < 0) cfg.tol = 0.0;  // unused by solves
  if (cfg.f.empty()) cfg.f = "1";
  DomainSpec spec = resolve_domain_spec(cfg, "ball2:1");
  RiemannianTriple T = domain_triple(spec, cfg.u);
  ConnectionParams params = ConnectionParams::make(cfg.alpha, cfg.gamma, T.dim);
  affgeo::SturmLiouville line = reduce_symmetric(T, params, spec);
  affgeo::RadialOperator op = discretize(line, cfg.nodes);

  affgeo::RadialSolution sol;
  double lambda = 0.0, rayleigh = 0.0;
  bool eigenproblem = false;
  ProblemBC bc = ProblemBC::Dirichlet;
  if (problem == "dirichlet") {
    sol = solve_dirichlet(op, Field::parse(cfg.f, 1));
  } else if (problem == "neumann") {
    std::optional<double> c;
    if (cfg.c != "auto") {
      try {
        c = std::stod(cfg.c);
      } catch (const std::exception&) {
        throw Error("--c expects a number or 'auto'");
      }
    }
    sol = solve_neumann(op, Field::parse(cfg.f, 1), c);
    bc = ProblemBC::Neumann;
  } else if (problem == "source") {
    bc = cfg.bc.empty() ? (line.closed ? ProblemBC::Closed
                                       : ProblemBC::Dirichlet)
                        : parse_bc(cfg.bc);
    sol = solve_source(op, Field::parse(cfg.f, 1), bc);
  } else {  // eigen
    bc = !cfg.which.empty()
             ? parse_bc(cfg.which)
             : (cfg.bc.empty() ? (line.closed ? ProblemBC::Closed
                                              : ProblemBC::Dirichlet)
                               : parse_bc(cfg.bc));
    affgeo::EigenResult eig = solve_eigen(op, bc);
    sol = eig.mode;
    lambda = eig.lambda1;
    rayleigh = eig.rayleigh;
    eigenproblem = true;
  }

  double max_abs = 0.0;
  for (double v : sol.values) max_abs = std::max(max_abs, std::abs(v));

  bool wrote_csv = false;
  if (!cfg.out.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "s,value\n";
    for (std::size_t i = 0; i < sol.s.size(); ++i)
      csv << sol.s[i] << ',' << sol.values[i] << '\n';
    write_text(csv_path_for(cfg.out), csv.str());
    wrote_csv = true;
  }

  ordered_json j{{"schema", kSchema},
                 {"kind", "solve"},
                 {"problem", problem},
                 {"config", config_json(cfg)},
                 {"bc", std::string(to_string(sol.bc))},
                 {"interval", {line.a, line.b}},
                 {"axis", {line.axis_left, line.axis_right}},
                 {"closed", line.closed},
                 {"node_count", cfg.nodes},
                 {"lambda", eigenproblem ? ordered_json(lambda)
                                         : ordered_json(nullptr)},
                 {"rayleigh", eigenproblem ? ordered_json(rayleigh)
                                           : ordered_json(nullptr)},
                 {"c", problem == "neumann" ? ordered_json(sol.c)
                                            : ordered_json(nullptr)},
                 {"max_abs_value", max_abs},
                 {"nodal_dump", wrote_csv}};
  if (cfg.format != "csv") emit_report(cfg, j);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::printf("solve %s (%s) on %s: %d nodes", problem.c_str(),
              std::string(to_string(sol.bc)).c_str(), cfg.domain.c_str(),
              cfg.nodes);
  if (eigenproblem) std::printf(", lambda1 = %.12g", lambda);
  if (problem == "neumann") std::printf(", c = %.12g", sol.c);
  std::printf(" (%.2fs)\n", seconds);
  return 0;
}

// ---------------------------------------------------------------------------
// check-inequality
// ---------------------------------------------------------------------------

ordered_json certificate_json(const affgeo::CurvatureCertificate& c) {
  ordered_json worst = ordered_json::array();
  for (double x : c.worst_point) worst.push_back(x);
  return ordered_json{{"condition", std::string(to_string(c.condition))},
                      {"min_margin", finite_or(c.min_margin, 0.0)},
                      {"vacuous", c.samples == 0},
                      {"samples", c.samples},
                      {"strict", c.strict},
                      {"passed", c.passed},
                      {"worst_point", worst}};
}

int cmd_inequality(RunConfig cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.format == "csv")
    throw Error("reports are JSON; csv applies to nodal solution dumps only");
  if (cfg.tol < 0) cfg.tol = 1e-6;
  if (cfg.nodes < 0) cfg.nodes = 2000;
  DomainSpec spec = resolve_domain_spec(cfg, "ball3:1");
  RiemannianTriple T = domain_triple(spec, cfg.u);
  AffineConnection conn = AffineConnection::make(T, cfg.alpha, cfg.gamma);
  DomainAssembly A = build_domain(T, spec, cfg.order);

  affgeo::InequalityReport rep;
  if (cfg.which == "hk") {
    rep = heintze_karcher(conn, A, cfg.tol);
  } else if (cfg.which == "minkowski") {
    rep = minkowski(conn, A, cfg.tol);
  } else if (cfg.which == "lichnerowicz") {
    ProblemBC bc = cfg.bc.empty()
                       ? (A.closed ? ProblemBC::Closed : ProblemBC::Dirichlet)
                       : parse_bc(cfg.bc);
    rep = lichnerowicz(conn, A, bc, cfg.nodes, cfg.tol);
  } else {  // poincare
    if (cfg.f.empty()) throw Error("poincare needs --f <expression>");
    affgeo::PoincareCase which = affgeo::PoincareCase::Closed;
    std::string c = cfg.poincare_case;
    if (c.empty()) c = A.closed ? "i" : "iii";
    if (c == "i")
      which = affgeo::PoincareCase::Closed;
    else if (c == "ii")
      which = affgeo::PoincareCase::ZeroBoundary;
    else if (c == "iii")
      which = affgeo::PoincareCase::ZeroMean;
    else
      throw Error("--case expects i, ii, or iii");
    rep = poincare(conn, A, Field::parse(cfg.f, T.dim), which, cfg.tol);
  }

  ordered_json certs = ordered_json::array();
  for (const auto& c : rep.certificates) certs.push_back(certificate_json(c));
  ordered_json j{{"schema", kSchema},
                 {"kind", "inequality"},
                 {"name", rep.name},
                 {"config", config_json(cfg)},
                 {"hypotheses_met", rep.hypotheses_met},
                 {"lhs", rep.lhs},
                 {"rhs", rep.rhs},
                 {"slack", rep.slack},
                 {"relative_slack", rep.relative_slack},
                 {"equality", rep.equality},
                 {"equality_tol", rep.equality_tol},
                 {"umbilicity_max", rep.umbilicity_max},
                 {"certificates", certs},
                 {"note", rep.note}};
  emit_report(cfg, j);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const bool holds = rep.hypotheses_met && (rep.slack >= 0.0 || rep.equality);
  if (!rep.hypotheses_met)
    std::printf("[UNMET] %s on %s: hypotheses not met (%.2fs)\n",
                rep.name.c_str(), cfg.domain.c_str(), seconds);
  else
    std::printf("[%s] %s on %s: lhs=%.10g rhs=%.10g slack=%.3e%s (%.2fs)\n",
                holds ? "PASS" : "FAIL", rep.name.c_str(), cfg.domain.c_str(),
                rep.lhs, rep.rhs, rep.slack,
                rep.equality ? " (equality)" : "", seconds);
  return holds ? 0 : 1;
}

// ---------------------------------------------------------------------------
// catalog / report-schema
// ---------------------------------------------------------------------------

int cmd_catalog(const RunConfig& cfg) {
  ordered_json domains = ordered_json::array();
  for (const std::string& n : affgeo::catalog_domain_names())
    domains.push_back(n);
  ordered_json examples = ordered_json::array();
  for (const DomainSpec& s : affgeo::catalog_domain_specs())
    examples.push_back(s.to_string());
  ordered_json triples = ordered_json::array();
  for (const std::string& n : affgeo::catalog_triple_names())
    triples.push_back(n);
  ordered_json j{{"schema", kSchema},
                 {"kind", "catalog"},
                 {"triples", triples},
                 {"domains", domains},
                 {"domain_examples", examples}};
  emit_report(cfg, j);
  if (!cfg.out.empty()) std::cout << dump(j);
  return 0;
}

int cmd_report_schema(const RunConfig& cfg) {
  static const char* kSchemaDoc = R"json({
  "schema": "affgeo-report/1",
  "kind": "report_schema",
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "affgeo report",
  "oneOf": [
    {"$ref": "#/$defs/verify"},
    {"$ref": "#/$defs/solve"},
    {"$ref": "#/$defs/inequality"},
    {"$ref": "#/$defs/catalog"}
  ],
  "$defs": {
    "config": {
      "type": "object",
      "properties": {
        "triple": {"type": "string"},
        "domain": {"type": "string"},
        "alpha": {"type": "number"},
        "gamma": {"type": "number"},
        "u": {"type": "string"},
        "phi": {"type": "string"},
        "f": {"type": "string"},
        "order": {"type": "integer"},
        "nodes": {"type": "integer"},
        "tol": {"type": "number"}
      },
      "required": ["triple", "domain", "alpha", "gamma", "u", "order"]
    },
    "check": {
      "type": "object",
      "properties": {
        "name": {"type": "string"},
        "passed": {"type": "boolean"},
        "residual": {"type": "number"},
        "tolerance": {"type": "number"}
      },
      "required": ["name", "passed", "residual", "tolerance"]
    },
    "certificate": {
      "type": "object",
      "properties": {
        "condition": {"type": "string"},
        "min_margin": {"type": "number"},
        "vacuous": {"type": "boolean"},
        "samples": {"type": "integer"},
        "strict": {"type": "boolean"},
        "passed": {"type": "boolean"},
        "worst_point": {"type": "array", "items": {"type": "number"}}
      },
      "required": ["condition", "min_margin", "samples", "passed"]
    },
    "verify": {
      "type": "object",
      "properties": {
        "schema": {"const": "affgeo-report/1"},
        "kind": {"const": "verify"},
        "subject": {"enum": ["ricci", "reilly", "bochner", "divergence", "conformal"]},
        "config": {"$ref": "#/$defs/config"},
        "checks": {"type": "array", "items": {"$ref": "#/$defs/check"}},
        "passed": {"type": "boolean"}
      },
      "required": ["schema", "kind", "subject", "config", "checks", "passed"]
    },
    "solve": {
      "type": "object",
      "properties": {
        "schema": {"const": "affgeo-report/1"},
        "kind": {"const": "solve"},
        "problem": {"enum": ["dirichlet", "neumann", "source", "eigen"]},
        "config": {"$ref": "#/$defs/config"},
        "bc": {"enum": ["closed", "dirichlet", "neumann"]},
        "interval": {"type": "array", "items": {"type": "number"}},
        "axis": {"type": "array", "items": {"type": "boolean"}},
        "closed": {"type": "boolean"},
        "node_count": {"type": "integer"},
        "lambda": {"type": ["number", "null"]},
        "rayleigh": {"type": ["number", "null"]},
        "c": {"type": ["number", "null"]},
        "max_abs_value": {"type": "number"},
        "nodal_dump": {"type": "boolean"}
      },
      "required": ["schema", "kind", "problem", "config", "bc", "node_count"]
    },
    "inequality": {
      "type": "object",
      "properties": {
        "schema": {"const": "affgeo-report/1"},
        "kind": {"const": "inequality"},
        "name": {"enum": ["heintze_karcher", "minkowski", "lichnerowicz", "poincare"]},
        "config": {"$ref": "#/$defs/config"},
        "hypotheses_met": {"type": "boolean"},
        "lhs": {"type": "number"},
        "rhs": {"type": "number"},
        "slack": {"type": "number"},
        "relative_slack": {"type": "number"},
        "equality": {"type": "boolean"},
        "equality_tol": {"type": "number"},
        "umbilicity_max": {"type": "number"},
        "certificates": {"type": "array", "items": {"$ref": "#/$defs/certificate"}},
        "note": {"type": "string"}
      },
      "required": ["schema", "kind", "name", "config", "hypotheses_met",
                   "lhs", "rhs", "slack", "equality", "certificates"]
    },
    "catalog": {
      "type": "object",
      "properties": {
        "schema": {"const": "affgeo-report/1"},
        "kind": {"const": "catalog"},
        "triples": {"type": "array", "items": {"type": "string"}},
        "domains": {"type": "array", "items": {"type": "string"}},
        "domain_examples": {"type": "array", "items": {"type": "string"}}
      },
      "required": ["schema", "kind", "triples", "domains"]
    }
  }
})json";
  ordered_json j = ordered_json::parse(kSchemaDoc);
  emit_report(cfg, j);
  if (!cfg.out.empty()) std::cout << dump(j);
  return 0;
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--alpha", cfg.alpha, "first connection parameter");
  cmd->add_option("--gamma", cfg.gamma, "second connection parameter")
      ->each([&cfg](const std::string&) { cfg.gamma_set = true; });
  cmd->add_option("--triple", cfg.triple,
                  "chart catalog name, domain name, or inline triple JSON")
      ->each([&cfg](const std::string&) { cfg.triple_set = true; });
  cmd->add_option("--domain", cfg.domain,
                  "domain spec, e.g. ball3:1 or ellipsoid:1.5,1,1");
  cmd->add_option("--u", cfg.u, "weight exponent expression (V = e^u)")
      ->each([&cfg](const std::string&) { cfg.u_set = true; });
  cmd->add_option("--phi", cfg.phi, "scalar field expression");
  cmd->add_option("--f", cfg.f, "right-hand side / trial expression");
  cmd->add_option("--order", cfg.order, "quadrature order per dimension");
  cmd->add_option("--nodes", cfg.nodes,
                  "grid nodes for solves / sample points for verify");
  cmd->add_option("--tol", cfg.tol, "check tolerance / equality tolerance");
  cmd->add_option("--out", cfg.out, "write the JSON report to this path");
  cmd->add_option("--format", cfg.format, "json (reports) or csv (nodal dump only)")
      ->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted-geometry toolkit: two-parameter connection checks, "
               "symmetric-reduction solves, and integral inequality reports"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string subject, problem;

  CLI::App* verify = app.add_subcommand(
      "verify", "run a named identity-verification suite");
  verify->add_option("subject", subject, "ricci|reilly|bochner|divergence|conformal")
      ->required()
      ->check(CLI::IsMember({"ricci", "reilly", "bochner", "divergence",
                             "conformal"}));
  add_common_flags(verify, cfg);

  CLI::App* solve = app.add_subcommand(
      "solve", "solve the reduced one-dimensional problem on a symmetric domain");
  solve->add_option("--problem", problem, "dirichlet|neumann|source|eigen")
      ->required()
      ->check(CLI::IsMember({"dirichlet", "neumann", "source", "eigen"}));
  solve->add_option("--which", cfg.which,
                    "boundary condition for eigen solves: closed|dirichlet|neumann");
  solve->add_option("--bc", cfg.bc, "boundary condition for source solves");
  solve->add_option("--c", cfg.c, "Neumann boundary constant or 'auto'");
  add_common_flags(solve, cfg);

  CLI::App* ineq = app.add_subcommand("check-inequality",
                                      "evaluate an integral inequality");
  ineq->add_option("--which", cfg.which, "hk|minkowski|lichnerowicz|poincare")
      ->required()
      ->check(CLI::IsMember({"hk", "minkowski", "lichnerowicz", "poincare"}));
  ineq->add_option("--bc", cfg.bc,
                   "boundary condition for the spectral bound");
  ineq->add_option("--case", cfg.poincare_case,
                   "side condition for poincare: i|ii|iii");
  add_common_flags(ineq, cfg);

  CLI::App* cat = app.add_subcommand("catalog", "list built-in charts and domains");
  cat->add_option("--out", cfg.out, "also write the listing to this path");

  CLI::App* schema = app.add_subcommand("report-schema",
                                        "print the JSON schema of all reports");
  schema->add_option("--out", cfg.out, "also write the schema to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) return cmd_verify(subject, cfg);
    if (solve->parsed()) return cmd_solve(problem, cfg);
    if (ineq->parsed()) return cmd_inequality(cfg);
    if (cat->parsed()) return cmd_catalog(cfg);
    if (schema->parsed()) return cmd_report_schema(cfg);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
