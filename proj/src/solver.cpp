#include "affgeo/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <tuple>

namespace affgeo {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool symmetric_domain_name(const std::string& name) {
  static const std::array<std::string_view, 9> names = {
      "ball2",   "ball3",       "annulus2",   "cap",     "band",
      "sphere2", "hyperbolic2", "warpedband", "interval"};
  return std::find(names.begin(), names.end(), name) != names.end();
}

double metric_det(const RiemannianTriple& T, std::span<const double> p) {
  const int n = T.dim;
  if (n == 1) return T.g[0][0].eval(p);
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = T.g[i][j].eval(p);
  return G.determinant();
}

/// Gauss-Legendre integral of f over [a, b]; the integrands here are smooth,
/// so a single high-order panel is converged to rounding.
double line_integral(double a, double b,
                     const std::function<double(double)>& f, int order = 64) {
  const QuadRule& rule = gauss_legendre(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  std::vector<double> terms(rule.nodes.size());
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    terms[k] = half * rule.weights[k] * f(mid + half * rule.nodes[k]);
  return pairwise_sum(terms);
}

/// Solves the SPD tridiagonal system (diagonal d, superdiagonal e) in place.
std::vector<double> thomas(std::vector<double> d, std::vector<double> e,
                           std::vector<double> rhs) {
  const int n = static_cast<int>(d.size());
  for (int k = 1; k < n; ++k) {
    double m = e[k - 1] / d[k - 1];
    d[k] -= m * e[k - 1];
    rhs[k] -= m * rhs[k - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / d[n - 1];
  for (int k = n - 2; k >= 0; --k) x[k] = (rhs[k] - e[k] * x[k + 1]) / d[k];
  return x;
}

/// Flux form restricted to the contiguous node range [lo, hi]; faces to
/// eliminated neighbors stay in the diagonal (their nodes hold zero values).
void flux_tridiagonal(const RadialOperator& op, int lo, int hi,
                      std::vector<double>& d, std::vector<double>& e) {
  const int m = hi - lo + 1;
  d.assign(m, 0.0);
  e.assign(m > 0 ? m - 1 : 0, 0.0);
  for (int i = lo; i <= hi; ++i) {
    double acc = 0.0;
    if (i > 0) acc += op.w_half[i - 1];
    if (i < op.nodes - 1) acc += op.w_half[i];
    d[i - lo] = acc / op.h;
  }
  for (int k = 0; k + 1 < m; ++k) e[k] = -op.w_half[lo + k] / op.h;
}

/// Solves K x = b on [lo, hi] with zeros outside; b is full length.
std::vector<double> solve_range(const RadialOperator& op, int lo, int hi,
                                std::span<const double> b) {
  std::vector<double> d, e;
  flux_tridiagonal(op, lo, hi, d, e);
  std::vector<double> rhs(b.begin() + lo, b.begin() + hi + 1);
  std::vector<double> sub = thomas(std::move(d), std::move(e), std::move(rhs));
  std::vector<double> x(op.nodes, 0.0);
  std::copy(sub.begin(), sub.end(), x.begin() + lo);
  return x;
}

void project_constant(const RadialOperator& op, std::vector<double>& v) {
  std::vector<double> ones(op.nodes, 1.0);
  double num = op.mass_inner(v, ones);
  double den = op.mass_inner(ones, ones);
  double shift = num / den;
  for (double& x : v) x -= shift;
}

void normalize_mass(const RadialOperator& op, std::vector<double>& v) {
  double nrm = std::sqrt(op.mass_form(v));
  if (!(nrm > 0)) throw EvalError("degenerate vector in eigen iteration");
  for (double& x : v) x /= nrm;
}

/// Which node range stays unknown under zero boundary values on the regular
/// ends (axis ends keep their natural condition and stay unknown).
std::pair<int, int> dirichlet_range(const RadialOperator& op) {
  if (op.line.closed)
    throw Error("closed geometry has no boundary for a Dirichlet condition");
  int lo = op.line.axis_left ? 0 : 1;
  int hi = op.line.axis_right ? op.nodes - 1 : op.nodes - 2;
  if (lo > hi) throw Error("too few nodes for a Dirichlet solve");
  return {lo, hi};
}

void require_radial_field(const Field& f) {
  if (!f.valid() || f.dim() != 1)
    throw Error("radial data must be a field of the single coordinate x1");
}

/// e^{(tau - alpha) u(e)} omega(e), the weighted boundary measure carried by
/// a regular end (transverse constant included, consistently with w and m).
double end_weight(const SturmLiouville& line, double s) {
  const ConnectionParams& P = line.params;
  return std::exp((P.tau - P.alpha) * line.u_at(s)) * line.profile_at(s);
}

struct NeumannData {
  double sum_beta = 0.0;     // total weighted boundary measure
  double source_int = 0.0;   // integral of rhs against m
};

NeumannData neumann_data(const RadialOperator& op, const Field& rhs) {
  const SturmLiouville& L = op.line;
  NeumannData nd;
  if (!L.axis_left) nd.sum_beta += end_weight(L, L.a);
  if (!L.axis_right) nd.sum_beta += end_weight(L, L.b);
  nd.source_int = line_integral(L.a, L.b, [&](double s) {
    double sv[1] = {s};
    return rhs.eval(sv) * L.m_at(s);
  });
  return nd;
}

RadialSolution make_solution(const RadialOperator& op, std::vector<double> v,
                             ProblemBC bc) {
  RadialSolution sol;
  sol.s = op.s;
  sol.values = std::move(v);
  sol.bc = bc;
  return sol;
}

/// Shared path for singular (closed / Neumann) solves: project the load onto
/// the range, pin one node, back-substitute, gauge to zero V^tau-mean.
std::vector<double> solve_singular(const RadialOperator& op,
                                   std::vector<double> b) {
  double sum_b = pairwise_sum(b);
  double sum_m = pairwise_sum(op.mass);
  for (int i = 0; i < op.nodes; ++i) b[i] -= sum_b * op.mass[i] / sum_m;
  std::vector<double> x = solve_range(op, 1, op.nodes - 1, b);
  project_constant(op, x);
  return x;
}

}  // namespace

std::string_view to_string(ProblemBC bc) {
  switch (bc) {
    case ProblemBC::Closed: return "closed";
    case ProblemBC::Dirichlet: return "dirichlet";
    case ProblemBC::Neumann: return "neumann";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// SturmLiouville
// ---------------------------------------------------------------------------

std::vector<double> SturmLiouville::ambient_point(double s) const {
  std::vector<double> p;
  p.reserve(1 + transverse.size());
  p.push_back(s);
  p.insert(p.end(), transverse.begin(), transverse.end());
  return p;
}

double SturmLiouville::profile_at(double s) const {
  double det = metric_det(triple, ambient_point(s));
  return det > 0 ? std::sqrt(det) : 0.0;
}

double SturmLiouville::u_at(double s) const {
  return triple.u.eval(ambient_point(s));
}

double SturmLiouville::w_at(double s) const {
  return std::exp((params.tau + params.gamma - params.alpha) * u_at(s)) *
         profile_at(s);
}

double SturmLiouville::m_at(double s) const {
  return std::exp(params.tau * u_at(s)) * profile_at(s);
}

SturmLiouville reduce_symmetric(const RiemannianTriple& T,
                                const ConnectionParams& params,
                                const DomainSpec& spec) {
  if (!symmetric_domain_name(spec.name))
    throw Error("domain '" + spec.name +
                "' is not rotationally symmetric about its first coordinate");
  if (params.dim != T.dim)
    throw Error("connection parameters were built for a different dimension");

  RiemannianTriple canon = domain_triple(spec);
  if (canon.dim != T.dim)
    throw Error("triple dimension does not match the domain");
  for (int a = 0; a < T.dim; ++a) {
    double span = T.box[a][1] - T.box[a][0];
    if (canon.box[a][0] < T.box[a][0] - 1e-9 * span ||
        canon.box[a][1] > T.box[a][1] + 1e-9 * span)
      throw Error("domain region lies outside the chart box");
  }

  SturmLiouville L;
  L.triple = T;
  L.spec = spec;
  L.params = params;
  L.a = canon.box[0][0];
  L.b = canon.box[0][1];
  for (int k = 1; k < T.dim; ++k)
    L.transverse.push_back(0.5 * (canon.box[k][0] + canon.box[k][1]));

  // Symmetry audit on a sample grid: radial coefficient 1, radial direction
  // orthogonal to the slices, weight independent of the slices, and slice
  // volume separable (so the transverse factor cancels from w and m).
  const double sfrac[] = {0.12, 0.31, 0.50, 0.77, 0.93};
  const double tfrac[] = {0.20, 0.60, 0.85};
  std::vector<std::vector<double>> ratio_ref;
  bool have_ref = false;
  for (double sf : sfrac) {
    const double s = L.a + sf * (L.b - L.a);
    std::vector<double> p0 = L.ambient_point(s);
    double u0 = T.u.eval(p0);
    double det0 = metric_det(T, p0);
    if (!(det0 > 0))
      throw Error("metric is not positive on the symmetry sample grid");
    auto check_point = [&](std::span<const double> p) {
      if (std::abs(T.g[0][0].eval(p) - 1.0) > 1e-10)
        throw Error("radial metric coefficient is not 1; "
                    "configuration is not in reduced form");
      for (int j = 1; j < T.dim; ++j)
        if (std::abs(T.g[0][j].eval(p)) >
            1e-10 * (1 + std::abs(T.g[j][j].eval(p))))
          throw Error("radial direction is not orthogonal to the slices");
    };
    check_point(p0);
    std::vector<std::vector<double>> ratios(T.dim - 1);
    for (int k = 1; k < T.dim; ++k) {
      for (double tf : tfrac) {
        std::vector<double> p = p0;
        p[k] = canon.box[k][0] + tf * (canon.box[k][1] - canon.box[k][0]);
        check_point(p);
        if (std::abs(T.u.eval(p) - u0) > 1e-10 * (1 + std::abs(u0)))
          throw Error("weight exponent varies along the transverse slices; "
                      "configuration is not rotationally symmetric");
        double det = metric_det(T, p);
        if (!(det > 0))
          throw Error("metric is not positive on the symmetry sample grid");
        ratios[k - 1].push_back(det / det0);
      }
    }
    if (!have_ref) {
      ratio_ref = ratios;
      have_ref = true;
    } else {
      for (int k = 0; k + 1 < T.dim; ++k)
        for (std::size_t t = 0; t < ratios[k].size(); ++t)
          if (std::abs(ratios[k][t] - ratio_ref[k][t]) >
              1e-8 * (1 + std::abs(ratio_ref[k][t])))
            throw Error("slice volume does not factor from the radial "
                        "profile; configuration is not rotationally "
                        "symmetric");
    }
  }

  double mid_profile = L.profile_at(0.5 * (L.a + L.b));
  if (!(mid_profile > 0))
    throw Error("volume profile vanishes inside the domain");
  L.axis_left = L.profile_at(L.a) <= 1e-8 * (1 + mid_profile);
  L.axis_right = L.profile_at(L.b) <= 1e-8 * (1 + mid_profile);
  L.closed = L.axis_left && L.axis_right;
  return L;
}

// ---------------------------------------------------------------------------
// RadialOperator
// ---------------------------------------------------------------------------

RadialOperator discretize(const SturmLiouville& line, int nodes) {
  if (nodes < 8) throw Error("discretization needs at least 8 nodes");
  RadialOperator op;
  op.line = line;
  op.nodes = nodes;
  op.h = (line.b - line.a) / (nodes - 1);
  op.s.resize(nodes);
  for (int i = 0; i < nodes; ++i) op.s[i] = line.a + i * op.h;
  op.s[nodes - 1] = line.b;

  op.w_half.resize(nodes - 1);
  for (int i = 0; i + 1 < nodes; ++i)
    op.w_half[i] = line.w_at(op.s[i] + 0.5 * op.h);

  // Midpoint cell masses; the half-cells at the ends are sampled at their own
  // midpoints, which keeps linear densities exactly integrated and never
  // touches an axis.
  op.mass.resize(nodes);
  op.m_node.resize(nodes);
  for (int i = 0; i < nodes; ++i) op.m_node[i] = line.m_at(op.s[i]);
  for (int i = 1; i + 1 < nodes; ++i) op.mass[i] = op.h * op.m_node[i];
  op.mass[0] = 0.5 * op.h * line.m_at(line.a + 0.25 * op.h);
  op.mass[nodes - 1] = 0.5 * op.h * line.m_at(line.b - 0.25 * op.h);
  return op;
}

void RadialOperator::apply_flux(std::span<const double> f,
                                std::span<double> out) const {
  if (static_cast<int>(f.size()) != nodes ||
      static_cast<int>(out.size()) != nodes)
    throw Error("vector length does not match the discretization");
  for (int i = 0; i < nodes; ++i) {
    double acc = 0.0;
    if (i > 0) acc += w_half[i - 1] * (f[i] - f[i - 1]);
    if (i < nodes - 1) acc += w_half[i] * (f[i] - f[i + 1]);
    out[i] = acc / h;
  }
}

void RadialOperator::apply(std::span<const double> f,
                           std::span<double> out) const {
  apply_flux(f, out);
  for (int i = 0; i < nodes; ++i) out[i] /= mass[i];
}

double RadialOperator::energy(std::span<const double> f) const {
  std::vector<double> terms(nodes - 1);
  for (int i = 0; i + 1 < nodes; ++i) {
    double d = f[i + 1] - f[i];
    terms[i] = w_half[i] * d * d / h;
  }
  return pairwise_sum(terms);
}

double RadialOperator::mass_form(std::span<const double> f) const {
  return mass_inner(f, f);
}

double RadialOperator::mass_inner(std::span<const double> f,
                                  std::span<const double> g) const {
  std::vector<double> terms(nodes);
  for (int i = 0; i < nodes; ++i) terms[i] = mass[i] * f[i] * g[i];
  return pairwise_sum(terms);
}

double RadialSolution::value_at(double x) const {
  if (s.size() < 2) throw EvalError("solution has no nodes");
  const double a = s.front(), b = s.back();
  const double h = (b - a) / (static_cast<double>(s.size()) - 1);
  double t = std::clamp(x, a, b);
  int i = std::min(static_cast<int>((t - a) / h),
                   static_cast<int>(s.size()) - 2);
  double frac = (t - s[i]) / (s[i + 1] - s[i]);
  return values[i] + frac * (values[i + 1] - values[i]);
}

// ---------------------------------------------------------------------------
// Solves
// ---------------------------------------------------------------------------

RadialSolution solve_dirichlet(const RadialOperator& op, const Field& rhs) {
  require_radial_field(rhs);
  auto [lo, hi] = dirichlet_range(op);
  std::vector<double> b(op.nodes, 0.0);
  for (int i = lo; i <= hi; ++i) {
    double sv[1] = {op.s[i]};
    b[i] = -op.mass[i] * rhs.eval(sv);
  }
  RadialSolution sol =
      make_solution(op, solve_range(op, lo, hi, b), ProblemBC::Dirichlet);
  return sol;
}

RadialSolution solve_neumann(const RadialOperator& op, const Field& rhs,
                             std::optional<double> c) {
  require_radial_field(rhs);
  const SturmLiouville& L = op.line;
  if (L.closed)
    throw Error("closed geometry has no boundary for a Neumann condition");

  NeumannData nd = neumann_data(op, rhs);
  double cval;
  if (c) {
    cval = *c;
    double lhs = nd.source_int, rhs_c = cval * nd.sum_beta;
    if (std::abs(lhs - rhs_c) > 1e-8 * (1 + std::abs(lhs) + std::abs(rhs_c)))
      throw Error("Neumann data is incompatible with the source");
  } else {
    cval = nd.source_int / nd.sum_beta;
  }

  std::vector<double> b(op.nodes);
  for (int i = 0; i < op.nodes; ++i) {
    double sv[1] = {op.s[i]};
    b[i] = -op.mass[i] * rhs.eval(sv);
  }
  if (!L.axis_left) b[0] += cval * end_weight(L, L.a);
  if (!L.axis_right) b[op.nodes - 1] += cval * end_weight(L, L.b);

  RadialSolution sol =
      make_solution(op, solve_singular(op, std::move(b)), ProblemBC::Neumann);
  sol.c = cval;
  return sol;
}

RadialSolution solve_source(const RadialOperator& op, const Field& f,
                            ProblemBC bc) {
  require_radial_field(f);
  std::vector<double> nodal(op.nodes);
  for (int i = 0; i < op.nodes; ++i) {
    double sv[1] = {op.s[i]};
    nodal[i] = f.eval(sv);
  }
  return solve_source(op, nodal, bc);
}

RadialSolution solve_source(const RadialOperator& op,
                            std::span<const double> f, ProblemBC bc) {
  if (static_cast<int>(f.size()) != op.nodes)
    throw Error("vector length does not match the discretization");
  const SturmLiouville& L = op.line;
  if (bc == ProblemBC::Closed && !L.closed)
    throw Error("geometry has a boundary; closed solve is not applicable");
  if (bc != ProblemBC::Closed && L.closed)
    throw Error("closed geometry supports only the closed solve");

  if (bc == ProblemBC::Dirichlet) {
    auto [lo, hi] = dirichlet_range(op);
    std::vector<double> b(op.nodes, 0.0);
    for (int i = lo; i <= hi; ++i) b[i] = -op.mass[i] * f[i];
    return make_solution(op, solve_range(op, lo, hi, b), bc);
  }

  // Closed / zero-flux Neumann: the source must have zero weighted integral.
  std::vector<double> b(op.nodes);
  for (int i = 0; i < op.nodes; ++i) b[i] = -op.mass[i] * f[i];
  double total = -pairwise_sum(b);
  std::vector<double> scale_terms(op.nodes);
  for (int i = 0; i < op.nodes; ++i)
    scale_terms[i] = op.mass[i] * std::abs(f[i]);
  if (std::abs(total) > 1e-8 * (1 + pairwise_sum(scale_terms)))
    throw Error("source must have zero weighted integral for a " +
                std::string(to_string(bc)) + " solve");
  return make_solution(op, solve_singular(op, std::move(b)), bc);
}

EigenResult solve_eigen(const RadialOperator& op, ProblemBC bc) {
  const SturmLiouville& L = op.line;
  if (bc == ProblemBC::Closed && !L.closed)
    throw Error("geometry has a boundary; closed solve is not applicable");
  if (bc != ProblemBC::Closed && L.closed)
    throw Error("closed geometry supports only the closed solve");
  if (bc == ProblemBC::Neumann && L.closed)
    throw Error("closed geometry supports only the closed solve");

  const int n = op.nodes;
  const bool deflate = bc != ProblemBC::Dirichlet;
  int lo = 0, hi = n - 1;
  if (bc == ProblemBC::Dirichlet) std::tie(lo, hi) = dirichlet_range(op);

  std::vector<double> v(n, 0.0);
  for (int i = lo; i <= hi; ++i) {
    double t = (op.s[i] - L.a) / (L.b - L.a);
    v[i] = deflate ? std::cos(kPi * t) + 0.1 * std::sin(2.3 * t + 0.5)
                   : std::sin(kPi * t) + 0.05 * std::sin(2.2 * t + 0.3);
  }
  if (deflate) project_constant(op, v);
  normalize_mass(op, v);

  std::vector<double> b(n);
  for (int it = 0; it < 1000; ++it) {
    for (int i = 0; i < n; ++i) b[i] = op.mass[i] * v[i];
    std::vector<double> x;
    if (deflate) {
      x = solve_range(op, 1, n - 1, b);
      project_constant(op, x);
    } else {
      for (int i = 0; i < lo; ++i) b[i] = 0.0;
      for (int i = hi + 1; i < n; ++i) b[i] = 0.0;
      x = solve_range(op, lo, hi, b);
    }
    normalize_mass(op, x);
    // Stop on the vector, not the Rayleigh quotient: the quotient converges
    // quadratically in the eigenvector error and would stop too early.
    std::vector<double> dterms(n);
    for (int i = 0; i < n; ++i) {
      double d = x[i] - v[i];
      dterms[i] = op.mass[i] * d * d;
    }
    double change = std::sqrt(pairwise_sum(dterms));
    v = std::move(x);
    if (change <= 1e-11) break;
  }

  int arg = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  if (v[arg] < 0)
    for (double& x : v) x = -x;

  EigenResult res;
  res.bc = bc;
  res.lambda1 = op.energy(v) / op.mass_form(v);
  res.rayleigh = res.lambda1;
  res.mode = make_solution(op, std::move(v), bc);
  res.mode.lambda = res.lambda1;
  res.mode.rayleigh = res.lambda1;
  return res;
}

double rayleigh_quotient(const RadialOperator& op, std::span<const double> f,
                         ProblemBC bc) {
  if (static_cast<int>(f.size()) != op.nodes)
    throw Error("vector length does not match the discretization");
  std::vector<double> v(f.begin(), f.end());
  if (bc == ProblemBC::Dirichlet) {
    auto [lo, hi] = dirichlet_range(op);
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    for (int i = 0; i < lo; ++i)
      if (std::abs(v[i]) > 1e-12 * (1 + scale))
        throw Error("Dirichlet trial must vanish on the boundary");
    for (int i = hi + 1; i < op.nodes; ++i)
      if (std::abs(v[i]) > 1e-12 * (1 + scale))
        throw Error("Dirichlet trial must vanish on the boundary");
  } else {
    if (bc == ProblemBC::Closed && !op.line.closed)
      throw Error("geometry has a boundary; closed quotient is not applicable");
    project_constant(op, v);
  }
  double m = op.mass_form(v);
  if (!(m > 0)) throw EvalError("trial function has zero weighted norm");
  return op.energy(v) / m;
}

Field nodal_interpolant(const RadialOperator& op,
                        std::span<const double> values, int center,
                        int ambient_dim) {
  if (static_cast<int>(values.size()) != op.nodes)
    throw Error("vector length does not match the discretization");
  if (op.nodes < 5) throw Error("interpolant needs at least 5 nodes");
  if (ambient_dim < 1) throw Error("ambient dimension must be positive");
  int lo = std::clamp(center - 2, 0, op.nodes - 5);
  const double pivot = op.s[std::clamp(center, 0, op.nodes - 1)];

  Eigen::MatrixXd A(5, 5);
  Eigen::VectorXd rhs(5);
  for (int r = 0; r < 5; ++r) {
    double dx = op.s[lo + r] - pivot;
    double pw = 1.0;
    for (int cc = 0; cc < 5; ++cc) {
      A(r, cc) = pw;
      pw *= dx;
    }
    rhs(r) = values[lo + r];
  }
  Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);

  ExprPtr dx = make_sub(make_var(1), make_const(pivot));
  ExprPtr acc = make_const(coef(0));
  for (int k = 1; k < 5; ++k)
    acc = make_add(acc, make_mul(make_const(coef(k)), make_pow(dx, k)));
  return Field(acc, ambient_dim);
}

// ---------------------------------------------------------------------------
// Tensor-grid operator
// ---------------------------------------------------------------------------

GridOperator discretize_grid(const RiemannianTriple& T,
                             const ConnectionParams& params, int n1, int n2,
                             bool periodic2) {
  if (T.dim != 2) throw Error("tensor-grid operator needs a 2-D chart");
  if (params.dim != 2)
    throw Error("connection parameters were built for a different dimension");
  if (n1 < 8 || n2 < 8) throw Error("grid needs at least 8 nodes per side");

  GridOperator op;
  op.triple = T;
  op.params = params;
  op.n1 = n1;
  op.n2 = n2;
  op.periodic2 = periodic2;
  const double a1 = T.box[0][0], b1 = T.box[0][1];
  const double a2 = T.box[1][0], b2 = T.box[1][1];
  op.h1 = (b1 - a1) / (n1 - 1);
  op.h2 = periodic2 ? (b2 - a2) / n2 : (b2 - a2) / (n2 - 1);
  op.s1.resize(n1);
  for (int i = 0; i < n1; ++i) op.s1[i] = a1 + i * op.h1;
  op.s1[n1 - 1] = b1;
  op.s2.resize(n2);
  for (int j = 0; j < n2; ++j) op.s2[j] = a2 + j * op.h2;
  if (!periodic2) op.s2[n2 - 1] = b2;

  // The divergence form needs a diagonal, nondegenerate metric on the closed
  // rectangle (degenerate charts belong to the symmetric reduction).
  for (double f1 : {0.0, 0.33, 0.67, 1.0})
    for (double f2 : {0.0, 0.33, 0.67, 1.0}) {
      double p[2] = {a1 + f1 * (b1 - a1), a2 + f2 * (b2 - a2)};
      double g00 = T.g[0][0].eval(p), g11 = T.g[1][1].eval(p);
      double g01 = T.g[0][1].eval(p);
      if (std::abs(g01) > 1e-12 * (1 + std::abs(g00) + std::abs(g11)))
        throw Error("tensor-grid operator needs a diagonal metric");
      if (!(g00 > 1e-10) || !(g11 > 1e-10))
        throw Error("metric degenerates on the chart rectangle; use the "
                    "symmetric reduction instead");
    }

  const double wexp = params.tau + params.gamma - params.alpha;
  auto coeff = [&](double x1, double x2, int dir) {
    double p[2] = {x1, x2};
    double g00 = T.g[0][0].eval(p), g11 = T.g[1][1].eval(p);
    double sd = std::sqrt(g00 * g11);
    double scale = std::exp(wexp * T.u.eval(p));
    return scale * sd / (dir == 0 ? g00 : g11);
  };

  op.c1.assign(static_cast<std::size_t>(n1 - 1) * n2, 0.0);
  for (int i = 0; i + 1 < n1; ++i)
    for (int j = 0; j < n2; ++j)
      op.c1[static_cast<std::size_t>(i) * n2 + j] =
          coeff(op.s1[i] + 0.5 * op.h1, op.s2[j], 0);

  const int m2 = periodic2 ? n2 : n2 - 1;
  op.c2.assign(static_cast<std::size_t>(n1) * m2, 0.0);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < m2; ++j)
      op.c2[static_cast<std::size_t>(i) * m2 + j] =
          coeff(op.s1[i], op.s2[j] + 0.5 * op.h2, 1);

  op.mass.assign(static_cast<std::size_t>(n1) * n2, 0.0);
  op.m_node.assign(static_cast<std::size_t>(n1) * n2, 0.0);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      double p[2] = {op.s1[i], op.s2[j]};
      double sd = std::sqrt(T.g[0][0].eval(p) * T.g[1][1].eval(p));
      double m = std::exp(params.tau * T.u.eval(p)) * sd;
      double area = op.h1 * op.h2;
      if (i == 0 || i == n1 - 1) area *= 0.5;
      if (!periodic2 && (j == 0 || j == n2 - 1)) area *= 0.5;
      op.m_node[op.index(i, j)] = m;
      op.mass[op.index(i, j)] = m * area;
    }
  return op;
}

void GridOperator::apply_flux(std::span<const double> f,
                              std::span<double> out) const {
  const std::size_t total = static_cast<std::size_t>(n1) * n2;
  if (f.size() != total || out.size() != total)
    throw Error("vector length does not match the discretization");
  const int m2 = periodic2 ? n2 : n2 - 1;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      // Transverse extents of the cell faces; halved on nonperiodic edges.
      double fw2 = h2;
      if (!periodic2 && (j == 0 || j == n2 - 1)) fw2 *= 0.5;
      double fw1 = h1;
      if (i == 0 || i == n1 - 1) fw1 *= 0.5;

      double acc = 0.0;
      const double fij = f[index(i, j)];
      if (i > 0)
        acc += fw2 * c1[static_cast<std::size_t>(i - 1) * n2 + j] *
               (fij - f[index(i - 1, j)]) / h1;
      if (i < n1 - 1)
        acc += fw2 * c1[static_cast<std::size_t>(i) * n2 + j] *
               (fij - f[index(i + 1, j)]) / h1;
      if (periodic2) {
        int jm = (j + n2 - 1) % n2, jp = (j + 1) % n2;
        acc += fw1 * c2[static_cast<std::size_t>(i) * m2 + jm] *
               (fij - f[index(i, jm)]) / h2;
        acc += fw1 * c2[static_cast<std::size_t>(i) * m2 + j] *
               (fij - f[index(i, jp)]) / h2;
      } else {
        if (j > 0)
          acc += fw1 * c2[static_cast<std::size_t>(i) * m2 + j - 1] *
                 (fij - f[index(i, j - 1)]) / h2;
        if (j < n2 - 1)
          acc += fw1 * c2[static_cast<std::size_t>(i) * m2 + j] *
                 (fij - f[index(i, j + 1)]) / h2;
      }
      out[index(i, j)] = acc;
    }
}

void GridOperator::apply(std::span<const double> f,
                         std::span<double> out) const {
  apply_flux(f, out);
  const std::size_t total = static_cast<std::size_t>(n1) * n2;
  for (std::size_t k = 0; k < total; ++k) out[k] /= mass[k];
}

double GridOperator::energy(std::span<const double> f) const {
  std::vector<double> kf(f.size());
  apply_flux(f, kf);
  std::vector<double> terms(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) terms[k] = f[k] * kf[k];
  return pairwise_sum(terms);
}

double GridOperator::mass_form(std::span<const double> f) const {
  std::vector<double> terms(f.size());
  for (std::size_t k = 0; k < f.size(); ++k)
    terms[k] = mass[k] * f[k] * f[k];
  return pairwise_sum(terms);
}

namespace {

std::vector<char> grid_mask(const GridOperator& op, const GridBC& bc) {
  std::vector<char> fixed(static_cast<std::size_t>(op.n1) * op.n2, 0);
  for (int j = 0; j < op.n2; ++j) {
    if (bc.lo1) fixed[op.index(0, j)] = 1;
    if (bc.hi1) fixed[op.index(op.n1 - 1, j)] = 1;
  }
  if (!op.periodic2)
    for (int i = 0; i < op.n1; ++i) {
      if (bc.lo2) fixed[op.index(i, 0)] = 1;
      if (bc.hi2) fixed[op.index(i, op.n2 - 1)] = 1;
    }
  return fixed;
}

void zero_fixed(std::span<double> v, const std::vector<char>& fixed) {
  for (std::size_t k = 0; k < v.size(); ++k)
    if (fixed[k]) v[k] = 0.0;
}

std::vector<double> grid_diagonal(const GridOperator& op) {
  const std::size_t total = static_cast<std::size_t>(op.n1) * op.n2;
  std::vector<double> diag(total, 0.0);
  const int m2 = op.periodic2 ? op.n2 : op.n2 - 1;
  for (int i = 0; i < op.n1; ++i)
    for (int j = 0; j < op.n2; ++j) {
      double fw2 = op.h2;
      if (!op.periodic2 && (j == 0 || j == op.n2 - 1)) fw2 *= 0.5;
      double fw1 = op.h1;
      if (i == 0 || i == op.n1 - 1) fw1 *= 0.5;
      double acc = 0.0;
      if (i > 0) acc += fw2 * op.c1[static_cast<std::size_t>(i - 1) * op.n2 + j] / op.h1;
      if (i < op.n1 - 1)
        acc += fw2 * op.c1[static_cast<std::size_t>(i) * op.n2 + j] / op.h1;
      if (op.periodic2) {
        int jm = (j + op.n2 - 1) % op.n2;
        acc += fw1 * op.c2[static_cast<std::size_t>(i) * m2 + jm] / op.h2;
        acc += fw1 * op.c2[static_cast<std::size_t>(i) * m2 + j] / op.h2;
      } else {
        if (j > 0) acc += fw1 * op.c2[static_cast<std::size_t>(i) * m2 + j - 1] / op.h2;
        if (j < op.n2 - 1)
          acc += fw1 * op.c2[static_cast<std::size_t>(i) * m2 + j] / op.h2;
      }
      diag[op.index(i, j)] = acc;
    }
  return diag;
}

void grid_project_constant(const GridOperator& op, std::vector<double>& v) {
  std::vector<double> num(v.size()), den(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    num[k] = op.mass[k] * v[k];
    den[k] = op.mass[k];
  }
  double shift = pairwise_sum(num) / pairwise_sum(den);
  for (double& x : v) x -= shift;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

/// Jacobi-preconditioned CG on the flux form; `deflate` removes the constant
/// mode for the singular (no constrained edge) case.
struct CGResult {
  std::vector<double> x;
  int iterations = 0;
};

CGResult grid_cg(const GridOperator& op, const std::vector<char>& fixed,
                 std::vector<double> b, bool deflate) {
  const std::size_t total = b.size();
  std::vector<double> diag = grid_diagonal(op);
  zero_fixed(b, fixed);
  if (deflate) {
    double mean = pairwise_sum(b) / static_cast<double>(total);
    for (double& x : b) x -= mean;
  }
  CGResult res;
  res.x.assign(total, 0.0);
  double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return res;

  std::vector<double> r = b, z(total), p(total), q(total);
  for (std::size_t k = 0; k < total; ++k)
    z[k] = fixed[k] ? 0.0 : r[k] / diag[k];
  p = z;
  double rz = dot(r, z);
  const int max_iter = 60 * static_cast<int>(std::sqrt(double(total)) + 10);
  double window_norm = bnorm;
  for (int it = 0; it < max_iter; ++it) {
    op.apply_flux(p, q);
    zero_fixed(q, fixed);
    double alpha = rz / dot(p, q);
    for (std::size_t k = 0; k < total; ++k) {
      res.x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    res.iterations = it + 1;
    if (deflate) {
      double mean = pairwise_sum(r) / static_cast<double>(total);
      for (double& x : r) x -= mean;
    }
    double rnorm = std::sqrt(dot(r, r));
    if (rnorm <= 1e-12 * bnorm) break;
    // Rounding floor: stop once a whole window makes no real progress.
    if (it % 64 == 63) {
      if (rnorm > 0.9 * window_norm) break;
      window_norm = rnorm;
    }
    for (std::size_t k = 0; k < total; ++k)
      z[k] = fixed[k] ? 0.0 : r[k] / diag[k];
    double rz_new = dot(r, z);
    double beta = rz_new / rz;
    for (std::size_t k = 0; k < total; ++k) p[k] = z[k] + beta * p[k];
    rz = rz_new;
  }
  return res;
}

}  // namespace

GridSolution grid_solve_dirichlet(const GridOperator& op, const GridBC& bc,
                                  const Field& rhs) {
  if (!rhs.valid() || rhs.dim() != 2)
    throw Error("grid data must be a field of the two chart coordinates");
  std::vector<char> fixed = grid_mask(op, bc);
  if (std::find(fixed.begin(), fixed.end(), char(1)) == fixed.end())
    throw Error("no constrained edge; use the eigen or source path");

  std::vector<double> b(static_cast<std::size_t>(op.n1) * op.n2, 0.0);
  for (int i = 0; i < op.n1; ++i)
    for (int j = 0; j < op.n2; ++j) {
      double p[2] = {op.s1[i], op.s2[j]};
      b[op.index(i, j)] = -op.mass[op.index(i, j)] * rhs.eval(p);
    }
  CGResult cg = grid_cg(op, fixed, std::move(b), false);
  GridSolution sol;
  sol.values = std::move(cg.x);
  sol.cg_iterations = cg.iterations;
  return sol;
}

GridSolution grid_eigen(const GridOperator& op, const GridBC& bc) {
  std::vector<char> fixed = grid_mask(op, bc);
  const bool deflate =
      std::find(fixed.begin(), fixed.end(), char(1)) == fixed.end();
  const std::size_t total = static_cast<std::size_t>(op.n1) * op.n2;

  std::vector<double> v(total);
  for (int i = 0; i < op.n1; ++i)
    for (int j = 0; j < op.n2; ++j) {
      double t1 = (i + 1.0) / (op.n1 + 1.0), t2 = (j + 1.0) / (op.n2 + 1.0);
      v[op.index(i, j)] = deflate
                              ? std::cos(kPi * t1) + 0.3 * std::sin(2 * kPi * t2 + 0.7)
                              : std::sin(kPi * t1) * std::sin(kPi * t2) +
                                    0.05 * std::sin(2 * kPi * t1 + 0.3);
    }
  zero_fixed(v, fixed);
  if (deflate) grid_project_constant(op, v);
  double nrm = std::sqrt(op.mass_form(v));
  for (double& x : v) x /= nrm;

  int cg_total = 0;
  std::vector<double> b(total);
  for (int it = 0; it < 200; ++it) {
    for (std::size_t k = 0; k < total; ++k) b[k] = op.mass[k] * v[k];
    CGResult cg = grid_cg(op, fixed, std::move(b), deflate);
    b.assign(total, 0.0);
    cg_total += cg.iterations;
    std::vector<double> x = std::move(cg.x);
    if (deflate) grid_project_constant(op, x);
    double xn = std::sqrt(op.mass_form(x));
    for (double& y : x) y /= xn;
    std::vector<double> dterms(total);
    for (std::size_t k = 0; k < total; ++k) {
      double d = x[k] - v[k];
      dterms[k] = op.mass[k] * d * d;
    }
    double change = std::sqrt(pairwise_sum(dterms));
    v = std::move(x);
    if (change <= 1e-10) break;
  }

  std::size_t arg = 0;
  for (std::size_t k = 1; k < total; ++k)
    if (std::abs(v[k]) > std::abs(v[arg])) arg = k;
  if (v[arg] < 0)
    for (double& x : v) x = -x;

  GridSolution sol;
  sol.lambda = op.energy(v) / op.mass_form(v);
  sol.rayleigh = sol.lambda;
  sol.values = std::move(v);
  sol.cg_iterations = cg_total;
  return sol;
}

// ---------------------------------------------------------------------------
// Static-equation equivalence
// ---------------------------------------------------------------------------

EquivalenceResiduals static_equivalence_check(const AffineConnection& conn,
                                              const DomainAssembly& assembly,
                                              const Field& f, double lambda) {
  if (std::abs(conn.params.alpha) > 1e-14 ||
      std::abs(conn.params.gamma - 1.0) > 1e-14)
    throw Error("static equivalence holds at (alpha, gamma) = (0, 1)");
  const RiemannianTriple& T = conn.triple;
  if (!f.valid() || f.dim() != T.dim)
    throw Error("field dimension does not match the chart");

  Field V(make_call(Func::Exp, T.u.expr()), T.dim);
  Field phi(make_mul(f.expr(), make_call(Func::Exp, make_neg(T.u.expr()))),
            T.dim);

  EquivalenceResiduals out;
  for (const VolumeNode& node : assembly.volume_nodes) {
    std::span<const double> p(node.x);
    double vval = V.eval(p);
    double r1 = d_laplacian_at(conn, phi, p) + lambda * phi.eval(p);
    double r2 = vval * laplacian_at(T, f, p) - laplacian_at(T, V, p) * f.eval(p) +
                lambda * f.eval(p);
    out.residual_1 = std::max(out.residual_1, std::abs(r1));
    out.residual_2 = std::max(out.residual_2, std::abs(r2));
    out.coupling = std::max(out.coupling, std::abs(r2 - vval * r1));
  }
  return out;
}

}  // namespace affgeo
