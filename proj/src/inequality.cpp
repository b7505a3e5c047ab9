#include "affgeo/inequality.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace affgeo {

namespace {

std::string point_str(std::span<const double> p) {
  std::ostringstream out;
  out.precision(6);
  out << '(';
  for (std::size_t i = 0; i < p.size(); ++i) out << (i ? ", " : "") << p[i];
  out << ')';
  return out.str();
}

double weight_power(const RiemannianTriple& T, double exponent,
                    std::span<const double> p) {
  return std::exp(exponent * T.u.eval(p));
}

/// Smallest eigenvalue of `form` relative to the positive-definite `metric`.
double min_relative_eigenvalue(const Eigen::MatrixXd& form,
                               const Eigen::MatrixXd& metric) {
  Eigen::MatrixXd sym = 0.5 * (form + form.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      sym, metric, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Largest trace-free shape defect over the boundary nodes; 0 when there
/// are none.
double boundary_umbilicity_max(const DomainAssembly& A,
                               std::vector<double>* worst = nullptr,
                               int* count = nullptr) {
  double best = 0.0;
  if (count != nullptr) *count = 0;
  for (const BoundaryNode& b : A.boundary_nodes) {
    const BoundaryFrame& F = A.frames[static_cast<std::size_t>(b.patch)];
    double defect = umbilicity_defect(F, b.q);
    if (defect > best || (worst != nullptr && worst->empty())) {
      best = std::max(best, defect);
      if (worst != nullptr) *worst = F.ambient_point(b.q);
    }
    if (count != nullptr) ++*count;
  }
  return best;
}

/// Fills slack, relative slack, the equality flag, and the boundary
/// umbilicity witness from lhs/rhs.
void finalize_report(InequalityReport& r, const DomainAssembly& A) {
  r.slack = r.rhs - r.lhs;
  const double scale = 1.0 + std::abs(r.rhs);
  r.relative_slack = r.slack / scale;
  r.equality = std::abs(r.slack) <= r.equality_tol * scale;
  r.umbilicity_max = boundary_umbilicity_max(A);
}

void mark_unmet(InequalityReport& r, const std::string& why) {
  r.hypotheses_met = false;
  r.note += "; hypotheses not met: " + why;
}

bool require_certificate(InequalityReport& r, const AffineConnection& conn,
                         const DomainAssembly& A,
                         CurvatureCondition condition) {
  CurvatureCertificate cert = certify(conn, A, condition);
  r.certificates.push_back(cert);
  if (!cert.passed) {
    std::ostringstream why;
    why << to_string(condition) << " fails with margin " << cert.min_margin
        << " at " << point_str(cert.worst_point);
    mark_unmet(r, why.str());
    return false;
  }
  return true;
}

const char* kSampledNote =
    "; curvature hypotheses sampled at quadrature nodes (numerical "
    "certificate, not a proof)";

}  // namespace

std::string_view to_string(CurvatureCondition c) {
  switch (c) {
    case CurvatureCondition::RicciNonnegative:
      return "modified_ricci_nonnegative";
    case CurvatureCondition::RicciBound:
      return "modified_ricci_metric_bound";
    case CurvatureCondition::MeanPositive:
      return "mean_curvature_positive";
    case CurvatureCondition::MeanNonnegative:
      return "mean_curvature_nonnegative";
    case CurvatureCondition::FormPositive:
      return "boundary_form_positive";
    case CurvatureCondition::FormNonnegative:
      return "boundary_form_nonnegative";
  }
  return "unknown";
}

std::string_view to_string(PoincareCase c) {
  switch (c) {
    case PoincareCase::Closed:
      return "closed";
    case PoincareCase::ZeroBoundary:
      return "zero_boundary_values";
    case PoincareCase::ZeroMean:
      return "zero_weighted_mean";
  }
  return "unknown";
}

CurvatureCertificate certify(const AffineConnection& conn,
                             const DomainAssembly& A,
                             CurvatureCondition condition, double tol) {
  CurvatureCertificate cert;
  cert.condition = condition;
  cert.strict = condition == CurvatureCondition::MeanPositive ||
                condition == CurvatureCondition::FormPositive;
  const int n = conn.triple.dim;
  double margin = std::numeric_limits<double>::infinity();

  const bool volume = condition == CurvatureCondition::RicciNonnegative ||
                      condition == CurvatureCondition::RicciBound;
  if (volume) {
    for (const VolumeNode& v : A.volume_nodes) {
      Eigen::MatrixXd form = ricci_D_closed_at(conn, v.x);
      MetricData md = metric_at(conn.triple, v.x);
      if (condition == CurvatureCondition::RicciBound) {
        form -= (n - 1) *
                weight_power(conn.triple, conn.params.alpha - conn.params.gamma,
                             v.x) *
                md.g;
      }
      double lam = min_relative_eigenvalue(form, md.g);
      if (lam < margin) {
        margin = lam;
        cert.worst_point = v.x;
      }
      ++cert.samples;
    }
  } else {
    for (const BoundaryNode& b : A.boundary_nodes) {
      double lam = 0.0;
      if (condition == CurvatureCondition::MeanPositive ||
          condition == CurvatureCondition::MeanNonnegative) {
        lam = affine_mean_curvature(b.shape, conn.params);
      } else {
        Eigen::MatrixXd form =
            b.shape.h - conn.params.gamma * b.shape.u_nu * b.shape.g_ind;
        lam = min_relative_eigenvalue(form, b.shape.g_ind);
      }
      if (lam < margin) {
        margin = lam;
        cert.worst_point =
            A.frames[static_cast<std::size_t>(b.patch)].ambient_point(b.q);
      }
      ++cert.samples;
    }
  }

  cert.min_margin = margin;
  cert.passed = cert.samples == 0 ||
                (cert.strict ? margin > tol : margin >= -tol);
  return cert;
}

InequalityReport heintze_karcher(const AffineConnection& conn,
                                 const DomainAssembly& A,
                                 double equality_tol) {
  InequalityReport r;
  r.name = "heintze_karcher";
  r.equality_tol = equality_tol;
  const int n = conn.triple.dim;
  const double tau = conn.params.tau;
  r.note =
      "lhs = n * integral_domain V^tau, rhs = (n-1) * integral_boundary "
      "V^tau / (affine mean curvature); slack = rhs - lhs is nonnegative "
      "when the bound holds";
  r.note += kSampledNote;
  if (A.boundary_nodes.empty()) {
    mark_unmet(r, "the domain has no boundary");
    return r;
  }
  if (!require_certificate(r, conn, A, CurvatureCondition::MeanPositive))
    return r;
  r.hypotheses_met = true;
  r.lhs = n * integrate_volume(A, [&](std::span<const double> p) {
    return weight_power(conn.triple, tau, p);
  });
  r.rhs = (n - 1) *
          integrate_boundary(
              A, [&](const BoundaryFrame& F, const BoundaryNode& b) {
                std::vector<double> amb = F.ambient_point(b.q);
                return weight_power(conn.triple, tau, amb) /
                       affine_mean_curvature(b.shape, conn.params);
              });
  finalize_report(r, A);
  return r;
}

InequalityReport minkowski(const AffineConnection& conn,
                           const DomainAssembly& A, double equality_tol) {
  InequalityReport r;
  r.name = "minkowski";
  r.equality_tol = equality_tol;
  const int n = conn.triple.dim;
  const double tau = conn.params.tau;
  const double alpha = conn.params.alpha;
  r.note =
      "rhs = (integral_boundary V^{tau-alpha})^2, lhs = n/(n-1) * "
      "integral_domain V^tau * integral_boundary (affine mean curvature) "
      "V^{tau-2alpha}; slack = rhs - lhs is nonnegative when the bound "
      "holds";
  r.note += kSampledNote;
  if (A.boundary_nodes.empty()) {
    mark_unmet(r, "the domain has no boundary");
    return r;
  }
  if (!require_certificate(r, conn, A, CurvatureCondition::FormPositive))
    return r;
  r.hypotheses_met = true;
  const double vol = integrate_volume(A, [&](std::span<const double> p) {
    return weight_power(conn.triple, tau, p);
  });
  const double area = integrate_boundary(
      A, [&](const BoundaryFrame& F, const BoundaryNode& b) {
        std::vector<double> amb = F.ambient_point(b.q);
        return weight_power(conn.triple, tau - alpha, amb);
      });
  const double mean_total = integrate_boundary(
      A, [&](const BoundaryFrame& F, const BoundaryNode& b) {
        std::vector<double> amb = F.ambient_point(b.q);
        return affine_mean_curvature(b.shape, conn.params) *
               weight_power(conn.triple, tau - 2.0 * alpha, amb);
      });
  r.lhs = static_cast<double>(n) / (n - 1) * vol * mean_total;
  r.rhs = area * area;
  finalize_report(r, A);
  return r;
}

InequalityReport lichnerowicz(const AffineConnection& conn,
                              const DomainAssembly& A, ProblemBC bc,
                              int nodes, double equality_tol) {
  InequalityReport r;
  r.name = "lichnerowicz";
  r.equality_tol = equality_tol;
  const int n = conn.triple.dim;
  r.note = "lhs = n, rhs = smallest ";
  r.note += bc == ProblemBC::Dirichlet ? "" : "nonzero ";
  r.note +=
      "eigenvalue of the modified Laplacian over rotationally invariant "
      "functions (an upper bound for the bottom of the full spectrum); "
      "slack = rhs - lhs is nonnegative when the bound holds";
  r.note += kSampledNote;

  if (bc == ProblemBC::Closed && !A.closed) {
    mark_unmet(r, "the closed problem needs a domain without boundary");
    return r;
  }
  if (bc != ProblemBC::Closed && A.boundary_nodes.empty()) {
    mark_unmet(r, "the boundary problem needs a domain with boundary");
    return r;
  }
  if (!require_certificate(r, conn, A, CurvatureCondition::RicciBound))
    return r;
  if (bc == ProblemBC::Dirichlet &&
      !require_certificate(r, conn, A, CurvatureCondition::MeanNonnegative))
    return r;
  if (bc == ProblemBC::Neumann &&
      !require_certificate(r, conn, A, CurvatureCondition::FormNonnegative))
    return r;

  SturmLiouville line = reduce_symmetric(conn.triple, conn.params, A.spec);
  RadialOperator op = discretize(line, nodes);
  EigenResult eig = solve_eigen(op, bc);
  r.hypotheses_met = true;
  r.lhs = n;
  r.rhs = eig.lambda1;
  finalize_report(r, A);
  return r;
}

InequalityReport poincare(const AffineConnection& conn,
                          const DomainAssembly& A, const Field& f,
                          PoincareCase which, double equality_tol) {
  InequalityReport r;
  r.name = "poincare";
  r.equality_tol = equality_tol;
  const int n = conn.triple.dim;
  if (n < 2) throw Error("poincare needs chart dimension >= 2");
  const double tau = conn.params.tau;
  r.note =
      "lhs = n/(n-1) * integral f^2 V^tau, rhs = integral of "
      "df . (modified Ricci)^{-1} df * V^tau; slack = rhs - lhs is "
      "nonnegative when the bound holds; case ";
  r.note += to_string(which);
  r.note += kSampledNote;

  CurvatureCertificate cert =
      certify(conn, A, CurvatureCondition::RicciNonnegative);
  r.certificates.push_back(cert);
  if (!cert.passed || !(cert.min_margin > 1e-8)) {
    std::ostringstream why;
    why << "modified Ricci is not positive definite (margin "
        << cert.min_margin << " at " << point_str(cert.worst_point) << ")";
    mark_unmet(r, why.str());
    return r;
  }

  double shift = 0.0;
  if (which == PoincareCase::Closed) {
    if (!A.closed) {
      mark_unmet(r, "this case needs a domain without boundary");
      return r;
    }
    const double num = integrate_volume(A, [&](std::span<const double> p) {
      return f.eval(p) * weight_power(conn.triple, tau, p);
    });
    const double den = integrate_volume(A, [&](std::span<const double> p) {
      return weight_power(conn.triple, tau, p);
    });
    shift = num / den;
  } else if (which == PoincareCase::ZeroBoundary) {
    if (A.boundary_nodes.empty()) {
      mark_unmet(r, "this case needs a domain with boundary");
      return r;
    }
    double f_volume = 0.0;
    for (const VolumeNode& v : A.volume_nodes)
      f_volume = std::max(f_volume, std::abs(f.eval(v.x)));
    double f_boundary = 0.0;
    for (const BoundaryNode& b : A.boundary_nodes) {
      const BoundaryFrame& F = A.frames[static_cast<std::size_t>(b.patch)];
      f_boundary = std::max(f_boundary, std::abs(f.eval(F.ambient_point(b.q))));
    }
    if (f_boundary > 1e-10 * (1.0 + f_volume)) {
      std::ostringstream why;
      why << "f does not vanish on the boundary (max |f| = " << f_boundary
          << ")";
      mark_unmet(r, why.str());
      return r;
    }
    if (!require_certificate(r, conn, A, CurvatureCondition::MeanNonnegative))
      return r;
  } else {
    if (A.boundary_nodes.empty()) {
      mark_unmet(r, "this case needs a domain with boundary (use the closed "
                    "case instead)");
      return r;
    }
    const double mean = integrate_volume(A, [&](std::span<const double> p) {
      return f.eval(p) * weight_power(conn.triple, tau, p);
    });
    const double mass = integrate_volume(A, [&](std::span<const double> p) {
      return std::abs(f.eval(p)) * weight_power(conn.triple, tau, p);
    });
    if (std::abs(mean) > 1e-8 * (1.0 + mass)) {
      std::ostringstream why;
      why << "integral of f V^tau = " << mean << " is not zero";
      mark_unmet(r, why.str());
      return r;
    }
    if (!require_certificate(r, conn, A, CurvatureCondition::FormNonnegative))
      return r;
  }

  r.hypotheses_met = true;
  r.lhs = static_cast<double>(n) / (n - 1) *
          integrate_volume(A, [&](std::span<const double> p) {
            const double v = f.eval(p) - shift;
            return v * v * weight_power(conn.triple, tau, p);
          });
  r.rhs = integrate_volume(A, [&](std::span<const double> p) {
    Eigen::VectorXd df(n);
    for (int i = 0; i < n; ++i) df[i] = f.eval_partial({i + 1}, p);
    Eigen::MatrixXd ric = ricci_D_closed_at(conn, p);
    ric = 0.5 * (ric + ric.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(ric);
    if (llt.info() != Eigen::Success)
      throw Error("modified Ricci is not positive definite at " +
                  point_str(p));
    return df.dot(llt.solve(df)) * weight_power(conn.triple, tau, p);
  });
  finalize_report(r, A);
  return r;
}

namespace {

EqualityDiagnostics diagnostics_impl(
    const AffineConnection& conn, const DomainAssembly& A,
    const std::function<double(std::span<const double>)>& defect_at) {
  EqualityDiagnostics d;
  d.umbilicity_max =
      boundary_umbilicity_max(A, &d.worst_boundary, &d.boundary_samples);
  if (!defect_at) return d;
  for (const VolumeNode& v : A.volume_nodes) {
    const double defect = defect_at(v.x);
    if (defect > d.hessian_defect_max || d.worst_volume.empty()) {
      d.hessian_defect_max = std::max(d.hessian_defect_max, defect);
      d.worst_volume = v.x;
    }
    ++d.volume_samples;
  }
  return d;
}

/// Norm of the trace-free part of the modified Hessian at `p`, indices
/// raised by the metric.
double hessian_defect(const AffineConnection& conn, const Field& phi,
                      std::span<const double> p) {
  const int n = conn.triple.dim;
  Eigen::MatrixXd H = d_hessian_at(conn, phi, p);
  const double lap = d_laplacian_at(conn, phi, p);
  MetricData md = metric_at(conn.triple, p);
  Eigen::MatrixXd T = H - (lap / n) * md.g;
  Eigen::MatrixXd S = md.g_inv * T;
  return std::sqrt(std::max(0.0, (S * S).trace()));
}

}  // namespace

EqualityDiagnostics equality_diagnostics(const AffineConnection& conn,
                                         const DomainAssembly& A,
                                         const std::optional<Field>& phi) {
  if (!phi) return diagnostics_impl(conn, A, nullptr);
  return diagnostics_impl(conn, A, [&](std::span<const double> p) {
    return hessian_defect(conn, *phi, p);
  });
}

EqualityDiagnostics equality_diagnostics(const AffineConnection& conn,
                                         const DomainAssembly& A,
                                         const RadialOperator& op,
                                         const RadialSolution& sol) {
  return diagnostics_impl(conn, A, [&](std::span<const double> p) {
    const double x = p[0];
    const auto first = op.s.begin();
    auto it = std::lower_bound(first, op.s.end(), x);
    int center = static_cast<int>(it - first);
    if (it != first && (it == op.s.end() || x - *(it - 1) < *it - x))
      --center;
    Field local =
        nodal_interpolant(op, sol.values, center, conn.triple.dim);
    return hessian_defect(conn, local, p);
  });
}

}  // namespace affgeo
