#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affgeo/connection.hpp"
#include "affgeo/domain.hpp"
#include "affgeo/solver.hpp"

namespace affgeo {

/// Pointwise positivity conditions on the modified curvature data. The first
/// two are sampled at volume quadrature nodes, the rest at boundary nodes.
enum class CurvatureCondition {
  RicciNonnegative,   // modified Ricci >= 0
  RicciBound,         // modified Ricci >= (n-1) V^{alpha-gamma} g
  MeanPositive,       // affine mean curvature > 0
  MeanNonnegative,    // affine mean curvature >= 0
  FormPositive,       // h - gamma u_nu g_ind > 0
  FormNonnegative,    // h - gamma u_nu g_ind >= 0
};

std::string_view to_string(CurvatureCondition c);

/// Result of sampling a curvature condition at quadrature nodes. The margin
/// of a tensor condition at a node is the smallest generalized eigenvalue of
/// the form against the metric (ambient metric for volume conditions,
/// induced metric for boundary forms); for the scalar mean-curvature
/// conditions it is the value itself. This is numerical evidence at sample
/// points, not a proof.
struct CurvatureCertificate {
  CurvatureCondition condition = CurvatureCondition::RicciNonnegative;
  double min_margin = 0.0;         // smallest margin over the sample set
  int samples = 0;                 // number of nodes examined
  std::vector<double> worst_point; // chart point achieving the minimum
  bool strict = false;             // condition demands strict positivity
  bool passed = false;             // margin > tol (strict) or >= -tol
};

/// Samples `condition` at the assembly's quadrature nodes. An empty sample
/// set (boundary condition on a closed domain) passes vacuously with an
/// infinite margin. Negative margins are results, not errors.
CurvatureCertificate certify(const AffineConnection& conn,
                             const DomainAssembly& A,
                             CurvatureCondition condition, double tol = 1e-8);

/// One evaluated integral inequality. Orientation is uniform: slack =
/// rhs - lhs is nonnegative exactly when the inequality holds, and each
/// operation documents in `note` which side is which. relative_slack =
/// slack / (1 + |rhs|), and the equality flag fires when
/// |slack| <= equality_tol * (1 + |rhs|). When the certificates fail the
/// report is marked hypotheses_met = false, the numeric fields are left
/// zero, and no claim is made either way.
struct InequalityReport {
  std::string name;
  bool hypotheses_met = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double relative_slack = 0.0;
  bool equality = false;
  double equality_tol = 1e-6;
  double umbilicity_max = 0.0;  // largest trace-free shape defect sampled
                                // on the boundary (0 when there is none)
  std::vector<CurvatureCertificate> certificates;
  std::string note;
};

/// Weighted volume bound: lhs = n * integral_Omega V^tau, rhs = (n-1) *
/// integral_Sigma V^tau / (affine mean curvature). Requires the affine mean
/// curvature to be positive at every boundary node.
InequalityReport heintze_karcher(const AffineConnection& conn,
                                 const DomainAssembly& A,
                                 double equality_tol = 1e-6);

/// Weighted area--mean-curvature bound: rhs = (integral_Sigma V^{tau-alpha})^2,
/// lhs = n/(n-1) * integral_Omega V^tau * integral_Sigma (affine mean
/// curvature) V^{tau-2 alpha}. Requires h - gamma u_nu g_ind > 0 on the
/// boundary. With alpha = gamma = 0 both sides reduce to the classical
/// area--volume--total-mean-curvature inequality.
InequalityReport minkowski(const AffineConnection& conn,
                           const DomainAssembly& A,
                           double equality_tol = 1e-6);

/// Spectral bound: lhs = n, rhs = the smallest (for Neumann/closed problems
/// smallest nonzero) eigenvalue of the modified Laplacian computed by the
/// symmetric-reduction solver on `nodes` grid points. Requires the modified
/// Ricci to dominate (n-1) V^{alpha-gamma} g on the volume nodes plus the
/// matching boundary condition: affine mean curvature >= 0 for Dirichlet,
/// h - gamma u_nu g_ind >= 0 for Neumann. The eigenvalue is taken over
/// rotationally invariant functions; that subspace contains the bottom
/// eigenfunction for the catalog equality cases, and the reported value is
/// always an upper bound for the true bottom of the spectrum, so nonnegative
/// slack is implied by the hypotheses whenever they hold.
InequalityReport lichnerowicz(const AffineConnection& conn,
                              const DomainAssembly& A, ProblemBC bc,
                              int nodes = 2000, double equality_tol = 1e-6);

/// Side condition under which the weighted Poincare inequality is evaluated:
/// Closed needs an empty boundary (f is projected to zero weighted mean),
/// ZeroBoundary needs f to vanish on the boundary and the affine mean
/// curvature to be nonnegative, ZeroMean needs integral f V^tau = 0 and
/// h - gamma u_nu g_ind >= 0.
enum class PoincareCase { Closed, ZeroBoundary, ZeroMean };

std::string_view to_string(PoincareCase c);

/// Weighted Poincare inequality: lhs = n/(n-1) * integral f^2 V^tau, rhs =
/// integral of df . (modified Ricci)^{-1} df * V^tau. The modified Ricci
/// must be positive definite at every volume node (certified first; the
/// pointwise inverses are symmetric positive-definite solves).
InequalityReport poincare(const AffineConnection& conn,
                          const DomainAssembly& A, const Field& f,
                          PoincareCase which, double equality_tol = 1e-6);

/// Equality witnesses: the largest trace-free defect of the boundary shape
/// operator, and, when a solution field is supplied, the largest norm of the
/// trace-free part of its modified Hessian
///   || modified Hessian(phi) - (modified Laplacian(phi) / n) g ||
/// over the volume nodes (indices raised by the metric).
struct EqualityDiagnostics {
  double umbilicity_max = 0.0;
  std::vector<double> worst_boundary;  // ambient point of the worst node
  int boundary_samples = 0;
  double hessian_defect_max = 0.0;
  std::vector<double> worst_volume;    // chart point of the worst node
  int volume_samples = 0;
};

EqualityDiagnostics equality_diagnostics(
    const AffineConnection& conn, const DomainAssembly& A,
    const std::optional<Field>& phi = std::nullopt);

/// Same diagnostics with the solution supplied as radial nodal data: at each
/// volume node the defect is evaluated through the local polynomial
/// interpolant centered at the nearest grid node, so no global fit is ever
/// extrapolated.
EqualityDiagnostics equality_diagnostics(const AffineConnection& conn,
                                         const DomainAssembly& A,
                                         const RadialOperator& op,
                                         const RadialSolution& sol);

}  // namespace affgeo
