#pragma once

#include <optional>
#include <span>
#include <vector>

#include "affgeo/connection.hpp"
#include "affgeo/domain.hpp"

namespace affgeo {

enum class ProblemBC { Closed, Dirichlet, Neumann };

std::string_view to_string(ProblemBC bc);

/// One-dimensional reduction of the weighted operator on a domain that is
/// rotationally symmetric about its first coordinate. With omega(s) the
/// volume profile of the transverse slice, the operator
///   phi -> -V^{-tau} div(V^{tau+gamma-alpha} grad phi)
/// acting on functions of s alone becomes -(w phi')' / m with
///   w(s) = e^{(tau+gamma-alpha) u(s)} omega(s),
///   m(s) = e^{tau u(s)} omega(s).
/// An endpoint where omega vanishes is a geometric axis: the interval end is
/// an interior point of the manifold and carries a no-flux regularity
/// condition instead of boundary data.
struct SturmLiouville {
  RiemannianTriple triple;        // ambient chart the reduction came from
  DomainSpec spec;
  ConnectionParams params;
  double a = 0.0, b = 0.0;        // radial interval
  bool axis_left = false, axis_right = false;
  bool closed = false;            // no regular boundary end at all
  std::vector<double> transverse; // fixed transverse coordinates

  double profile_at(double s) const;  // omega(s), transverse constant included
  double u_at(double s) const;
  double w_at(double s) const;
  double m_at(double s) const;

  /// Ambient chart point (s, transverse...).
  std::vector<double> ambient_point(double s) const;
};

/// Builds the reduction, verifying symmetry by sampling: the weight and the
/// volume density must be independent of the transverse coordinates (up to a
/// transverse factor that cancels), the radial metric coefficient must be 1,
/// and the radial direction must be metric-orthogonal to the slices. Throws
/// Error for configurations that are not rotationally symmetric.
SturmLiouville reduce_symmetric(const RiemannianTriple& T,
                                const ConnectionParams& params,
                                const DomainSpec& spec);

/// Vertex-centered conservative discretization of the reduction on `nodes`
/// equally spaced nodes. Flux coefficients are sampled at half-nodes (never
/// on an axis), cell masses at cell midpoints, so the flux form
///   (K f)_i = [w_{i-1/2}(f_i - f_{i-1}) - w_{i+1/2}(f_{i+1} - f_i)] / h
/// is symmetric positive semidefinite and M^{-1} K is self-adjoint in the
/// V^tau inner product sum_i M_i f_i g_i.
struct RadialOperator {
  SturmLiouville line;
  int nodes = 0;
  double h = 0.0;
  std::vector<double> s;       // node positions, size nodes
  std::vector<double> w_half;  // w at s_i + h/2, size nodes-1
  std::vector<double> mass;    // V^tau cell masses M_i, size nodes
  std::vector<double> m_node;  // m(s_i), size nodes

  void apply_flux(std::span<const double> f, std::span<double> out) const;
  /// out = M^{-1} K f; approximates minus the modified Laplacian of f.
  void apply(std::span<const double> f, std::span<double> out) const;

  /// Energy form f^T K f = sum_i w_{i+1/2} (f_{i+1} - f_i)^2 / h.
  double energy(std::span<const double> f) const;
  /// Mass form sum_i M_i f_i^2.
  double mass_form(std::span<const double> f) const;
  /// V^tau inner product sum_i M_i f_i g_i.
  double mass_inner(std::span<const double> f, std::span<const double> g) const;
};

RadialOperator discretize(const SturmLiouville& line, int nodes);

struct RadialSolution {
  std::vector<double> s;
  std::vector<double> values;
  ProblemBC bc = ProblemBC::Dirichlet;
  double c = 0.0;        // Neumann boundary constant actually used
  double lambda = 0.0;   // eigenvalue, for eigen solves
  double rayleigh = 0.0; // Rayleigh quotient of `values`

  /// Piecewise-linear read-out at a point of [a, b].
  double value_at(double x) const;
};

/// Modified Poisson problem with zero boundary values on the regular ends;
/// axis ends keep the natural no-flux condition. rhs is a function of the
/// radial coordinate (a 1-variable field).
RadialSolution solve_dirichlet(const RadialOperator& op, const Field& rhs);

/// Modified Poisson problem with the weighted conormal condition
/// V^gamma phi_nu = c on the regular ends. With c unset, the compatible
/// constant (weighted volume over weighted boundary area) is used; an
/// explicit c must satisfy the compatibility relation within 1e-8. The
/// solution is gauged to zero V^tau-mean.
RadialSolution solve_neumann(const RadialOperator& op, const Field& rhs,
                             std::optional<double> c = std::nullopt);

/// Source problem for the given boundary condition (Neumann means zero
/// weighted conormal data). Closed/Neumann sources must have zero V^tau
/// integral within 1e-8; those solutions are gauged to zero V^tau-mean.
RadialSolution solve_source(const RadialOperator& op, const Field& f,
                            ProblemBC bc);
RadialSolution solve_source(const RadialOperator& op,
                            std::span<const double> f, ProblemBC bc);

struct EigenResult {
  double lambda1 = 0.0;   // smallest (Dirichlet) / smallest nonzero eigenvalue
  RadialSolution mode;    // V^tau-normalized eigenvector
  ProblemBC bc = ProblemBC::Dirichlet;
  double rayleigh = 0.0;  // Rayleigh quotient of the returned mode
};

/// Smallest eigenvalue of the discrete operator by inverse iteration in the
/// V^tau inner product; constants are deflated for closed/Neumann problems.
EigenResult solve_eigen(const RadialOperator& op, ProblemBC bc);

/// Discrete Rayleigh quotient  energy(f) / mass_form(f). Dirichlet trials
/// must vanish on the regular ends; closed/Neumann trials are projected to
/// zero V^tau-mean first.
double rayleigh_quotient(const RadialOperator& op, std::span<const double> f,
                         ProblemBC bc);

/// Degree-4 polynomial through the five nodes centered at `center` (clamped
/// into range), returned as a field in the first coordinate of an
/// `ambient_dim`-dimensional chart. Lets pointwise differential operators be
/// applied to nodal data.
Field nodal_interpolant(const RadialOperator& op,
                        std::span<const double> values, int center,
                        int ambient_dim);

// ---------------------------------------------------------------------------
// Tensor-grid operator on a two-dimensional chart rectangle
// ---------------------------------------------------------------------------

/// Divergence-form discretization on the full chart box of a 2-D triple with
/// diagonal, nondegenerate metric: coefficients c^{aa} = V^{tau+gamma-alpha}
/// sqrt(det g) g^{aa} at face midpoints, masses V^tau sqrt(det g) times the
/// control-volume area. The second coordinate may be periodic.
struct GridOperator {
  RiemannianTriple triple;
  ConnectionParams params;
  int n1 = 0, n2 = 0;
  bool periodic2 = false;
  double h1 = 0.0, h2 = 0.0;
  std::vector<double> s1, s2;
  std::vector<double> c1;    // (n1-1) x n2 faces at (i+1/2, j)
  std::vector<double> c2;    // n1 x (periodic ? n2 : n2-1) faces at (i, j+1/2)
  std::vector<double> mass;  // n1 x n2
  std::vector<double> m_node;

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * n2 + j;
  }
  void apply_flux(std::span<const double> f, std::span<double> out) const;
  void apply(std::span<const double> f, std::span<double> out) const;
  double energy(std::span<const double> f) const;
  double mass_form(std::span<const double> f) const;
};

GridOperator discretize_grid(const RiemannianTriple& T,
                             const ConnectionParams& params, int n1, int n2,
                             bool periodic2);

/// Which grid edges carry zero boundary values; edges not marked keep the
/// natural no-flux condition. The second-coordinate flags are ignored for
/// periodic grids.
struct GridBC {
  bool lo1 = false, hi1 = false, lo2 = false, hi2 = false;
};

struct GridSolution {
  std::vector<double> values;  // n1 x n2, zeros on constrained edges
  double lambda = 0.0;
  double rayleigh = 0.0;
  int cg_iterations = 0;
};

/// Modified Poisson solve with zero values on the edges marked in `bc`,
/// conjugate-gradient with Jacobi preconditioning to relative residual 1e-12.
GridSolution grid_solve_dirichlet(const GridOperator& op, const GridBC& bc,
                                  const Field& rhs);

/// Smallest eigenvalue (smallest nonzero when no edge is constrained) by
/// inverse iteration with CG inner solves; constants are deflated in the
/// unconstrained case.
GridSolution grid_eigen(const GridOperator& op, const GridBC& bc);

// ---------------------------------------------------------------------------
// Static-equation equivalence
// ---------------------------------------------------------------------------

/// At (alpha, gamma) = (0, 1) the eigenvalue problem for the modified
/// Laplacian on phi = f / V is pointwise V times the linearized static
/// equation residual on f:
///   residual_1(x) = |modified_laplacian(f/V) + lambda (f/V)|
///   residual_2(x) = |V lap f - (lap V) f + lambda f|
/// with residual_2 = V residual_1 identically. Residuals are maximized over
/// the assembly's volume nodes; `coupling` is the largest pointwise defect of
/// that proportionality.
struct EquivalenceResiduals {
  double residual_1 = 0.0;
  double residual_2 = 0.0;
  double coupling = 0.0;
};

EquivalenceResiduals static_equivalence_check(const AffineConnection& conn,
                                              const DomainAssembly& assembly,
                                              const Field& f, double lambda);

}  // namespace affgeo
