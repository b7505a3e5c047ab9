#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "affgeo/triple.hpp"

namespace affgeo {

/// Parameters of the two-parameter connection family. tau is always derived
/// as (n+1)*alpha + gamma; it is the exponent making V^tau dOmega parallel.
struct ConnectionParams {
  double alpha = 0.0;
  double gamma = 0.0;
  int dim = 0;
  double tau = 0.0;

  static ConnectionParams make(double alpha, double gamma, int dim);
};

struct AffineConnection {
  RiemannianTriple triple;
  ConnectionParams params;

  static AffineConnection make(RiemannianTriple T, double alpha, double gamma);
};

/// Connection coefficients and (optionally) their exact first derivatives.
///   C[k](i,j)      = coefficient of e_k in D_{e_i} e_j
///   dC[m][k](i,j)  = d_m C[k](i,j)   (filled when order >= 2)
struct ConnectionCoeffs {
  int n = 0;
  std::vector<Eigen::MatrixXd> C;
  std::vector<std::vector<Eigen::MatrixXd>> dC;
};

ConnectionCoeffs connection_coeffs_at(const AffineConnection& conn,
                                      std::span<const double> p, int order = 1);

/// C[k](i,j) - C[k](j,i); vanishes identically for this family.
std::vector<Eigen::MatrixXd> torsion_at(const AffineConnection& conn,
                                        std::span<const double> p);

/// Ricci tensor by contraction of the curvature commutator of the
/// connection coefficients (exact coefficient derivatives). Returned as
/// computed, without symmetrization, so asymmetry is observable.
Eigen::MatrixXd ricci_D_direct_at(const AffineConnection& conn,
                                  std::span<const double> p);

/// Closed-form Ricci:
///   Ric - [(n-1)a+c] Hess(u) + [(n-1)a^2-c^2] du (x) du
///       + { c Lap(u) + c[(n-1)a+c] |grad u|^2 } g
/// with a = alpha, c = gamma, assembled from metric-connection pieces.
Eigen::MatrixXd ricci_D_closed_at(const AffineConnection& conn,
                                  std::span<const double> p);

/// V^{gamma-alpha} * (metric gradient), index raised.
Eigen::VectorXd d_gradient_at(const AffineConnection& conn, const Field& f,
                              std::span<const double> p);

/// V^{gamma-alpha} [ Hess(f) + c du (x) df + c df (x) du + a <grad u, grad f> g ],
/// lower indices, symmetric.
Eigen::MatrixXd d_hessian_at(const AffineConnection& conn, const Field& f,
                             std::span<const double> p);

/// Metric trace of the modified Hessian:
/// V^{gamma-alpha} [ Lap(f) + (2c + n a) <grad u, grad f> ].
double d_laplacian_at(const AffineConnection& conn, const Field& f,
                      std::span<const double> p);

/// | V^tau * (D-divergence of W) - metric divergence of V^tau W |.
/// The left side contracts the connection coefficients; the right side
/// differentiates the rescaled field through the metric connection. W holds
/// the n raised components of the vector field.
double weighted_divergence_residual(const AffineConnection& conn,
                                    std::span<const Field> W,
                                    std::span<const double> p);

/// Flux vector Y^i = X^j D_j X^i - X^i D_j X^j with X the modified gradient
/// of f (raised components). Its weighted divergence equals the volume
/// integrand of the exchange identity, so integrating <Y, nu> over the
/// boundary reproduces the volume side without any boundary decomposition.
Eigen::VectorXd bochner_flux_at(const AffineConnection& conn, const Field& f,
                                std::span<const double> p);

/// Pointwise residual of the divergence identity
///   D_i(X^j D_j X^i - X^i D_j X^j)
///     = D_iX^j D_jX^i - (D_jX^j)^2 + Ric^D_{ji} X^i X^j
/// with X the modified gradient of f. Needs f differentiable to order 3.
double bochner_residual_at(const AffineConnection& conn, const Field& f,
                           std::span<const double> p);

/// The two sides of the identity above, plus the same right side assembled
/// from the modified Hessian/Laplacian/Ricci operators instead of the raw
/// coefficient contractions:
///   rhs_tensor = |modified Hessian|^2 - (modified Laplacian)^2 + Ric^D(X,X).
struct BochnerBreakdown {
  double lhs = 0.0;
  double rhs_commutator = 0.0;
  double rhs_tensor = 0.0;
};

BochnerBreakdown bochner_breakdown_at(const AffineConnection& conn, const Field& f,
                                      std::span<const double> p);

/// Triple with metric e^{2 s u} g and weight exponent replaced by `u_src`
/// (the geometry absorbs the old weight conformally).
RiemannianTriple conformally_rescaled(const RiemannianTriple& T, double s,
                                      std::string_view u_src = "0");

}  // namespace affgeo
