#pragma once

#include <map>
#include <string>

#include "affgeo/connection.hpp"
#include "affgeo/domain.hpp"

namespace affgeo {

/// Term-by-term evaluation of the weighted integral identity linking the
/// modified Laplacian, Hessian, and Ricci form over a domain to mean
/// curvature, second fundamental form, and mixed tangential data over its
/// boundary. Both sides are reported with named summands so cancellations
/// stay visible.
struct ReillyReport {
  std::map<std::string, double> lhs_terms;  // laplacian_sq, hessian_sq, ricci_form
  std::map<std::string, double> rhs_terms;  // mean_curvature, boundary_form,
                                            // mixed_tangential
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double relative_residual = 0.0;  // residual / (1 + max |named term|)
  int quadrature_order = 0;
};

/// Volume side: + int V^tau (modified Laplacian)^2
///              - int V^tau |modified Hessian|^2
///              - int V^tau Ric^D(modified gradient, modified gradient).
/// Signed so the side total is the plain sum of the named terms.
std::map<std::string, double> evaluate_lhs(const AffineConnection& C,
                                           const DomainAssembly& A,
                                           const Field& phi);

/// Boundary side: + int V^tau H^D <grad^D phi, nu>^2
///                + int V^tau (h - gamma u_nu g)(tangential grad^D phi, same)
///                - 2 int V^{tau-gamma} <tangential grad^D phi,
///                                       tangential grad^D (V^gamma phi_nu)>
/// with every tangential gradient taken intrinsically on the boundary.
std::map<std::string, double> evaluate_rhs(const AffineConnection& C,
                                           const DomainAssembly& A,
                                           const Field& phi);

ReillyReport verify_identity(const AffineConnection& C, const DomainAssembly& A,
                             const Field& phi);

/// Unweighted boundary side with the mixed term integrated by parts along the
/// closed boundary: int_S [H phi_nu^2 + h(grad phi, grad phi)
///                         + 2 phi_nu Lap_S phi]. Valid at alpha = gamma = 0.
double classical_boundary_rewrite(const AffineConnection& C,
                                  const DomainAssembly& A, const Field& phi);

/// Volume side reproduced through the divergence route: the identity's
/// volume integrand is a weighted divergence, so it equals the boundary flux
/// of the exchange-identity vector (no boundary decomposition involved).
double lhs_via_flux(const AffineConnection& C, const DomainAssembly& A,
                    const Field& phi);

struct ConformalCheck {
  ReillyReport weighted;   // parameters (s, -s) on the original triple
  ReillyReport classical;  // parameters (0, 0) on the rescaled triple
};

/// Run the identity with parameters (s, -s) on A's weighted triple, and
/// independently at (0, 0) on the conformally rescaled triple e^{2su}g over
/// the same domain and order. The two reports must agree side by side.
ConformalCheck conformal_crosscheck(const DomainAssembly& A, double s,
                                    const Field& phi);

}  // namespace affgeo
