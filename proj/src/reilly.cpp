#include "affgeo/reilly.hpp"

#include <cmath>

namespace affgeo {

namespace {

/// Boundary fields restricted once per patch so their derivative caches are
/// shared by every node on that patch.
struct FrameFields {
  Field phi_r;    // phi pulled back to the boundary parameters
  Field phi_nu;   // normal derivative of phi, as a boundary field
  Field psi;      // e^{gamma u} * phi_nu on the boundary
};

std::vector<FrameFields> prepare_frames(const DomainAssembly& A,
                                        const ConnectionParams& params,
                                        const Field& phi) {
  std::vector<FrameFields> out;
  out.reserve(A.frames.size());
  for (const BoundaryFrame& F : A.frames) {
    FrameFields ff;
    ff.phi_r = F.restrict_field(phi);
    ff.phi_nu = F.normal_derivative_field(phi);
    const Field& u_r = F.induced_triple().u;
    ExprPtr weight = make_call(Func::Exp, make_mul(make_const(params.gamma),
                                                   u_r.expr()));
    ff.psi = Field(make_mul(weight, ff.phi_nu.expr()), F.boundary_dim());
    out.push_back(std::move(ff));
  }
  return out;
}

void check_inputs(const AffineConnection& C, const DomainAssembly& A,
                  const Field& phi) {
  if (C.triple.dim != A.triple.dim)
    throw Error("connection and domain assembly dimensions differ");
  if (phi.dim() != A.triple.dim)
    throw Error("test function dimension does not match the domain");
}

}  // namespace

std::map<std::string, double> evaluate_lhs(const AffineConnection& C,
                                           const DomainAssembly& A,
                                           const Field& phi) {
  check_inputs(C, A, phi);
  const double tau = C.params.tau;
  std::vector<double> t_lap, t_hess, t_ric;
  t_lap.reserve(A.volume_nodes.size());
  t_hess.reserve(A.volume_nodes.size());
  t_ric.reserve(A.volume_nodes.size());
  for (const VolumeNode& node : A.volume_nodes) {
    const auto& x = node.x;
    double Vt = std::exp(tau * A.triple.u.eval(x));
    double dl = d_laplacian_at(C, phi, x);
    Eigen::MatrixXd H = d_hessian_at(C, phi, x);
    Eigen::MatrixXd R = ricci_D_closed_at(C, x);
    Eigen::VectorXd X = d_gradient_at(C, phi, x);
    Eigen::MatrixXd Hup = metric_at(A.triple, x).g_inv * H;
    double hess2 = (Hup * Hup).trace();
    t_lap.push_back(node.w * Vt * dl * dl);
    t_hess.push_back(-node.w * Vt * hess2);
    t_ric.push_back(-node.w * Vt * X.dot(R * X));
  }
  return {{"laplacian_sq", pairwise_sum(t_lap)},
          {"hessian_sq", pairwise_sum(t_hess)},
          {"ricci_form", pairwise_sum(t_ric)}};
}

std::map<std::string, double> evaluate_rhs(const AffineConnection& C,
                                           const DomainAssembly& A,
                                           const Field& phi) {
  check_inputs(C, A, phi);
  const double alpha = C.params.alpha;
  const double gamma = C.params.gamma;
  const double tau = C.params.tau;
  std::vector<FrameFields> ff = prepare_frames(A, C.params, phi);

  std::vector<double> t_mean, t_form, t_mixed;
  t_mean.reserve(A.boundary_nodes.size());
  t_form.reserve(A.boundary_nodes.size());
  t_mixed.reserve(A.boundary_nodes.size());
  for (const BoundaryNode& node : A.boundary_nodes) {
    const BoundaryFrame& F = A.frames[node.patch];
    const FrameFields& f = ff[node.patch];
    const RiemannianTriple& induced = F.induced_triple();
    const auto& q = node.q;

    double uq = induced.u.eval(q);
    double Vt = std::exp(tau * uq);
    double scale = std::exp((gamma - alpha) * uq);

    double dphinu = scale * f.phi_nu.eval(q);
    double HD = affine_mean_curvature(node.shape, C.params);
    t_mean.push_back(node.w * Vt * HD * dphinu * dphinu);

    Eigen::VectorXd dgrad_phi = scale * grad_at(induced, f.phi_r, q);
    Eigen::MatrixXd form =
        node.shape.h - gamma * node.shape.u_nu * node.shape.g_ind;
    t_form.push_back(node.w * Vt * dgrad_phi.dot(form * dgrad_phi));

    Eigen::VectorXd dgrad_psi = scale * grad_at(induced, f.psi, q);
    double inner = dgrad_phi.dot(node.shape.g_ind * dgrad_psi);
    t_mixed.push_back(-2.0 * node.w * Vt * std::exp(-gamma * uq) * inner);
  }
  return {{"mean_curvature", pairwise_sum(t_mean)},
          {"boundary_form", pairwise_sum(t_form)},
          {"mixed_tangential", pairwise_sum(t_mixed)}};
}

ReillyReport verify_identity(const AffineConnection& C, const DomainAssembly& A,
                             const Field& phi) {
  ReillyReport r;
  r.lhs_terms = evaluate_lhs(C, A, phi);
  r.rhs_terms = evaluate_rhs(C, A, phi);
  r.quadrature_order = A.order;
  double max_term = 0.0;
  for (const auto& [name, v] : r.lhs_terms) {
    r.lhs += v;
    max_term = std::max(max_term, std::abs(v));
  }
  for (const auto& [name, v] : r.rhs_terms) {
    r.rhs += v;
    max_term = std::max(max_term, std::abs(v));
  }
  r.residual = std::abs(r.lhs - r.rhs);
  r.relative_residual = r.residual / (1.0 + max_term);
  return r;
}

double classical_boundary_rewrite(const AffineConnection& C,
                                  const DomainAssembly& A, const Field& phi) {
  check_inputs(C, A, phi);
  if (C.params.alpha != 0.0 || C.params.gamma != 0.0)
    throw Error("the rewritten boundary side is the unweighted special case");
  std::vector<FrameFields> ff = prepare_frames(A, C.params, phi);
  std::vector<double> terms;
  terms.reserve(A.boundary_nodes.size());
  for (const BoundaryNode& node : A.boundary_nodes) {
    const BoundaryFrame& F = A.frames[node.patch];
    const FrameFields& f = ff[node.patch];
    const RiemannianTriple& induced = F.induced_triple();
    const auto& q = node.q;

    double phinu = f.phi_nu.eval(q);
    Eigen::VectorXd grad_phi = grad_at(induced, f.phi_r, q);
    double hterm = grad_phi.dot(node.shape.h * grad_phi);
    double lap_s = laplacian_at(induced, f.phi_r, q);
    terms.push_back(node.w * (node.shape.H * phinu * phinu + hterm +
                              2.0 * phinu * lap_s));
  }
  return pairwise_sum(terms);
}

double lhs_via_flux(const AffineConnection& C, const DomainAssembly& A,
                    const Field& phi) {
  check_inputs(C, A, phi);
  const double tau = C.params.tau;
  std::vector<double> terms;
  terms.reserve(A.boundary_nodes.size());
  for (const BoundaryNode& node : A.boundary_nodes) {
    const BoundaryFrame& F = A.frames[node.patch];
    std::vector<double> pt = F.ambient_point(node.q);
    Eigen::VectorXd Y = bochner_flux_at(C, phi, pt);
    MetricData M = metric_at(A.triple, pt);
    double Vt = std::exp(tau * A.triple.u.eval(pt));
    terms.push_back(-node.w * Vt * Y.dot(M.g * node.shape.nu));
  }
  return pairwise_sum(terms);
}

ConformalCheck conformal_crosscheck(const DomainAssembly& A, double s,
                                    const Field& phi) {
  ConformalCheck out;
  AffineConnection weighted = AffineConnection::make(A.triple, s, -s);
  out.weighted = verify_identity(weighted, A, phi);

  RiemannianTriple rescaled = conformally_rescaled(A.triple, s);
  DomainAssembly Ar = build_domain(rescaled, A.spec, A.order);
  AffineConnection classical = AffineConnection::make(rescaled, 0.0, 0.0);
  out.classical = verify_identity(classical, Ar, phi);
  return out;
}

}  // namespace affgeo
