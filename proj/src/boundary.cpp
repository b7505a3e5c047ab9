#include "affgeo/boundary.hpp"

#include <cmath>

namespace affgeo {

BoundaryPatch BoundaryPatch::make(std::vector<Field> map,
                                  std::vector<std::array<double, 2>> param_box,
                                  double orientation) {
  if (map.empty()) throw Error("boundary patch needs map components");
  const int n = static_cast<int>(map.size());
  const int m = static_cast<int>(param_box.size());
  if (m != n - 1) throw Error("boundary patch needs n-1 parameters");
  for (const auto& comp : map)
    if (!comp.valid() || comp.dim() != m)
      throw Error("boundary map component has wrong parameter dimension");
  if (orientation != 1.0 && orientation != -1.0)
    throw Error("orientation flag must be +1 or -1");
  return {std::move(map), std::move(param_box), orientation};
}

BoundaryFrame::BoundaryFrame(RiemannianTriple ambient, BoundaryPatch patch)
    : ambient_(std::move(ambient)), patch_(std::move(patch)) {
  n_ = ambient_.dim;
  m_ = n_ - 1;
  if (static_cast<int>(patch_.map.size()) != n_)
    throw Error("boundary map dimension does not match chart");
  if (m_ < 1) throw Error("boundary frames need ambient dimension >= 2");

  // Tangent component expressions d_a y^i.
  tangents_.assign(m_, std::vector<Field>(n_));
  for (int a = 0; a < m_; ++a)
    for (int i = 0; i < n_; ++i) tangents_[a][i] = patch_.map[i].derivative({a + 1});

  // Ambient metric restricted to the patch.
  std::vector<ExprPtr> y(n_);
  for (int i = 0; i < n_; ++i) y[i] = patch_.map[i].expr();
  ExprMatrix gr(n_, std::vector<ExprPtr>(n_));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) gr[i][j] = compose_expr(ambient_.g[i][j].expr(), y);

  // Normal covector c with c(e_a) = 0 by construction.
  std::vector<ExprPtr> c(n_);
  if (n_ == 2) {
    c[0] = tangents_[0][1].expr();
    c[1] = make_neg(tangents_[0][0].expr());
  } else if (n_ == 3) {
    auto e1 = [&](int i) { return tangents_[0][i].expr(); };
    auto e2 = [&](int i) { return tangents_[1][i].expr(); };
    c[0] = make_sub(make_mul(e1(1), e2(2)), make_mul(e1(2), e2(1)));
    c[1] = make_sub(make_mul(e1(2), e2(0)), make_mul(e1(0), e2(2)));
    c[2] = make_sub(make_mul(e1(0), e2(1)), make_mul(e1(1), e2(0)));
  } else {
    throw Error("boundary frames support ambient dimension 2 or 3");
  }

  // Raise the covector and normalize: nu = sign * g^{-1}c / sqrt(c.g^{-1}c).
  ExprMatrix ginv = symbolic_inverse(gr);
  std::vector<ExprPtr> raised(n_);
  for (int i = 0; i < n_; ++i) {
    ExprPtr acc = make_const(0.0);
    for (int j = 0; j < n_; ++j) acc = make_add(acc, make_mul(ginv[i][j], c[j]));
    raised[i] = acc;
  }
  ExprPtr Q = make_const(0.0);
  for (int i = 0; i < n_; ++i) Q = make_add(Q, make_mul(c[i], raised[i]));
  ExprPtr inv_len = make_div(make_const(patch_.orientation), make_call(Func::Sqrt, Q));
  nu_.resize(n_);
  for (int i = 0; i < n_; ++i) nu_[i] = Field(make_mul(inv_len, raised[i]), m_);

  // Induced metric g_ab = e_a^i e_b^j g_ij as an (n-1)-chart.
  std::vector<std::vector<Field>> g_ind(m_, std::vector<Field>(m_));
  for (int a = 0; a < m_; ++a)
    for (int b = 0; b < m_; ++b) {
      ExprPtr acc = make_const(0.0);
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
          acc = make_add(acc, make_mul(make_mul(tangents_[a][i].expr(),
                                                tangents_[b][j].expr()),
                                       gr[i][j]));
      g_ind[a][b] = Field(acc, m_);
    }
  Field u_res(compose_expr(ambient_.u.expr(), y), m_);
  induced_ = RiemannianTriple::make(m_, std::move(g_ind), std::move(u_res),
                                    patch_.param_box);
}

Field BoundaryFrame::restrict_field(const Field& ambient_f) const {
  if (ambient_f.dim() != n_) throw Error("field dimension does not match chart");
  std::vector<ExprPtr> y(n_);
  for (int i = 0; i < n_; ++i) y[i] = patch_.map[i].expr();
  return Field(compose_expr(ambient_f.expr(), y), m_);
}

Field BoundaryFrame::normal_derivative_field(const Field& ambient_f) const {
  if (ambient_f.dim() != n_) throw Error("field dimension does not match chart");
  std::vector<ExprPtr> y(n_);
  for (int i = 0; i < n_; ++i) y[i] = patch_.map[i].expr();
  ExprPtr acc = make_const(0.0);
  for (int i = 0; i < n_; ++i) {
    ExprPtr dfi = compose_expr(ambient_f.derivative({i + 1}).expr(), y);
    acc = make_add(acc, make_mul(nu_[i].expr(), dfi));
  }
  return Field(acc, m_);
}

std::vector<double> BoundaryFrame::ambient_point(std::span<const double> q) const {
  std::vector<double> x(n_);
  for (int i = 0; i < n_; ++i) x[i] = patch_.map[i].eval(q);
  return x;
}

ShapeData shape_at(const BoundaryFrame& F, const ConnectionParams& params,
                   std::span<const double> q) {
  const int n = F.n_;
  const int m = F.m_;

  std::vector<double> x = F.ambient_point(q);
  MetricData amb = metric_at(F.ambient_, x);
  auto Gamma = christoffel_at(F.ambient_, x);

  ShapeData s;
  s.nu.resize(n);
  for (int i = 0; i < n; ++i) s.nu(i) = F.nu_[i].eval(q);

  Eigen::MatrixXd tang(m, n);
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) tang(a, i) = F.tangents_[a][i].eval(q);

  MetricData ind = metric_at(F.induced_, q);
  s.g_ind = ind.g;

  // h_ab = -g(nu, dd_ab y + Gamma(e_a, e_b)); the normal has unit length, so
  // lowering nu against the ambient metric gives the unit conormal.
  Eigen::VectorXd conormal = amb.g * s.nu;
  s.h.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        double second = F.patch_.map[i].eval_partial({a + 1, b + 1}, q);
        double curve = 0.0;
        for (int jdx = 0; jdx < n; ++jdx)
          for (int k = 0; k < n; ++k)
            curve += Gamma[i](jdx, k) * tang(a, jdx) * tang(b, k);
        acc += conormal(i) * (second + curve);
      }
      s.h(a, b) = -acc;
    }
  s.h = 0.5 * (s.h + s.h.transpose()).eval();

  s.H = (ind.g_inv * s.h).trace();

  Eigen::VectorXd du(n);
  for (int i = 0; i < n; ++i) du(i) = F.ambient_.u.eval_partial({i + 1}, x);
  s.u_nu = s.nu.dot(du);
  s.HD = s.H + (n - 1) * params.alpha * s.u_nu;
  return s;
}

ShapeData shape_at(const RiemannianTriple& T, const BoundaryPatch& P,
                   const ConnectionParams& params, std::span<const double> q) {
  BoundaryFrame F(T, P);
  return shape_at(F, params, q);
}

TangentGradient tangential_gradient_at(const BoundaryFrame& F,
                                       const ConnectionParams& params,
                                       const Field& ambient_f,
                                       std::span<const double> q) {
  Field f_res = F.restrict_field(ambient_f);
  TangentGradient out;
  out.grad = grad_at(F.induced_triple(), f_res, q);
  double scale = std::exp((params.gamma - params.alpha) *
                          F.induced_triple().u.eval(q));
  out.d_grad = scale * out.grad;
  return out;
}

Eigen::MatrixXd boundary_form_at(const BoundaryFrame& F,
                                 const ConnectionParams& params,
                                 std::span<const double> q) {
  ShapeData s = shape_at(F, params, q);
  return s.h - params.gamma * s.u_nu * s.g_ind;
}

double umbilicity_defect(const BoundaryFrame& F, std::span<const double> q) {
  ConnectionParams lc = ConnectionParams::make(0.0, 0.0, F.ambient_dim());
  ShapeData s = shape_at(F, lc, q);
  const int m = F.boundary_dim();
  MetricData ind = metric_at(F.induced_triple(), q);
  Eigen::MatrixXd traceless = s.h - (s.H / m) * s.g_ind;
  Eigen::MatrixXd mixed = ind.g_inv * traceless;
  return std::sqrt(std::max(0.0, (mixed * mixed).trace()));
}

double normal_derivative_at(const BoundaryFrame& F, const Field& ambient_f,
                            std::span<const double> q) {
  std::vector<double> x = F.ambient_point(q);
  Eigen::VectorXd df(F.ambient_dim());
  for (int i = 0; i < F.ambient_dim(); ++i)
    df(i) = ambient_f.eval_partial({i + 1}, x);
  Eigen::VectorXd nu(F.ambient_dim());
  for (int i = 0; i < F.ambient_dim(); ++i) nu(i) = F.normal_components()[i].eval(q);
  return nu.dot(df);
}

}  // namespace affgeo
