#include "affgeo/connection.hpp"

#include <cmath>

namespace affgeo {

ConnectionParams ConnectionParams::make(double alpha, double gamma, int dim) {
  if (dim < 1) throw Error("dimension must be >= 1");
  return {alpha, gamma, dim, (dim + 1) * alpha + gamma};
}

AffineConnection AffineConnection::make(RiemannianTriple T, double alpha,
                                        double gamma) {
  ConnectionParams params = ConnectionParams::make(alpha, gamma, T.dim);
  return {std::move(T), params};
}

namespace {

struct WeightJet {
  double u = 0.0;
  Eigen::VectorXd du;        // u_i
  Eigen::MatrixXd ddu;       // u_ij
};

WeightJet weight_jet_at(const RiemannianTriple& T, std::span<const double> p,
                        int order) {
  const int n = T.dim;
  WeightJet w;
  w.u = T.u.eval(p);
  w.du.resize(n);
  for (int i = 0; i < n; ++i) w.du(i) = T.u.eval_partial({i + 1}, p);
  if (order >= 2) {
    w.ddu.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double v = T.u.eval_partial({i + 1, j + 1}, p);
        w.ddu(i, j) = v;
        w.ddu(j, i) = v;
      }
  }
  return w;
}

}  // namespace

ConnectionCoeffs connection_coeffs_at(const AffineConnection& conn,
                                      std::span<const double> p, int order) {
  const int n = conn.triple.dim;
  const double a = conn.params.alpha;
  const double c = conn.params.gamma;

  MetricJet J = metric_jet_at(conn.triple, p, order);
  WeightJet w = weight_jet_at(conn.triple, p, order);

  Eigen::VectorXd gradu = J.g_inv * w.du;  // (grad u)^k

  ConnectionCoeffs out;
  out.n = n;
  out.C.assign(n, Eigen::MatrixXd(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.C[k](i, j) = J.Gamma[k](i, j) + a * w.du(i) * (k == j) +
                         a * w.du(j) * (k == i) + c * J.g(i, j) * gradu(k);

  if (order < 2) return out;

  // d_m (grad u)^k = d_m g^{kl} u_l + g^{kl} u_{lm}
  std::vector<Eigen::VectorXd> dgradu(n);
  for (int m = 0; m < n; ++m) dgradu[m] = J.dginv[m] * w.du + J.g_inv * w.ddu.col(m);

  out.dC.assign(n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd(n, n)));
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          out.dC[m][k](i, j) =
              J.dGamma[m][k](i, j) + a * w.ddu(i, m) * (k == j) +
              a * w.ddu(j, m) * (k == i) +
              c * (J.dg[m](i, j) * gradu(k) + J.g(i, j) * dgradu[m](k));
  return out;
}

std::vector<Eigen::MatrixXd> torsion_at(const AffineConnection& conn,
                                        std::span<const double> p) {
  ConnectionCoeffs cc = connection_coeffs_at(conn, p, 1);
  std::vector<Eigen::MatrixXd> t(cc.n);
  for (int k = 0; k < cc.n; ++k) t[k] = cc.C[k] - cc.C[k].transpose();
  return t;
}

Eigen::MatrixXd ricci_D_direct_at(const AffineConnection& conn,
                                  std::span<const double> p) {
  ConnectionCoeffs cc = connection_coeffs_at(conn, p, 2);
  const int n = cc.n;
  // Ric_jk = dC[i][i](j,k) - dC[j][i](i,k) + C[i](i,m)C[m](j,k)
  //        - C[i](j,m)C[m](i,k), summed over i (and m).
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += cc.dC[i][i](j, k) - cc.dC[j][i](i, k);
        for (int m = 0; m < n; ++m)
          acc += cc.C[i](i, m) * cc.C[m](j, k) - cc.C[i](j, m) * cc.C[m](i, k);
      }
      ric(j, k) = acc;
    }
  return ric;
}

Eigen::MatrixXd ricci_D_closed_at(const AffineConnection& conn,
                                  std::span<const double> p) {
  const int n = conn.triple.dim;
  const double a = conn.params.alpha;
  const double c = conn.params.gamma;

  MetricData m = metric_at(conn.triple, p);
  Eigen::MatrixXd ric = ricci_at(conn.triple, p);
  Eigen::MatrixXd hess_u = hessian_at(conn.triple, conn.triple.u, p);
  double lap_u = (m.g_inv * hess_u).trace();

  Eigen::VectorXd du(n);
  for (int i = 0; i < n; ++i) du(i) = conn.triple.u.eval_partial({i + 1}, p);
  double grad_u_sq = du.dot(m.g_inv * du);

  double k1 = (n - 1) * a + c;
  double k2 = (n - 1) * a * a - c * c;
  double k3 = c * lap_u + c * k1 * grad_u_sq;

  return ric - k1 * hess_u + k2 * (du * du.transpose()) + k3 * m.g;
}

Eigen::VectorXd d_gradient_at(const AffineConnection& conn, const Field& f,
                              std::span<const double> p) {
  double scale = std::exp((conn.params.gamma - conn.params.alpha) *
                          conn.triple.u.eval(p));
  return scale * grad_at(conn.triple, f, p);
}

Eigen::MatrixXd d_hessian_at(const AffineConnection& conn, const Field& f,
                             std::span<const double> p) {
  const int n = conn.triple.dim;
  const double a = conn.params.alpha;
  const double c = conn.params.gamma;

  MetricData m = metric_at(conn.triple, p);
  Eigen::MatrixXd H = hessian_at(conn.triple, f, p);
  Eigen::VectorXd du(n), df(n);
  for (int i = 0; i < n; ++i) {
    du(i) = conn.triple.u.eval_partial({i + 1}, p);
    df(i) = f.eval_partial({i + 1}, p);
  }
  double pairing = du.dot(m.g_inv * df);  // <grad u, grad f>
  double scale = std::exp((c - a) * conn.triple.u.eval(p));

  Eigen::MatrixXd out = H + c * (du * df.transpose() + df * du.transpose()) +
                        a * pairing * m.g;
  return scale * out;
}

double d_laplacian_at(const AffineConnection& conn, const Field& f,
                      std::span<const double> p) {
  const int n = conn.triple.dim;
  const double a = conn.params.alpha;
  const double c = conn.params.gamma;

  MetricData m = metric_at(conn.triple, p);
  double lap = laplacian_at(conn.triple, f, p);
  Eigen::VectorXd du(n), df(n);
  for (int i = 0; i < n; ++i) {
    du(i) = conn.triple.u.eval_partial({i + 1}, p);
    df(i) = f.eval_partial({i + 1}, p);
  }
  double pairing = du.dot(m.g_inv * df);
  double scale = std::exp((c - a) * conn.triple.u.eval(p));
  return scale * (lap + (2 * c + n * a) * pairing);
}

double weighted_divergence_residual(const AffineConnection& conn,
                                    std::span<const Field> W,
                                    std::span<const double> p) {
  const int n = conn.triple.dim;
  if (static_cast<int>(W.size()) != n)
    throw Error("vector field needs one component per coordinate");
  const double tau = conn.params.tau;

  ConnectionCoeffs cc = connection_coeffs_at(conn, p, 1);
  MetricJet J = metric_jet_at(conn.triple, p, 1);
  double V_tau = std::exp(tau * conn.triple.u.eval(p));

  // Left: V^tau * D_i W^i with the D-divergence contracted from the
  // connection coefficients.
  double divD = 0.0;
  for (int i = 0; i < n; ++i) {
    divD += W[i].eval_partial({i + 1}, p);
    for (int m = 0; m < n; ++m) divD += cc.C[i](i, m) * W[m].eval(p);
  }
  double lhs = V_tau * divD;

  // Right: metric divergence of Z = V^tau W, differentiating the rescaled
  // components symbolically so the product rule is exact.
  ExprPtr vtau = make_call(Func::Exp, make_mul(make_const(tau), conn.triple.u.expr()));
  double rhs = 0.0;
  for (int i = 0; i < n; ++i) {
    Field Zi(make_mul(vtau, W[i].expr()), n);
    rhs += Zi.eval_partial({i + 1}, p);
    for (int m = 0; m < n; ++m) {
      Field Zm(make_mul(vtau, W[m].expr()), n);
      rhs += J.Gamma[i](i, m) * Zm.eval(p);
    }
  }
  return std::abs(lhs - rhs);
}

namespace {

struct BochnerSides {
  double lhs;
  double rhs;
};

BochnerSides bochner_sides_at(const AffineConnection& conn, const Field& f,
                              std::span<const double> p) {
  const int n = conn.triple.dim;
  const double a = conn.params.alpha;
  const double c = conn.params.gamma;
  const double scale_exp = c - a;

  ConnectionCoeffs cc = connection_coeffs_at(conn, p, 2);
  MetricJet J = metric_jet_at(conn.triple, p, 2);
  WeightJet w = weight_jet_at(conn.triple, p, 2);

  // Second derivatives of the inverse metric from the stored jet pieces:
  // d_a d_b g^{-1} = g^{-1} (d_b g) g^{-1} (d_a g) g^{-1}
  //                - g^{-1} (d_a d_b g) g^{-1}
  //                + g^{-1} (d_a g) g^{-1} (d_b g) g^{-1}
  std::vector<std::vector<Eigen::MatrixXd>> ddginv(
      n, std::vector<Eigen::MatrixXd>(n));
  for (int A = 0; A < n; ++A)
    for (int B = A; B < n; ++B) {
      Eigen::MatrixXd t = J.g_inv * J.dg[B] * J.g_inv * J.dg[A] * J.g_inv -
                          J.g_inv * J.ddg[A][B] * J.g_inv +
                          J.g_inv * J.dg[A] * J.g_inv * J.dg[B] * J.g_inv;
      ddginv[A][B] = t;
      ddginv[B][A] = t;
    }

  // f-derivatives up to order 3.
  Eigen::VectorXd df(n);
  Eigen::MatrixXd ddf(n, n);
  std::vector<Eigen::MatrixXd> dddf(n, Eigen::MatrixXd(n, n));
  for (int i = 0; i < n; ++i) df(i) = f.eval_partial({i + 1}, p);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = f.eval_partial({i + 1, j + 1}, p);
      ddf(i, j) = v;
      ddf(j, i) = v;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        dddf[i](j, k) = f.eval_partial({i + 1, j + 1, k + 1}, p);

  // Raised gradient S^i = g^{ij} f_j and its exact derivatives.
  Eigen::VectorXd S = J.g_inv * df;
  std::vector<Eigen::VectorXd> dS(n);
  for (int A = 0; A < n; ++A) dS[A] = J.dginv[A] * df + J.g_inv * ddf.col(A);
  std::vector<std::vector<Eigen::VectorXd>> ddS(n, std::vector<Eigen::VectorXd>(n));
  for (int A = 0; A < n; ++A)
    for (int B = 0; B < n; ++B) {
      Eigen::VectorXd t = ddginv[A][B] * df + J.dginv[A] * ddf.col(B) +
                          J.dginv[B] * ddf.col(A);
      for (int i = 0; i < n; ++i) {
        double third = 0.0;
        for (int j = 0; j < n; ++j) third += J.g_inv(i, j) * dddf[A](B, j);
        t(i) += third;
      }
      ddS[A][B] = t;
    }

  // X = e^{(c-a)u} S and its derivatives via the product rule.
  double T = std::exp(scale_exp * w.u);
  Eigen::VectorXd X = T * S;
  std::vector<Eigen::VectorXd> dX(n);
  for (int A = 0; A < n; ++A) dX[A] = T * (scale_exp * w.du(A) * S + dS[A]);
  std::vector<std::vector<Eigen::VectorXd>> ddX(n, std::vector<Eigen::VectorXd>(n));
  for (int A = 0; A < n; ++A)
    for (int B = 0; B < n; ++B)
      ddX[A][B] = T * (scale_exp * w.du(B) * (scale_exp * w.du(A) * S + dS[A]) +
                       scale_exp * w.ddu(A, B) * S + scale_exp * w.du(A) * dS[B] +
                       ddS[A][B]);

  // A(j,i) = D_i X^j = d_i X^j + C^j_{im} X^m, and its derivatives.
  Eigen::MatrixXd Amat(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double acc = dX[i](j);
      for (int m = 0; m < n; ++m) acc += cc.C[j](i, m) * X(m);
      Amat(j, i) = acc;
    }
  double divDX = Amat.trace();

  std::vector<Eigen::MatrixXd> dA(n, Eigen::MatrixXd(n, n));  // dA[a](j,i)
  for (int A = 0; A < n; ++A)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double acc = ddX[i][A](j);
        for (int m = 0; m < n; ++m)
          acc += cc.dC[A][j](i, m) * X(m) + cc.C[j](i, m) * dX[A](m);
        dA[A](j, i) = acc;
      }

  // Y^i = X^j A(i,j) - X^i divDX; left side is its D-divergence.
  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += X(j) * Amat(i, j);
    Y(i) = acc - X(i) * divDX;
  }

  Eigen::VectorXd ddivDX(n);
  for (int A = 0; A < n; ++A) ddivDX(A) = dA[A].trace();

  double lhs = 0.0;
  for (int i = 0; i < n; ++i) {
    // d_i Y^i
    double dYi = -dX[i](i) * divDX - X(i) * ddivDX(i);
    for (int j = 0; j < n; ++j) dYi += dX[i](j) * Amat(i, j) + X(j) * dA[i](i, j);
    lhs += dYi;
    for (int k = 0; k < n; ++k) lhs += cc.C[i](i, k) * Y(k);
  }

  Eigen::MatrixXd ricD = ricci_D_direct_at(conn, p);
  double rhs = -divDX * divDX;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      rhs += Amat(j, i) * Amat(i, j) + ricD(j, i) * X(i) * X(j);

  return {lhs, rhs};
}

}  // namespace

Eigen::VectorXd bochner_flux_at(const AffineConnection& conn, const Field& f,
                                std::span<const double> p) {
  const int n = conn.triple.dim;
  const double scale_exp = conn.params.gamma - conn.params.alpha;

  ConnectionCoeffs cc = connection_coeffs_at(conn, p, 1);
  MetricJet J = metric_jet_at(conn.triple, p, 1);
  WeightJet w = weight_jet_at(conn.triple, p, 1);
  std::vector<Eigen::MatrixXd> dginv(n);
  for (int A = 0; A < n; ++A) dginv[A] = -J.g_inv * J.dg[A] * J.g_inv;

  Eigen::VectorXd df(n);
  Eigen::MatrixXd ddf(n, n);
  for (int i = 0; i < n; ++i) df(i) = f.eval_partial({i + 1}, p);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = f.eval_partial({i + 1, j + 1}, p);
      ddf(i, j) = v;
      ddf(j, i) = v;
    }

  Eigen::VectorXd S = J.g_inv * df;
  double T = std::exp(scale_exp * w.u);
  Eigen::VectorXd X = T * S;
  std::vector<Eigen::VectorXd> dX(n);
  for (int A = 0; A < n; ++A)
    dX[A] = T * (scale_exp * w.du(A) * S + dginv[A] * df + J.g_inv * ddf.col(A));

  Eigen::MatrixXd Amat(n, n);  // A(j,i) = D_i X^j
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double acc = dX[i](j);
      for (int m = 0; m < n; ++m) acc += cc.C[j](i, m) * X(m);
      Amat(j, i) = acc;
    }
  double divDX = Amat.trace();

  Eigen::VectorXd Y(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += X(j) * Amat(i, j);
    Y(i) = acc - X(i) * divDX;
  }
  return Y;
}

double bochner_residual_at(const AffineConnection& conn, const Field& f,
                           std::span<const double> p) {
  BochnerSides s = bochner_sides_at(conn, f, p);
  return std::abs(s.lhs - s.rhs);
}

BochnerBreakdown bochner_breakdown_at(const AffineConnection& conn, const Field& f,
                                      std::span<const double> p) {
  BochnerSides s = bochner_sides_at(conn, f, p);
  MetricData m = metric_at(conn.triple, p);
  Eigen::MatrixXd B = d_hessian_at(conn, f, p);
  double lap = d_laplacian_at(conn, f, p);
  Eigen::VectorXd X = d_gradient_at(conn, f, p);
  Eigen::MatrixXd mixed = m.g_inv * B;
  double hess_sq = (mixed * mixed).trace();
  double ric_term = X.dot(ricci_D_closed_at(conn, p) * X);
  return {s.lhs, s.rhs, hess_sq - lap * lap + ric_term};
}

RiemannianTriple conformally_rescaled(const RiemannianTriple& T, double s,
                                      std::string_view u_src) {
  const int n = T.dim;
  ExprPtr factor =
      make_call(Func::Exp, make_mul(make_const(2.0 * s), T.u.expr()));
  std::vector<std::vector<Field>> g(n, std::vector<Field>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g[i][j] = Field(make_mul(factor, T.g[i][j].expr()), n);
  return RiemannianTriple::make(n, std::move(g), Field::parse(u_src, n), T.box);
}

}  // namespace affgeo
