#include "affgeo/triple.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace affgeo {

RiemannianTriple RiemannianTriple::make(int dim, std::vector<std::vector<Field>> g,
                                        Field u,
                                        std::vector<std::array<double, 2>> box) {
  if (dim < 1) throw Error("dimension must be >= 1");
  if (static_cast<int>(g.size()) != dim) throw Error("metric row count != dim");
  for (const auto& row : g)
    if (static_cast<int>(row.size()) != dim) throw Error("metric column count != dim");
  if (static_cast<int>(box.size()) != dim) throw Error("chart box size != dim");
  for (const auto& iv : box)
    if (!(iv[0] < iv[1])) throw Error("chart box interval must be nonempty");
  for (const auto& row : g)
    for (const auto& entry : row)
      if (!entry.valid() || entry.dim() != dim)
        throw Error("metric entry has wrong coordinate dimension");
  if (!u.valid() || u.dim() != dim) throw Error("weight exponent has wrong dimension");

  RiemannianTriple T{dim, std::move(g), std::move(u), std::move(box)};

  // Symmetry check by sampling a few interior points.
  std::vector<double> p = T.center();
  for (int trial = 0; trial < 3; ++trial) {
    for (int a = 0; a < dim; ++a) {
      double lo = T.box[a][0], hi = T.box[a][1];
      double t = 0.25 + 0.23 * trial;
      p[a] = lo + t * (hi - lo);
    }
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) {
        double gij = T.g[i][j].eval(p);
        double gji = T.g[j][i].eval(p);
        if (std::abs(gij - gji) > 1e-12 * (1 + std::abs(gij)))
          throw Error("metric is not symmetric");
      }
  }
  return T;
}

bool RiemannianTriple::contains(std::span<const double> p, double tol) const {
  if (static_cast<int>(p.size()) != dim) return false;
  for (int a = 0; a < dim; ++a) {
    double span = box[a][1] - box[a][0];
    if (p[a] < box[a][0] - tol * span || p[a] > box[a][1] + tol * span) return false;
  }
  return true;
}

void RiemannianTriple::require_inside(std::span<const double> p) const {
  if (!contains(p)) throw Error("point outside chart box");
}

std::vector<double> RiemannianTriple::center() const {
  std::vector<double> c(dim);
  for (int a = 0; a < dim; ++a) c[a] = 0.5 * (box[a][0] + box[a][1]);
  return c;
}

namespace {

Eigen::MatrixXd eval_metric(const RiemannianTriple& T, std::span<const double> p) {
  Eigen::MatrixXd g(T.dim, T.dim);
  for (int i = 0; i < T.dim; ++i)
    for (int j = 0; j < T.dim; ++j) g(i, j) = T.g[i][j].eval(p);
  return 0.5 * (g + g.transpose());
}

}  // namespace

MetricData metric_at(const RiemannianTriple& T, std::span<const double> p) {
  T.require_inside(p);
  MetricData m;
  m.g = eval_metric(T, p);
  Eigen::LLT<Eigen::MatrixXd> llt(m.g);
  if (llt.info() != Eigen::Success)
    throw Error("metric is not positive definite at the evaluation point");
  m.g_inv = llt.solve(Eigen::MatrixXd::Identity(T.dim, T.dim));
  double det = 1.0;
  for (int i = 0; i < T.dim; ++i) det *= llt.matrixLLT()(i, i);
  m.sqrt_det = det;  // product of Cholesky diagonal = sqrt(det g)
  return m;
}

MetricJet metric_jet_at(const RiemannianTriple& T, std::span<const double> p,
                        int order) {
  MetricData base = metric_at(T, p);
  const int n = T.dim;
  MetricJet J;
  J.n = n;
  J.g = base.g;
  J.g_inv = base.g_inv;
  J.sqrt_det = base.sqrt_det;

  J.dg.assign(n, Eigen::MatrixXd(n, n));
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        J.dg[a](i, j) = T.g[i][j].eval_partial({a + 1}, p);
  for (auto& m : J.dg) m = 0.5 * (m + m.transpose()).eval();

  // Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
  J.Gamma.assign(n, Eigen::MatrixXd::Zero(n, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l)
          acc += J.g_inv(k, l) * (J.dg[i](j, l) + J.dg[j](i, l) - J.dg[l](i, j));
        J.Gamma[k](i, j) = 0.5 * acc;
      }

  if (order < 2) return J;

  J.dginv.assign(n, Eigen::MatrixXd(n, n));
  for (int a = 0; a < n; ++a) J.dginv[a] = -J.g_inv * J.dg[a] * J.g_inv;

  J.ddg.assign(n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd(n, n)));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Eigen::MatrixXd m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          m(i, j) = T.g[i][j].eval_partial({a + 1, b + 1}, p);
      m = 0.5 * (m + m.transpose()).eval();
      J.ddg[a][b] = m;
      J.ddg[b][a] = m;
    }

  // d_m Gamma^k_ij = 1/2 d_m g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
  //                + 1/2 g^{kl}     (d_m d_i g_jl + d_m d_j g_il - d_m d_l g_ij)
  J.dGamma.assign(n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n)));
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double acc = 0.0;
          for (int l = 0; l < n; ++l) {
            acc += J.dginv[m](k, l) *
                   (J.dg[i](j, l) + J.dg[j](i, l) - J.dg[l](i, j));
            acc += J.g_inv(k, l) * (J.ddg[m][i](j, l) + J.ddg[m][j](i, l) -
                                    J.ddg[m][l](i, j));
          }
          J.dGamma[m][k](i, j) = 0.5 * acc;
        }
  return J;
}

std::vector<Eigen::MatrixXd> christoffel_at(const RiemannianTriple& T,
                                            std::span<const double> p) {
  return metric_jet_at(T, p, 1).Gamma;
}

CurvatureTensor riemann_lc_at(const RiemannianTriple& T, std::span<const double> p) {
  MetricJet J = metric_jet_at(T, p, 2);
  const int n = J.n;
  CurvatureTensor R;
  R.n = n;
  R.data.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
  // riem(l,i,j,k) = d_i Gamma^l_jk - d_j Gamma^l_ik
  //              + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double acc = J.dGamma[i][l](j, k) - J.dGamma[j][l](i, k);
          for (int m = 0; m < n; ++m)
            acc += J.Gamma[l](i, m) * J.Gamma[m](j, k) -
                   J.Gamma[l](j, m) * J.Gamma[m](i, k);
          R.at(l, i, j, k) = acc;
        }
  return R;
}

Eigen::MatrixXd ricci_at(const RiemannianTriple& T, std::span<const double> p) {
  CurvatureTensor R = riemann_lc_at(T, p);
  const int n = R.n;
  Eigen::MatrixXd ric(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += R(i, i, j, k);
      ric(j, k) = acc;
    }
  return 0.5 * (ric + ric.transpose()).eval();
}

Eigen::VectorXd grad_at(const RiemannianTriple& T, const Field& f,
                        std::span<const double> p) {
  MetricData m = metric_at(T, p);
  Eigen::VectorXd df(T.dim);
  for (int i = 0; i < T.dim; ++i) df(i) = f.eval_partial({i + 1}, p);
  return m.g_inv * df;
}

Eigen::MatrixXd hessian_at(const RiemannianTriple& T, const Field& f,
                           std::span<const double> p) {
  MetricJet J = metric_jet_at(T, p, 1);
  const int n = J.n;
  Eigen::VectorXd df(n);
  for (int i = 0; i < n; ++i) df(i) = f.eval_partial({i + 1}, p);
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = f.eval_partial({i + 1, j + 1}, p);
      for (int k = 0; k < n; ++k) acc -= J.Gamma[k](i, j) * df(k);
      H(i, j) = acc;
    }
  return 0.5 * (H + H.transpose()).eval();
}

double laplacian_at(const RiemannianTriple& T, const Field& f,
                    std::span<const double> p) {
  MetricData m = metric_at(T, p);
  Eigen::MatrixXd H = hessian_at(T, f, p);
  return (m.g_inv * H).trace();
}

}  // namespace affgeo
