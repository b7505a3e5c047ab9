#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "affgeo/expr.hpp"

namespace affgeo {

/// A chart description of a weighted Riemannian manifold: metric components
/// g_ij as exact expressions, weight exponent u (V = e^u), and the open
/// coordinate box on which the chart is valid.
struct RiemannianTriple {
  int dim = 0;
  std::vector<std::vector<Field>> g;        // dim x dim, symmetric
  Field u;
  std::vector<std::array<double, 2>> box;   // per-coordinate interval

  /// Validates shape and symmetry (by sampling); throws Error on failure.
  static RiemannianTriple make(int dim, std::vector<std::vector<Field>> g,
                               Field u, std::vector<std::array<double, 2>> box);

  bool contains(std::span<const double> p, double tol = 1e-9) const;
  void require_inside(std::span<const double> p) const;

  /// Midpoint of the chart box.
  std::vector<double> center() const;
};

struct MetricData {
  Eigen::MatrixXd g;
  Eigen::MatrixXd g_inv;
  double sqrt_det = 0.0;
};

/// Metric and Christoffel data with exact coordinate derivatives, evaluated
/// at a single point. `order` >= 1 fills Gamma; >= 2 fills the derivative
/// blocks dGamma/ddg/dginv as well.
struct MetricJet {
  int n = 0;
  Eigen::MatrixXd g, g_inv;
  double sqrt_det = 0.0;
  std::vector<Eigen::MatrixXd> dg;                // [a](i,j) = d_a g_ij
  std::vector<Eigen::MatrixXd> dginv;             // [a](i,j) = d_a g^ij
  std::vector<std::vector<Eigen::MatrixXd>> ddg;  // [a][b](i,j) = d_a d_b g_ij
  std::vector<Eigen::MatrixXd> Gamma;             // [k](i,j)
  std::vector<std::vector<Eigen::MatrixXd>> dGamma;  // [m][k](i,j) = d_m Gamma^k_ij
};

MetricData metric_at(const RiemannianTriple& T, std::span<const double> p);

MetricJet metric_jet_at(const RiemannianTriple& T, std::span<const double> p,
                        int order = 1);

/// Gamma^k_{ij}, indexed [k](i,j).
std::vector<Eigen::MatrixXd> christoffel_at(const RiemannianTriple& T,
                                            std::span<const double> p);

/// Curvature of the metric connection. riem(l,i,j,k) is the coefficient of
/// the l-th coordinate vector in R(e_i,e_j)e_k, antisymmetric in (i,j).
struct CurvatureTensor {
  int n = 0;
  std::vector<double> data;

  double operator()(int l, int i, int j, int k) const {
    return data[((l * n + i) * n + j) * n + k];
  }
  double& at(int l, int i, int j, int k) {
    return data[((l * n + i) * n + j) * n + k];
  }
};

CurvatureTensor riemann_lc_at(const RiemannianTriple& T, std::span<const double> p);

/// Ric_jk = riem(i,i,j,k), symmetric.
Eigen::MatrixXd ricci_at(const RiemannianTriple& T, std::span<const double> p);

/// Gradient with the index raised: (grad f)^i = g^ij d_j f.
Eigen::VectorXd grad_at(const RiemannianTriple& T, const Field& f,
                        std::span<const double> p);

/// Covariant Hessian, lower indices: (H f)_ij = d_i d_j f - Gamma^k_ij d_k f.
Eigen::MatrixXd hessian_at(const RiemannianTriple& T, const Field& f,
                           std::span<const double> p);

/// Metric trace of the covariant Hessian.
double laplacian_at(const RiemannianTriple& T, const Field& f,
                    std::span<const double> p);

}  // namespace affgeo
