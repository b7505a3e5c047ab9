#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "affgeo/catalog.hpp"
#include "affgeo/connection.hpp"
#include "test_util.hpp"

using namespace affgeo;
using affgeo::testutil::random_point;

namespace {

const std::vector<std::pair<double, double>>& parameter_pairs(int n) {
  static std::vector<std::pair<double, double>> p2 = {
      {0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, -1.0}, {0.3, 0.7}};
  static std::vector<std::pair<double, double>> p3 = {
      {0.0, 0.0}, {0.0, 1.0}, {0.5, 0.0}, {1.0, -1.0}, {0.3, 0.7}};
  // the third pair is (1/(n-1), 0)
  return n == 2 ? p2 : p3;
}

Field weight_for(const RiemannianTriple& T) {
  return T.dim == 2 ? Field::parse("0.3*x1 + 0.1*sin(x2)", 2)
                    : Field::parse("0.2*x1 + 0.1*sin(x2) + 0.05*x3", 3);
}

}  // namespace

TEST_CASE("connection parameters derive the weight exponent") {
  auto p = ConnectionParams::make(0.25, -0.5, 3);
  CHECK(p.tau == doctest::Approx(4 * 0.25 - 0.5).epsilon(1e-16));
  auto q = ConnectionParams::make(0.0, 1.0, 2);
  CHECK(q.tau == doctest::Approx(1.0).epsilon(1e-16));
}

TEST_CASE("connection coefficients extend the metric connection") {
  auto euc = catalog_triple("euclidean-2", "x1");
  std::vector<double> p{0.3, -0.4};

  auto lc = AffineConnection::make(euc, 0.0, 0.0);
  auto cc0 = connection_coeffs_at(lc, p);
  auto Gamma = christoffel_at(euc, p);
  for (int k = 0; k < 2; ++k)
    CHECK((cc0.C[k] - Gamma[k]).cwiseAbs().maxCoeff() <= 1e-15);

  // u = x1, alpha=1, gamma=0 on flat space: coefficients are pure du terms.
  auto c10 = AffineConnection::make(euc, 1.0, 0.0);
  auto cc1 = connection_coeffs_at(c10, p);
  CHECK(cc1.C[0](0, 0) == doctest::Approx(2).epsilon(1e-15));  // (i,j,k)=(1,1,1)
  CHECK(cc1.C[1](0, 1) == doctest::Approx(1).epsilon(1e-15));  // (1,2,2)
  CHECK(cc1.C[0](1, 1) == doctest::Approx(0).epsilon(1e-15));  // (2,2,1)
  CHECK(cc1.C[1](1, 1) == doctest::Approx(0).epsilon(1e-15));  // (2,2,2)

  auto c01 = AffineConnection::make(euc, 0.0, 1.0);
  auto cc2 = connection_coeffs_at(c01, p);
  CHECK(cc2.C[0](1, 1) == doctest::Approx(1).epsilon(1e-15));  // gamma g_22 (grad u)^1
}

TEST_CASE("torsion vanishes across the family") {
  std::mt19937_64 rng(31);
  for (const auto& name : catalog_triple_names()) {
    auto T = catalog_triple(name);
    T = with_weight(T, weight_for(T).to_string());
    for (auto [a, c] : parameter_pairs(T.dim)) {
      auto conn = AffineConnection::make(T, a, c);
      auto p = random_point(T, rng);
      for (const auto& t : torsion_at(conn, p))
        CHECK(t.cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("commutator Ricci on flat space with linear weight") {
  auto euc = catalog_triple("euclidean-2", "x1");
  std::vector<double> p{0.2, 0.5};

  auto lc = AffineConnection::make(with_weight(euc, "0"), 0.0, 0.0);
  CHECK(ricci_D_direct_at(lc, p).cwiseAbs().maxCoeff() <= 1e-12);

  // alpha=1, gamma=0, u=x1: the closed form collapses to du (x) du.
  auto c10 = AffineConnection::make(euc, 1.0, 0.0);
  Eigen::MatrixXd r10 = ricci_D_direct_at(c10, p);
  Eigen::MatrixXd expect10(2, 2);
  expect10 << 1, 0, 0, 0;
  CHECK((r10 - expect10).cwiseAbs().maxCoeff() <= 1e-12);

  // alpha=0, gamma=1, u=x1: -du (x) du + |grad u|^2 g.
  auto c01 = AffineConnection::make(euc, 0.0, 1.0);
  Eigen::MatrixXd r01 = ricci_D_direct_at(c01, p);
  Eigen::MatrixXd expect01(2, 2);
  expect01 << 0, 0, 0, 1;
  CHECK((r01 - expect01).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("commutator Ricci equals closed form across catalog and parameters") {
  std::mt19937_64 rng(37);
  for (const auto& name : catalog_triple_names()) {
    auto T = catalog_triple(name);
    T = with_weight(T, weight_for(T).to_string());
    for (auto [a, c] : parameter_pairs(T.dim)) {
      auto conn = AffineConnection::make(T, a, c);
      for (int trial = 0; trial < 5; ++trial) {
        auto p = random_point(T, rng);
        Eigen::MatrixXd direct = ricci_D_direct_at(conn, p);
        Eigen::MatrixXd closed = ricci_D_closed_at(conn, p);
        double scale = 1 + closed.cwiseAbs().maxCoeff();
        CHECK((direct - closed).cwiseAbs().maxCoeff() / scale <= 1e-8);
        CHECK((direct - direct.transpose()).cwiseAbs().maxCoeff() / scale <= 1e-8);
      }
    }
  }
}

TEST_CASE("closed form matches independently assembled special cases") {
  std::mt19937_64 rng(41);
  for (const auto& name : {"euclidean-2", "sphere-2", "hyperbolic-3", "warped-2"}) {
    auto T = catalog_triple(name);
    T = with_weight(T, weight_for(T).to_string());
    const int n = T.dim;

    // Build V = e^u as its own field and assemble Ric - Hess(V)/V + (Lap V/V) g.
    Field V(make_call(Func::Exp, T.u.expr()), n);

    for (int trial = 0; trial < 5; ++trial) {
      auto p = random_point(T, rng);
      MetricData m = metric_at(T, p);
      Eigen::MatrixXd ric = ricci_at(T, p);

      double Vp = V.eval(p);
      Eigen::MatrixXd hessV = hessian_at(T, V, p);
      double lapV = (m.g_inv * hessV).trace();
      Eigen::MatrixXd static_form = ric - hessV / Vp + (lapV / Vp) * m.g;

      auto c01 = AffineConnection::make(T, 0.0, 1.0);
      CHECK((ricci_D_closed_at(c01, p) - static_form).cwiseAbs().maxCoeff() <=
            1e-10 * (1 + static_form.cwiseAbs().maxCoeff()));

      // 1/(n-1), 0: Ric - Hess(u) + du (x) du / (n-1).
      Eigen::VectorXd du(n);
      for (int i = 0; i < n; ++i) du(i) = T.u.eval_partial({i + 1}, p);
      Eigen::MatrixXd be_form = ric - hessian_at(T, T.u, p) +
                                (du * du.transpose()) / (n - 1);
      auto cbe = AffineConnection::make(T, 1.0 / (n - 1), 0.0);
      CHECK((ricci_D_closed_at(cbe, p) - be_form).cwiseAbs().maxCoeff() <=
            1e-10 * (1 + be_form.cwiseAbs().maxCoeff()));

      // alpha=gamma=0 reduces to the metric Ricci.
      auto lc = AffineConnection::make(T, 0.0, 0.0);
      CHECK((ricci_D_closed_at(lc, p) - ric).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("opposite-parameter Ricci matches the rescaled-metric pipeline") {
  std::mt19937_64 rng(43);
  for (const auto& name : {"euclidean-2", "sphere-2", "polar-3", "warped-2"}) {
    auto T = catalog_triple(name);
    T = with_weight(T, weight_for(T).to_string());
    for (double a : {1.0, -0.4, 0.25}) {
      auto conn = AffineConnection::make(T, a, -a);
      RiemannianTriple rescaled = conformally_rescaled(T, a);
      for (int trial = 0; trial < 5; ++trial) {
        auto p = random_point(T, rng);
        Eigen::MatrixXd direct = ricci_D_direct_at(conn, p);
        Eigen::MatrixXd conformal = ricci_at(rescaled, p);
        CHECK((direct - conformal).cwiseAbs().maxCoeff() <=
              1e-8 * (1 + conformal.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST_CASE("modified gradient") {
  auto euc = catalog_triple("euclidean-2", "x1");
  Field f = Field::parse("x1", 2);
  std::vector<double> origin{0.0, 0.0};

  auto c = AffineConnection::make(euc, 0.0, 1.0);  // gamma - alpha = 1
  Eigen::VectorXd g1 = d_gradient_at(c, f, origin);
  CHECK(g1(0) == doctest::Approx(1).epsilon(1e-15));
  CHECK(g1(1) == doctest::Approx(0).epsilon(1e-15));

  // Equal parameters: scaling factor is 1 for any weight.
  std::vector<double> p{0.4, 0.9};
  auto ceq = AffineConnection::make(euc, 0.7, 0.7);
  CHECK((d_gradient_at(ceq, f, p) - grad_at(euc, f, p)).cwiseAbs().maxCoeff() <=
        1e-14);

  // Zero weight: reduces to the plain gradient.
  auto T0 = with_weight(euc, "0");
  auto c0 = AffineConnection::make(T0, 0.3, 0.9);
  CHECK((d_gradient_at(c0, f, p) - grad_at(T0, f, p)).cwiseAbs().maxCoeff() <=
        1e-14);
}

TEST_CASE("modified Hessian and Laplacian") {
  auto euc = catalog_triple("euclidean-2", "x1");
  std::vector<double> origin{0.0, 0.0};

  Field phi = Field::parse("x2", 2);
  auto c01 = AffineConnection::make(euc, 0.0, 1.0);
  Eigen::MatrixXd H = d_hessian_at(c01, phi, origin);
  CHECK(H(0, 1) == doctest::Approx(1).epsilon(1e-15));
  CHECK(H(1, 0) == doctest::Approx(1).epsilon(1e-15));

  // Flat weight: both reduce to the metric versions.
  auto T0 = with_weight(euc, "0");
  auto c0 = AffineConnection::make(T0, 0.4, -0.2);
  Field f = Field::parse("sin(x1)*x2^2", 2);
  std::vector<double> p{0.5, 0.8};
  CHECK((d_hessian_at(c0, f, p) - hessian_at(T0, f, p)).cwiseAbs().maxCoeff() <=
        1e-14);
  CHECK(d_laplacian_at(c0, f, p) ==
        doctest::Approx(laplacian_at(T0, f, p)).epsilon(1e-14));

  // u = x1, phi = x1, alpha=0, gamma=1: modified Laplacian is 2 e^{x1}.
  Field x1 = Field::parse("x1", 2);
  for (double t : {-0.3, 0.0, 0.6}) {
    std::vector<double> q{t, 0.1};
    CHECK(d_laplacian_at(c01, x1, q) ==
          doctest::Approx(2 * std::exp(t)).epsilon(1e-14));
  }
}

TEST_CASE("modified Hessian is symmetric and traces to the modified Laplacian") {
  std::mt19937_64 rng(47);
  std::vector<Field> test2 = {Field::parse("sin(x1)*cos(x2)", 2),
                              Field::parse("x1^2*x2 - x2^3/3", 2)};
  std::vector<Field> test3 = {Field::parse("x1*sin(x2) + x3^2", 3)};
  for (const auto& name : catalog_triple_names()) {
    auto T = catalog_triple(name);
    T = with_weight(T, weight_for(T).to_string());
    const auto& fields = T.dim == 2 ? test2 : test3;
    for (auto [a, c] : parameter_pairs(T.dim)) {
      auto conn = AffineConnection::make(T, a, c);
      for (const Field& f : fields) {
        for (int trial = 0; trial < 5; ++trial) {
          auto p = random_point(T, rng);
          Eigen::MatrixXd H = d_hessian_at(conn, f, p);
          CHECK((H - H.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
          double tr = (metric_at(T, p).g_inv * H).trace();
          double lap = d_laplacian_at(conn, f, p);
          CHECK(std::abs(tr - lap) <= 1e-11 * (1 + std::abs(lap)));
        }
      }
    }
  }
}

TEST_CASE("modified Laplacian has divergence form with combined exponent") {
  // V^{-tau} div(V^{tau+gamma-alpha} grad f) must reproduce the modified
  // Laplacian; the divergence side is assembled symbolically (diagonal
  // metrics, so the raised gradient is componentwise).
  std::mt19937_64 rng(53);
  for (const auto& name : {"euclidean-2", "sphere-2", "hyperbolic-2", "polar-3"}) {
    auto T = catalog_triple(name);
    T = with_weight(T, weight_for(T).to_string());
    const int n = T.dim;
    Field f = n == 2 ? Field::parse("sin(x1)*x2 + x1^2", 2)
                     : Field::parse("x1^2 + cos(x2)*x3", 3);
    for (auto [a, c] : parameter_pairs(n)) {
      auto conn = AffineConnection::make(T, a, c);
      double expo = conn.params.tau + c - a;

      // Z^i = e^{expo u} f_i / g_ii as exact expressions.
      std::vector<Field> Z(n);
      ExprPtr weight = make_call(Func::Exp, make_mul(make_const(expo), T.u.expr()));
      for (int i = 0; i < n; ++i) {
        ExprPtr raised = make_div(f.derivative({i + 1}).expr(), T.g[i][i].expr());
        Z[i] = Field(make_mul(weight, raised), n);
      }

      for (int trial = 0; trial < 5; ++trial) {
        auto p = random_point(T, rng);
        MetricJet J = metric_jet_at(T, p, 1);
        double div = 0.0;
        for (int i = 0; i < n; ++i) {
          div += Z[i].eval_partial({i + 1}, p);
          for (int m = 0; m < n; ++m) div += J.Gamma[i](i, m) * Z[m].eval(p);
        }
        double lhs = std::exp(-conn.params.tau * T.u.eval(p)) * div;
        double rhs = d_laplacian_at(conn, f, p);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1 + std::abs(rhs)));
      }
    }
  }
}

TEST_CASE("weighted divergence identity holds pointwise") {
  std::mt19937_64 rng(59);

  auto euc = catalog_triple("euclidean-2", "x1 + x2");
  std::vector<Field> W2 = {Field::parse("x1^2 - x2", 2),
                           Field::parse("x1*x2 + 1", 2)};
  auto lc = AffineConnection::make(with_weight(euc, "0"), 0.0, 0.0);
  auto p0 = random_point(euc, rng);
  CHECK(weighted_divergence_residual(lc, W2, p0) == 0.0);

  auto sphere = catalog_triple("sphere-2", "0.3*cos(x1)");
  std::vector<Field> Ws = {Field::parse("x1^2 - 2*x1", 2),
                           Field::parse("0.5*x2 - x1", 2)};
  auto cs = AffineConnection::make(sphere, 0.3, 0.7);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_point(sphere, rng);
    CHECK(weighted_divergence_residual(cs, Ws, p) <= 1e-10);
  }

  for (const auto& name : catalog_triple_names()) {
    auto T = catalog_triple(name);
    T = with_weight(T, weight_for(T).to_string());
    std::vector<Field> W(T.dim);
    for (int i = 0; i < T.dim; ++i)
      W[i] = Field::parse(i == 0 ? "x1^2 - x2" : "x1*x2", T.dim);
    for (auto [a, c] : parameter_pairs(T.dim)) {
      auto conn = AffineConnection::make(T, a, c);
      auto p = random_point(T, rng);
      CHECK(weighted_divergence_residual(conn, W, p) <= 1e-10);
    }
  }
}

TEST_CASE("pointwise divergence-commutator identity for modified gradients") {
  std::mt19937_64 rng(61);

  // Flat, unweighted, quadratic: every ingredient is constant.
  auto euc = catalog_triple("euclidean-2", "0");
  auto lc = AffineConnection::make(euc, 0.0, 0.0);
  Field quad = Field::parse("x1^2 + 3*x1*x2 - x2^2", 2);
  auto p0 = random_point(euc, rng);
  CHECK(bochner_residual_at(lc, quad, p0) <= 1e-10);

  auto sphere = catalog_triple("sphere-2", "0.2*cos(x1)");
  auto cs = AffineConnection::make(sphere, 0.25, 0.5);
  Field fpoly = Field::parse("x1^3 - 2*x1^2 + x1", 2);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_point(sphere, rng);
    CHECK(bochner_residual_at(cs, fpoly, p) <= 1e-8);
  }

  // Tensor-operator form of the right side agrees with the commutator form.
  for (const auto& name : {"sphere-2", "hyperbolic-2", "warped-3"}) {
    auto T = catalog_triple(name);
    T = with_weight(T, weight_for(T).to_string());
    Field f = T.dim == 2 ? Field::parse("x1^2 + sin(x2)", 2)
                         : Field::parse("x1^2 + sin(x2)*cos(x3)", 3);
    for (auto [a, c] : parameter_pairs(T.dim)) {
      auto conn = AffineConnection::make(T, a, c);
      for (int trial = 0; trial < 10; ++trial) {
        auto p = random_point(T, rng);
        BochnerBreakdown b = bochner_breakdown_at(conn, f, p);
        double scale = 1 + std::abs(b.lhs);
        CHECK(std::abs(b.lhs - b.rhs_commutator) / scale <= 1e-8);
        CHECK(std::abs(b.rhs_commutator - b.rhs_tensor) / scale <= 1e-8);
      }
    }
  }
}

TEST_CASE("symbolic matrix inverse matches numeric inverse") {
  ExprMatrix m = {
      {parse_expr("1 + x1^2", 2), parse_expr("x1*x2", 2), parse_expr("0.5", 2)},
      {parse_expr("x1*x2", 2), parse_expr("2 + x2^2", 2), parse_expr("x2", 2)},
      {parse_expr("0.5", 2), parse_expr("x2", 2), parse_expr("3", 2)}};
  ExprMatrix inv = symbolic_inverse(m);
  std::vector<double> p{0.7, -0.4};
  Eigen::Matrix3d M, Minv;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      M(i, j) = eval_expr(*m[i][j], p);
      Minv(i, j) = eval_expr(*inv[i][j], p);
    }
  CHECK((M * Minv - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(eval_expr(*symbolic_det(m), p) == doctest::Approx(M.determinant()).epsilon(1e-13));
}
