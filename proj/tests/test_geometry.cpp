#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "affgeo/catalog.hpp"
#include "affgeo/triple.hpp"
#include "test_util.hpp"

using namespace affgeo;
using affgeo::testutil::random_point;

TEST_CASE("metric evaluation, inverse, volume factor") {
  auto euc = catalog_triple("euclidean-2");
  std::vector<double> origin{0.1, -0.3};
  MetricData m = metric_at(euc, origin);
  CHECK(m.g.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-14));
  CHECK(m.sqrt_det == doctest::Approx(1).epsilon(1e-14));

  auto polar = catalog_triple("polar-2");
  std::vector<double> r2{2.0, 1.0};
  MetricData mp = metric_at(polar, r2);
  CHECK(mp.sqrt_det == doctest::Approx(2).epsilon(1e-13));
  CHECK(mp.g(1, 1) == doctest::Approx(4).epsilon(1e-14));

  auto sphere = catalog_triple("sphere-2");
  std::vector<double> equator{M_PI / 2, 0.5};
  MetricData ms = metric_at(sphere, equator);
  CHECK(ms.g.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-13));

  // g_inv * g = I across catalog entries at random points.
  std::mt19937_64 rng(42);
  for (const auto& name : catalog_triple_names()) {
    auto T = catalog_triple(name);
    for (int trial = 0; trial < 10; ++trial) {
      auto p = random_point(T, rng);
      MetricData md = metric_at(T, p);
      CHECK((md.g_inv * md.g - Eigen::MatrixXd::Identity(T.dim, T.dim))
                .cwiseAbs()
                .maxCoeff() <= 1e-10);
      CHECK(md.sqrt_det > 0);
    }
  }
}

TEST_CASE("non-positive-definite metric is rejected") {
  auto bad = RiemannianTriple::make(
      2,
      {{Field::parse("x1", 2), Field::parse("0", 2)},
       {Field::parse("0", 2), Field::parse("1", 2)}},
      Field::parse("0", 2), {{-1.0, 1.0}, {-1.0, 1.0}});
  std::vector<double> neg{-0.5, 0.0};
  CHECK_THROWS_AS(metric_at(bad, neg), Error);
}

TEST_CASE("Christoffel symbols of catalog charts") {
  auto euc = catalog_triple("euclidean-2");
  std::vector<double> p0{0.2, 0.7};
  auto Geuc = christoffel_at(euc, p0);
  for (const auto& mat : Geuc) CHECK(mat.cwiseAbs().maxCoeff() <= 1e-14);

  // Polar chart at r=2: radial-from-angular = -r, mixed = 1/r.
  auto polar = catalog_triple("polar-2");
  std::vector<double> r2{2.0, 1.0};
  auto Gp = christoffel_at(polar, r2);
  CHECK(Gp[0](1, 1) == doctest::Approx(-2).epsilon(1e-13));
  CHECK(Gp[1](0, 1) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(Gp[1](1, 0) == doctest::Approx(0.5).epsilon(1e-13));

  auto sphere = catalog_triple("sphere-2");
  std::vector<double> q{M_PI / 4, 2.0};
  auto Gs = christoffel_at(sphere, q);
  CHECK(Gs[0](1, 1) == doctest::Approx(-0.5).epsilon(1e-13));

  // Symmetry in the lower pair everywhere.
  std::mt19937_64 rng(7);
  for (const auto& name : catalog_triple_names()) {
    auto T = catalog_triple(name);
    auto p = random_point(T, rng);
    auto G = christoffel_at(T, p);
    for (const auto& mat : G)
      CHECK((mat - mat.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

namespace {

// Constant-curvature closed form: riem(l,i,j,k) = K (g_jk d_li - g_ik d_lj).
void check_constant_curvature(const RiemannianTriple& T, double K,
                              std::mt19937_64& rng, double tol) {
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_point(T, rng);
    MetricData m = metric_at(T, p);
    CurvatureTensor R = riemann_lc_at(T, p);
    for (int l = 0; l < T.dim; ++l)
      for (int i = 0; i < T.dim; ++i)
        for (int j = 0; j < T.dim; ++j)
          for (int k = 0; k < T.dim; ++k) {
            double expect =
                K * (m.g(j, k) * (l == i) - m.g(i, k) * (l == j));
            CHECK(R(l, i, j, k) == doctest::Approx(expect).epsilon(tol).scale(1));
          }
  }
}

}  // namespace

TEST_CASE("curvature tensor on flat, spherical, hyperbolic charts") {
  std::mt19937_64 rng(11);

  for (const char* flat : {"euclidean-2", "euclidean-3", "polar-2", "polar-3"}) {
    auto T = catalog_triple(flat);
    check_constant_curvature(T, 0.0, rng, 1e-10);
  }

  auto s2 = catalog_triple("sphere-2");
  check_constant_curvature(s2, 1.0, rng, 1e-10);
  std::vector<double> q{1.1, 0.3};
  CurvatureTensor R = riemann_lc_at(s2, q);
  CHECK(R(0, 0, 1, 1) == doctest::Approx(std::sin(1.1) * std::sin(1.1)).epsilon(1e-12));

  check_constant_curvature(catalog_triple("sphere-3"), 1.0, rng, 1e-10);
  check_constant_curvature(catalog_triple("hyperbolic-2"), -1.0, rng, 1e-10);
  check_constant_curvature(catalog_triple("hyperbolic-3"), -1.0, rng, 1e-10);

  // Hyperbolic half-plane in a different chart: g = diag(1/x2^2, 1/x2^2).
  auto half = RiemannianTriple::make(
      2,
      {{Field::parse("1/x2^2", 2), Field::parse("0", 2)},
       {Field::parse("0", 2), Field::parse("1/x2^2", 2)}},
      Field::parse("0", 2), {{-2.0, 2.0}, {0.2, 3.0}});
  check_constant_curvature(half, -1.0, rng, 1e-10);
}

TEST_CASE("curvature antisymmetry in the vector-argument pair") {
  std::mt19937_64 rng(13);
  for (const auto& name : catalog_triple_names()) {
    auto T = catalog_triple(name);
    for (int trial = 0; trial < 5; ++trial) {
      auto p = random_point(T, rng);
      CurvatureTensor R = riemann_lc_at(T, p);
      for (int l = 0; l < T.dim; ++l)
        for (int i = 0; i < T.dim; ++i)
          for (int j = 0; j < T.dim; ++j)
            for (int k = 0; k < T.dim; ++k)
              CHECK(std::abs(R(l, i, j, k) + R(l, j, i, k)) <= 1e-10);
    }
  }
}

TEST_CASE("Ricci tensor values and symmetry") {
  auto euc = catalog_triple("euclidean-3");
  std::vector<double> p0{0.1, 0.2, 0.3};
  CHECK(ricci_at(euc, p0).cwiseAbs().maxCoeff() <= 1e-12);

  std::mt19937_64 rng(17);

  // Constant-curvature entries: Ric = (n-1) K g.
  struct Case {
    const char* name;
    double K;
  };
  for (auto [name, K] : {Case{"sphere-2", 1.0}, Case{"sphere-3", 1.0},
                         Case{"hyperbolic-2", -1.0}, Case{"hyperbolic-3", -1.0}}) {
    auto T = catalog_triple(name);
    for (int trial = 0; trial < 10; ++trial) {
      auto p = random_point(T, rng);
      Eigen::MatrixXd ric = ricci_at(T, p);
      Eigen::MatrixXd expect = (T.dim - 1) * K * metric_at(T, p).g;
      CHECK((ric - expect).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }

  for (const auto& name : catalog_triple_names()) {
    auto T = catalog_triple(name);
    auto p = random_point(T, rng);
    Eigen::MatrixXd ric = ricci_at(T, p);
    CHECK((ric - ric.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("gradient with raised index") {
  auto euc = catalog_triple("euclidean-2");
  Field f = Field::parse("x1^2", 2);
  std::vector<double> p{3.0 / 3, 0.0};  // stay inside the box; scale below
  // Use (0.9, 0) and check 2*x1 analytically instead of the out-of-box (3,0).
  std::vector<double> q{0.9, 0.0};
  Eigen::VectorXd gr = grad_at(euc, f, q);
  CHECK(gr(0) == doctest::Approx(1.8).epsilon(1e-14));
  CHECK(gr(1) == doctest::Approx(0).epsilon(1e-14));

  auto polar = catalog_triple("polar-2");
  Field radial = Field::parse("x1", 2);
  std::vector<double> pr{1.3, 2.0};
  Eigen::VectorXd gp = grad_at(polar, radial, pr);
  CHECK(gp(0) == doctest::Approx(1).epsilon(1e-13));
  CHECK(gp(1) == doctest::Approx(0).epsilon(1e-13));

  auto sphere = catalog_triple("sphere-2");
  Field height = Field::parse("cos(x1)", 2);
  std::vector<double> eq{M_PI / 2, 1.0};
  Eigen::VectorXd gs = grad_at(sphere, height, eq);
  CHECK(gs(0) == doctest::Approx(-1).epsilon(1e-13));
  CHECK(gs(1) == doctest::Approx(0).epsilon(1e-13));
}

TEST_CASE("covariant Hessian") {
  auto euc = catalog_triple("euclidean-2");
  Field half_sq = Field::parse("(x1^2 + x2^2)/2", 2);
  std::vector<double> p{0.4, -0.8};
  CHECK(hessian_at(euc, half_sq, p).isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-13));

  Field lin = Field::parse("3*x1 - 2*x2", 2);
  CHECK(hessian_at(euc, lin, p).cwiseAbs().maxCoeff() <= 1e-14);

  // Same function through the polar chart: Hessian of r^2/2 equals the metric.
  auto polar = catalog_triple("polar-2");
  Field half_r2 = Field::parse("x1^2/2", 2);
  std::vector<double> pr{1.7, 0.9};
  Eigen::MatrixXd H = hessian_at(polar, half_r2, pr);
  CHECK(H.isApprox(metric_at(polar, pr).g, 1e-12));
}

TEST_CASE("Laplacian values") {
  auto euc3 = catalog_triple("euclidean-3");
  Field half_sq = Field::parse("(x1^2 + x2^2 + x3^2)/2", 3);
  std::vector<double> p{0.3, 0.1, -0.2};
  CHECK(laplacian_at(euc3, half_sq, p) == doctest::Approx(3).epsilon(1e-13));

  // First spherical harmonic: eigenfunction with eigenvalue 2.
  auto sphere = catalog_triple("sphere-2");
  Field height = Field::parse("cos(x1)", 2);
  for (double theta : {0.4, 1.0, 2.2}) {
    std::vector<double> q{theta, 0.7};
    CHECK(laplacian_at(sphere, height, q) ==
          doctest::Approx(-2 * std::cos(theta)).epsilon(1e-12));
  }

  // Flat 1-D chart: the Laplacian is the plain second derivative.
  auto line = RiemannianTriple::make(1, {{Field::parse("1", 1)}},
                                     Field::parse("0", 1), {{-2.0, 2.0}});
  Field cubic = Field::parse("x1^3", 1);
  std::vector<double> x{0.5};
  CHECK(laplacian_at(line, cubic, x) == doctest::Approx(3).epsilon(1e-13));
}

TEST_CASE("metric trace of Hessian equals Laplacian at random points") {
  std::mt19937_64 rng(23);
  std::vector<Field> test2 = {Field::parse("sin(x1)*cos(x2)", 2),
                              Field::parse("exp(x1/2)*x2^2", 2)};
  std::vector<Field> test3 = {Field::parse("x1*x2 + sin(x3)", 3),
                              Field::parse("exp(x1/3)*cos(x2)*x3", 3)};
  for (const auto& name : catalog_triple_names()) {
    auto T = catalog_triple(name);
    const auto& fields = T.dim == 2 ? test2 : test3;
    for (const Field& f : fields) {
      for (int trial = 0; trial < 10; ++trial) {
        auto p = random_point(T, rng);
        double lap = laplacian_at(T, f, p);
        double tr = (metric_at(T, p).g_inv * hessian_at(T, f, p)).trace();
        CHECK(std::abs(lap - tr) <= 1e-10 * (1 + std::abs(lap)));
      }
    }
  }
}

TEST_CASE("triple JSON config round-trip") {
  nlohmann::json j = nlohmann::json::parse(R"json({
    "dim": 2,
    "g": [["1", "0"], ["0", "sin(x1)^2"]],
    "u": "0.3*cos(x1)",
    "box": [[0.05, 3.09], [0, 6.28]]
  })json");
  RiemannianTriple T = triple_from_json(j);
  CHECK(T.dim == 2);
  std::vector<double> p{1.2, 0.5};
  CHECK(metric_at(T, p).g(1, 1) ==
        doctest::Approx(std::sin(1.2) * std::sin(1.2)).epsilon(1e-14));
  CHECK(T.u.eval(p) == doctest::Approx(0.3 * std::cos(1.2)).epsilon(1e-14));

  RiemannianTriple back = triple_from_json(triple_to_json(T));
  CHECK(metric_at(back, p).g.isApprox(metric_at(T, p).g, 1e-14));
  CHECK(back.u.eval(p) == doctest::Approx(T.u.eval(p)).epsilon(1e-15));

  CHECK_THROWS_AS(triple_from_json(nlohmann::json::parse(R"json({"dim": 2})json")), Error);
}

TEST_CASE("weight override keeps geometry fixed") {
  auto T = catalog_triple("sphere-2", "0.5*cos(x1)");
  std::vector<double> p{1.0, 2.0};
  CHECK(T.u.eval(p) == doctest::Approx(0.5 * std::cos(1.0)).epsilon(1e-14));
  auto T2 = with_weight(T, "x1 - x2");
  CHECK(T2.u.eval(p) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(metric_at(T2, p).g.isApprox(metric_at(T, p).g, 1e-15));
}
