#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "affgeo/boundary.hpp"
#include "affgeo/catalog.hpp"

using namespace affgeo;

namespace {

BoundaryFrame unit_circle_frame(std::string_view u_src = "0") {
  auto euc = catalog_triple("euclidean-2", u_src);
  auto patch = BoundaryPatch::make(
      {Field::parse("cos(x1)", 1), Field::parse("sin(x1)", 1)},
      {{0.0, 6.283185307179586}});
  return BoundaryFrame(euc, patch);
}

BoundaryFrame unit_sphere_frame(std::string_view u_src = "0") {
  auto euc = catalog_triple("euclidean-3", u_src);
  auto patch = BoundaryPatch::make(
      {Field::parse("sin(x1)*cos(x2)", 2), Field::parse("sin(x1)*sin(x2)", 2),
       Field::parse("cos(x1)", 2)},
      {{0.05, 3.0915926535897933}, {0.0, 6.283185307179586}});
  return BoundaryFrame(euc, patch);
}

// The same unit sphere, but as the r = 1 coordinate surface of the polar chart.
BoundaryFrame polar_sphere_frame(std::string_view u_src = "0") {
  auto pol = catalog_triple("polar-3", u_src);
  auto patch = BoundaryPatch::make(
      {Field::parse("1", 2), Field::parse("x1", 2), Field::parse("x2", 2)},
      {{0.05, 3.0915926535897933}, {0.0, 6.283185307179586}});
  return BoundaryFrame(pol, patch);
}

ConnectionParams lc_params(int n) { return ConnectionParams::make(0.0, 0.0, n); }

}  // namespace

TEST_CASE("unit circle shape data") {
  BoundaryFrame F = unit_circle_frame();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.1, 6.1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> q{unif(rng)};
    ShapeData s = shape_at(F, lc_params(2), q);
    CHECK(s.H == doctest::Approx(1).epsilon(1e-12));
    CHECK(s.g_ind(0, 0) == doctest::Approx(1).epsilon(1e-12));
    CHECK(s.h(0, 0) == doctest::Approx(1).epsilon(1e-12));
    // Outward normal is the radial direction.
    CHECK(s.nu(0) == doctest::Approx(std::cos(q[0])).epsilon(1e-12));
    CHECK(s.nu(1) == doctest::Approx(std::sin(q[0])).epsilon(1e-12));
  }
}

TEST_CASE("unit sphere shape data in two charts") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> th(0.3, 2.8), ph(0.1, 6.1);
  for (int which = 0; which < 2; ++which) {
    BoundaryFrame F = which == 0 ? unit_sphere_frame() : polar_sphere_frame();
    for (int trial = 0; trial < 15; ++trial) {
      std::vector<double> q{th(rng), ph(rng)};
      ShapeData s = shape_at(F, lc_params(3), q);
      CHECK(s.H == doctest::Approx(2).epsilon(1e-10));
      CHECK((s.h - s.g_ind).cwiseAbs().maxCoeff() <= 1e-10);
      // Unit normal and tangency against the ambient metric.
      auto x = F.ambient_point(q);
      MetricData amb = metric_at(F.ambient(), x);
      CHECK(s.nu.dot(amb.g * s.nu) == doctest::Approx(1).epsilon(1e-10));
    }
  }
}

TEST_CASE("normal is outward and unit across chart types") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif01(0.1, 0.9);

  // Circle: chart-radial pairing in the Euclidean chart.
  BoundaryFrame circ = unit_circle_frame();
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> q{unif01(rng) * 6.2};
    ShapeData s = shape_at(circ, lc_params(2), q);
    auto x = circ.ambient_point(q);
    CHECK(s.nu(0) * x[0] + s.nu(1) * x[1] > 0);
  }

  // Sphere in the polar chart: outward means positive radial component.
  BoundaryFrame pol = polar_sphere_frame();
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> q{0.3 + 2.4 * unif01(rng), 6.2 * unif01(rng)};
    ShapeData s = shape_at(pol, lc_params(3), q);
    CHECK(s.nu(0) > 0);
    // Tangency: the normal annihilates both coordinate tangents.
    auto x = pol.ambient_point(q);
    MetricData amb = metric_at(pol.ambient(), x);
    Eigen::VectorXd e_th(3), e_ph(3);
    e_th << 0, 1, 0;
    e_ph << 0, 0, 1;
    CHECK(std::abs(s.nu.dot(amb.g * e_th)) <= 1e-10);
    CHECK(std::abs(s.nu.dot(amb.g * e_ph)) <= 1e-10);
  }
}

TEST_CASE("weighted shape data on the unit sphere") {
  // u = |x|^2/2 has unit radial derivative on the unit sphere.
  BoundaryFrame F = unit_sphere_frame("(x1^2 + x2^2 + x3^2)/2");
  std::vector<double> q{1.1, 2.4};
  for (double alpha : {0.0, 0.7, -1.3}) {
    auto params = ConnectionParams::make(alpha, 0.2, 3);
    ShapeData s = shape_at(F, params, q);
    CHECK(s.u_nu == doctest::Approx(1).epsilon(1e-11));
    CHECK(s.HD == doctest::Approx(2 * (1 + alpha)).epsilon(1e-10));
  }
}

TEST_CASE("tangential gradients") {
  BoundaryFrame F = unit_sphere_frame();
  auto params = lc_params(3);

  Field constant = Field::parse("4", 3);
  std::vector<double> q{0.9, 1.7};
  CHECK(tangential_gradient_at(F, params, constant, q).grad.cwiseAbs().maxCoeff() <=
        1e-14);

  // Height function at the equator: gradient is the unit theta tangent.
  Field x3 = Field::parse("x3", 3);
  std::vector<double> eq{M_PI / 2, 0.8};
  TangentGradient tg = tangential_gradient_at(F, params, x3, eq);
  CHECK(tg.grad(0) == doctest::Approx(-1).epsilon(1e-12));
  CHECK(std::abs(tg.grad(1)) <= 1e-12);
  // Zero weight: the scaled version coincides.
  CHECK((tg.d_grad - tg.grad).cwiseAbs().maxCoeff() <= 1e-14);

  // Nonzero weight with gamma != alpha rescales by V^{gamma-alpha}.
  BoundaryFrame Fw = unit_sphere_frame("x3");
  auto pw = ConnectionParams::make(0.25, 1.25, 3);
  TangentGradient tw = tangential_gradient_at(Fw, pw, x3, eq);
  double expected_scale = std::exp(1.0 * std::cos(eq[0]));
  CHECK((tw.d_grad - expected_scale * tw.grad).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("boundary bilinear form") {
  BoundaryFrame F = unit_sphere_frame("(x1^2 + x2^2 + x3^2)/2");
  std::vector<double> q{1.3, 0.4};

  // gamma = 0 reduces to the second fundamental form.
  auto p0 = ConnectionParams::make(0.5, 0.0, 3);
  ShapeData s = shape_at(F, p0, q);
  CHECK((boundary_form_at(F, p0, q) - s.h).cwiseAbs().maxCoeff() <= 1e-12);

  // gamma = 1 with u_nu = 1 on the round sphere: h - g_ind = 0.
  auto p1 = ConnectionParams::make(0.0, 1.0, 3);
  CHECK(boundary_form_at(F, p1, q).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("umbilicity defect") {
  BoundaryFrame sphere = unit_sphere_frame();
  std::vector<double> q{1.0, 2.0};
  CHECK(umbilicity_defect(sphere, q) <= 1e-10);

  // Curves are always umbilic.
  BoundaryFrame circ = unit_circle_frame();
  std::vector<double> s{2.2};
  CHECK(umbilicity_defect(circ, s) <= 1e-14);

  // Triaxial ellipsoid: genuinely non-umbilic away from the symmetry points.
  auto euc = catalog_triple("euclidean-3");
  auto ell = BoundaryPatch::make(
      {Field::parse("1.5*sin(x1)*cos(x2)", 2), Field::parse("sin(x1)*sin(x2)", 2),
       Field::parse("cos(x1)", 2)},
      {{0.05, 3.0915926535897933}, {0.0, 6.283185307179586}});
  BoundaryFrame Fe(euc, ell);
  std::vector<double> generic{1.1, 0.7};
  CHECK(umbilicity_defect(Fe, generic) > 0.01);
}

TEST_CASE("normal derivatives of ambient scalars") {
  BoundaryFrame sphere = unit_sphere_frame();
  Field half_sq = Field::parse("(x1^2 + x2^2 + x3^2)/2", 3);
  std::vector<double> q{0.8, 3.0};
  CHECK(normal_derivative_at(sphere, half_sq, q) == doctest::Approx(1).epsilon(1e-11));

  Field c = Field::parse("7", 3);
  CHECK(std::abs(normal_derivative_at(sphere, c, q)) <= 1e-14);

  BoundaryFrame circ = unit_circle_frame();
  Field x1 = Field::parse("x1", 2);
  for (double s : {0.3, 1.9, 4.4}) {
    std::vector<double> qs{s};
    CHECK(normal_derivative_at(circ, x1, qs) ==
          doctest::Approx(std::cos(s)).epsilon(1e-12));
  }

  // The symbolic normal-derivative field agrees with the pointwise value.
  Field f = Field::parse("x1*x3 + x2^2", 3);
  Field fnu = sphere.normal_derivative_field(f);
  std::vector<double> qq{1.4, 5.1};
  CHECK(fnu.eval(qq) ==
        doctest::Approx(normal_derivative_at(sphere, f, qq)).epsilon(1e-12));
}

TEST_CASE("tangential trace of the ambient Hessian splits into surface terms") {
  // For each frame and scalar: trace over tangents of the ambient Hessian
  // equals the intrinsic Laplacian of the restriction plus H times the
  // normal derivative.
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> th(0.3, 2.8), ph(0.1, 6.1);

  auto check_split = [&](const BoundaryFrame& F, const Field& f,
                         std::span<const double> q) {
    const int n = F.ambient_dim();
    const int m = F.boundary_dim();
    auto x = F.ambient_point(q);
    Eigen::MatrixXd hess = hessian_at(F.ambient(), f, x);

    Eigen::MatrixXd tang(m, n);
    for (int a = 0; a < m; ++a) {
      // Tangent components are the parameter derivatives of the patch map.
      for (int i = 0; i < n; ++i)
        tang(a, i) = F.patch().map[i].eval_partial({a + 1}, q);
    }
    MetricData ind = metric_at(F.induced_triple(), q);
    Eigen::MatrixXd pulled = tang * hess * tang.transpose();
    double lhs = (ind.g_inv * pulled).trace();

    Field f_res = F.restrict_field(f);
    double rhs = laplacian_at(F.induced_triple(), f_res, q) +
                 shape_at(F, lc_params(n), q).H * normal_derivative_at(F, f, q);
    CHECK(std::abs(lhs - rhs) <= 1e-8 * (1 + std::abs(lhs)));
  };

  BoundaryFrame sphere = unit_sphere_frame();
  BoundaryFrame polar = polar_sphere_frame();
  Field f3 = Field::parse("x1^2*x3 - x2*x3 + x1", 3);
  Field g3 = Field::parse("exp(x1/2)*cos(x2) + x3^2", 3);
  Field fp = Field::parse("x1^2*cos(x2) + sin(x2)*cos(x3)", 3);
  for (int trial = 0; trial < 15; ++trial) {
    std::vector<double> q{th(rng), ph(rng)};
    check_split(sphere, f3, q);
    check_split(sphere, g3, q);
    check_split(polar, fp, q);
  }

  BoundaryFrame circ = unit_circle_frame();
  Field f2 = Field::parse("x1^3 - x1*x2 + x2^2", 2);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> q{ph(rng)};
    check_split(circ, f2, q);
  }
}
