#include "affgeo/domain.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace affgeo {

namespace {
constexpr double kPi = 3.141592653589793;
constexpr double kTwoPi = 6.283185307179586;
}  // namespace

const QuadRule& gauss_legendre(int order) {
  if (order < 1 || order > 512) throw Error("quadrature order must be in [1, 512]");
  static std::mutex mu;
  static std::map<int, QuadRule> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  QuadRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int n = order;
  for (int k = 0; k < (n + 1) / 2; ++k) {
    // Newton iteration from the Chebyshev-like initial guess.
    double x = std::cos(kPi * (k + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_n(x) and P_{n-1}(x).
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = -p1 / pp;
      x += dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[k] = -x;
    rule.nodes[n - 1 - k] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[k] = w;
    rule.weights[n - 1 - k] = w;
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

double pairwise_sum(std::span<const double> terms) {
  const std::size_t n = terms.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc;
  }
  std::size_t half = n / 2;
  return pairwise_sum(terms.subspan(0, half)) + pairwise_sum(terms.subspan(half));
}

// ---------------------------------------------------------------------------
// DomainSpec
// ---------------------------------------------------------------------------

DomainSpec DomainSpec::parse(std::string_view compact) {
  DomainSpec spec;
  auto colon = compact.find(':');
  spec.name = std::string(compact.substr(0, colon));
  if (colon != std::string_view::npos) {
    std::string rest(compact.substr(colon + 1));
    std::istringstream in(rest);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw Error("bad domain parameter '" + tok + "'");
        spec.params.push_back(v);
      } catch (const std::logic_error&) {
        throw Error("bad domain parameter '" + tok + "'");
      }
    }
  }
  if (spec.name.empty()) throw Error("empty domain name");
  return spec;
}

DomainSpec DomainSpec::from_json(const nlohmann::json& j) {
  if (!j.contains("domain")) throw Error("domain config needs key 'domain'");
  DomainSpec spec;
  spec.name = j.at("domain").get<std::string>();
  if (j.contains("params"))
    spec.params = j.at("params").get<std::vector<double>>();
  if (j.contains("warp")) spec.warp = j.at("warp").get<std::string>();

  // Convenience keys for the common shapes.
  if (spec.name == "ball" || spec.name == "box") {
    int dim = j.value("dim", 2);
    spec.name += std::to_string(dim);
    if (spec.params.empty() && j.contains("radius"))
      spec.params.push_back(j.at("radius").get<double>());
    if (spec.params.empty() && j.contains("side"))
      spec.params.push_back(j.at("side").get<double>());
  } else if (spec.name == "cap" && spec.params.empty() && j.contains("theta_max")) {
    spec.params.push_back(j.at("theta_max").get<double>());
  } else if (spec.name == "band" && spec.params.empty() &&
             j.contains("theta_min") && j.contains("theta_max")) {
    spec.params.push_back(j.at("theta_min").get<double>());
    spec.params.push_back(j.at("theta_max").get<double>());
  } else if (spec.name == "annulus2" && spec.params.empty() &&
             j.contains("inner") && j.contains("outer")) {
    spec.params.push_back(j.at("inner").get<double>());
    spec.params.push_back(j.at("outer").get<double>());
  } else if (spec.name == "ellipsoid" && spec.params.empty() &&
             j.contains("semiaxes")) {
    spec.params = j.at("semiaxes").get<std::vector<double>>();
  }
  return spec;
}

std::string DomainSpec::to_string() const {
  std::ostringstream out;
  out << name;
  for (std::size_t i = 0; i < params.size(); ++i) {
    out << (i == 0 ? ':' : ',');
    out.precision(15);
    out << params[i];
  }
  return out.str();
}

std::vector<std::string> catalog_domain_names() {
  return {"ball2",     "ball3", "box2",    "box3",        "annulus2",  "ellipsoid",
          "cap",       "band",  "sphere2", "hyperbolic2", "warpedband"};
}

std::vector<DomainSpec> catalog_domain_specs() {
  return {DomainSpec::parse("ball2:1"),
          DomainSpec::parse("ball3:1"),
          DomainSpec::parse("box2:1"),
          DomainSpec::parse("box3:1"),
          DomainSpec::parse("annulus2:0.5,1"),
          DomainSpec::parse("ellipsoid:1.3,1"),
          DomainSpec::parse("ellipsoid:1.5,1,1"),
          DomainSpec::parse("cap:1.0471975511965976"),
          DomainSpec::parse("band:0.7,2.4"),
          DomainSpec::parse("sphere2"),
          DomainSpec::parse("hyperbolic2:1"),
          DomainSpec::parse("warpedband:-1,1")};
}

// ---------------------------------------------------------------------------
// Canonical triples and patches per spec
// ---------------------------------------------------------------------------

namespace {

double param_or(const DomainSpec& s, std::size_t i, double fallback) {
  return i < s.params.size() ? s.params[i] : fallback;
}

/// Full-precision literal so patch positions match the numeric parameter.
std::string num_str(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::vector<std::vector<Field>> diag_fields(const std::vector<std::string>& d,
                                            int n) {
  std::vector<std::vector<Field>> g(n, std::vector<Field>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g[i][j] = Field::parse(i == j ? d[i] : "0", n);
  return g;
}

/// Metric of a Euclidean-image chart: g_kl = sum_i d_k Phi^i d_l Phi^i.
std::vector<std::vector<Field>> pullback_metric(const std::vector<Field>& maps,
                                                int n) {
  std::vector<std::vector<Field>> g(n, std::vector<Field>(n));
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      ExprPtr acc = make_const(0.0);
      for (const Field& comp : maps)
        acc = make_add(acc, make_mul(comp.derivative({k + 1}).expr(),
                                     comp.derivative({l + 1}).expr()));
      g[k][l] = Field(acc, n);
    }
  return g;
}

struct DomainLayout {
  RiemannianTriple triple;  // weight "0"; caller may re-weight
  std::vector<BoundaryPatch> patches;
  bool closed = false;
};

DomainLayout domain_layout(const DomainSpec& spec) {
  const std::string& name = spec.name;
  DomainLayout L;

  auto coord_patch2 =
      [&](const std::string& fixed, std::array<double, 2> range,
          double orient) {  // curve x1 = fixed in a 2-D chart, param = x2
        return BoundaryPatch::make(
            {Field::parse(fixed, 1), Field::parse("x1", 1)}, {range}, orient);
      };
  auto coord_patch3 = [&](const std::string& fixed,
                          std::vector<std::array<double, 2>> box, double orient) {
    return BoundaryPatch::make({Field::parse(fixed, 2), Field::parse("x1", 2),
                                Field::parse("x2", 2)},
                               std::move(box), orient);
  };

  if (name == "ball2") {
    double R = param_or(spec, 0, 1.0);
    if (R <= 0) throw Error("ball radius must be positive");
    L.triple = RiemannianTriple::make(2, diag_fields({"1", "x1^2"}, 2),
                                      Field::parse("0", 2),
                                      {{0.0, R}, {0.0, kTwoPi}});
    L.patches.push_back(coord_patch2(num_str(R), {0.0, kTwoPi}, 1.0));
  } else if (name == "ball3") {
    double R = param_or(spec, 0, 1.0);
    if (R <= 0) throw Error("ball radius must be positive");
    L.triple = RiemannianTriple::make(
        3, diag_fields({"1", "x1^2", "x1^2*sin(x2)^2"}, 3), Field::parse("0", 3),
        {{0.0, R}, {0.0, kPi}, {0.0, kTwoPi}});
    L.patches.push_back(coord_patch3(num_str(R),
                                     {{0.0, kPi}, {0.0, kTwoPi}}, 1.0));
  } else if (name == "box2") {
    double s = param_or(spec, 0, 1.0);
    if (s <= 0) throw Error("box side must be positive");
    L.triple =
        RiemannianTriple::make(2, diag_fields({"1", "1"}, 2), Field::parse("0", 2),
                               {{0.0, s}, {0.0, s}});
    std::string side = num_str(s);
    // Right/left faces (x1 fixed), then bottom/top (x2 fixed).
    L.patches.push_back(BoundaryPatch::make(
        {Field::parse(side, 1), Field::parse("x1", 1)}, {{0.0, s}}, 1.0));
    L.patches.push_back(BoundaryPatch::make(
        {Field::parse("0", 1), Field::parse("x1", 1)}, {{0.0, s}}, -1.0));
    L.patches.push_back(BoundaryPatch::make(
        {Field::parse("x1", 1), Field::parse("0", 1)}, {{0.0, s}}, 1.0));
    L.patches.push_back(BoundaryPatch::make(
        {Field::parse("x1", 1), Field::parse(side, 1)}, {{0.0, s}}, -1.0));
  } else if (name == "box3") {
    double s = param_or(spec, 0, 1.0);
    if (s <= 0) throw Error("box side must be positive");
    L.triple = RiemannianTriple::make(3, diag_fields({"1", "1", "1"}, 3),
                                      Field::parse("0", 3),
                                      {{0.0, s}, {0.0, s}, {0.0, s}});
    std::string side = num_str(s);
    std::vector<std::array<double, 2>> face = {{0.0, s}, {0.0, s}};
    auto F = [&](const char* a, const char* b, const char* c, double orient) {
      L.patches.push_back(BoundaryPatch::make({Field::parse(a, 2),
                                               Field::parse(b, 2),
                                               Field::parse(c, 2)},
                                              face, orient));
    };
    F(side.c_str(), "x1", "x2", 1.0);
    F("0", "x1", "x2", -1.0);
    F("x1", side.c_str(), "x2", -1.0);
    F("x1", "0", "x2", 1.0);
    F("x1", "x2", side.c_str(), 1.0);
    F("x1", "x2", "0", -1.0);
  } else if (name == "annulus2") {
    double r0 = param_or(spec, 0, 0.5);
    double R = param_or(spec, 1, 1.0);
    if (!(0 < r0 && r0 < R)) throw Error("annulus needs 0 < inner < outer");
    L.triple = RiemannianTriple::make(2, diag_fields({"1", "x1^2"}, 2),
                                      Field::parse("0", 2),
                                      {{r0, R}, {0.0, kTwoPi}});
    L.patches.push_back(coord_patch2(num_str(R), {0.0, kTwoPi}, 1.0));
    L.patches.push_back(coord_patch2(num_str(r0), {0.0, kTwoPi}, -1.0));
  } else if (name == "ellipsoid") {
    if (spec.params.size() == 2) {
      double a = spec.params[0], b = spec.params[1];
      if (a <= 0 || b <= 0) throw Error("semiaxes must be positive");
      std::vector<Field> maps = {
          Field::parse(num_str(a) + "*x1*cos(x2)", 2),
          Field::parse(num_str(b) + "*x1*sin(x2)", 2)};
      L.triple = RiemannianTriple::make(2, pullback_metric(maps, 2),
                                        Field::parse("0", 2),
                                        {{0.0, 1.0}, {0.0, kTwoPi}});
      L.patches.push_back(coord_patch2("1", {0.0, kTwoPi}, 1.0));
    } else if (spec.params.size() == 3) {
      double a = spec.params[0], b = spec.params[1], c = spec.params[2];
      if (a <= 0 || b <= 0 || c <= 0) throw Error("semiaxes must be positive");
      std::vector<Field> maps = {
          Field::parse(num_str(a) + "*x1*sin(x2)*cos(x3)", 3),
          Field::parse(num_str(b) + "*x1*sin(x2)*sin(x3)", 3),
          Field::parse(num_str(c) + "*x1*cos(x2)", 3)};
      L.triple = RiemannianTriple::make(3, pullback_metric(maps, 3),
                                        Field::parse("0", 3),
                                        {{0.0, 1.0}, {0.0, kPi}, {0.0, kTwoPi}});
      L.patches.push_back(coord_patch3("1", {{0.0, kPi}, {0.0, kTwoPi}}, 1.0));
    } else {
      throw Error("ellipsoid needs 2 or 3 semiaxes");
    }
  } else if (name == "cap") {
    double tm = param_or(spec, 0, kPi / 3);
    if (!(0 < tm && tm < kPi)) throw Error("cap angle must be in (0, pi)");
    L.triple = RiemannianTriple::make(2, diag_fields({"1", "sin(x1)^2"}, 2),
                                      Field::parse("0", 2),
                                      {{0.0, tm}, {0.0, kTwoPi}});
    L.patches.push_back(coord_patch2(num_str(tm), {0.0, kTwoPi}, 1.0));
  } else if (name == "band") {
    double t1 = param_or(spec, 0, 0.7);
    double t2 = param_or(spec, 1, 2.4);
    if (!(0 < t1 && t1 < t2 && t2 < kPi))
      throw Error("band needs 0 < theta_min < theta_max < pi");
    L.triple = RiemannianTriple::make(2, diag_fields({"1", "sin(x1)^2"}, 2),
                                      Field::parse("0", 2),
                                      {{t1, t2}, {0.0, kTwoPi}});
    L.patches.push_back(coord_patch2(num_str(t2), {0.0, kTwoPi}, 1.0));
    L.patches.push_back(coord_patch2(num_str(t1), {0.0, kTwoPi}, -1.0));
  } else if (name == "sphere2") {
    L.triple = RiemannianTriple::make(2, diag_fields({"1", "sin(x1)^2"}, 2),
                                      Field::parse("0", 2),
                                      {{0.0, kPi}, {0.0, kTwoPi}});
    L.closed = true;
  } else if (name == "hyperbolic2") {
    double R = param_or(spec, 0, 1.0);
    if (R <= 0) throw Error("geodesic radius must be positive");
    L.triple = RiemannianTriple::make(2, diag_fields({"1", "sinh(x1)^2"}, 2),
                                      Field::parse("0", 2),
                                      {{0.0, R}, {0.0, kTwoPi}});
    L.patches.push_back(coord_patch2(num_str(R), {0.0, kTwoPi}, 1.0));
  } else if (name == "warpedband") {
    double a = param_or(spec, 0, -1.0);
    double b = param_or(spec, 1, 1.0);
    if (!(a < b)) throw Error("warped band needs a < b");
    std::string w2 = "(" + spec.warp + ")^2";
    L.triple = RiemannianTriple::make(
        2, {{Field::parse("1", 2), Field::parse("0", 2)},
            {Field::parse("0", 2), Field::parse(w2, 2)}},
        Field::parse("0", 2), {{a, b}, {0.0, kTwoPi}});
    L.patches.push_back(coord_patch2(num_str(b), {0.0, kTwoPi}, 1.0));
    L.patches.push_back(coord_patch2(num_str(a), {0.0, kTwoPi}, -1.0));
  } else if (name == "interval") {
    double a = param_or(spec, 0, 0.0);
    double b = param_or(spec, 1, 1.0);
    if (!(a < b)) throw Error("interval needs a < b");
    // One-dimensional; carried by the symmetric-reduction solver, so no
    // boundary patches are attached here.
    L.triple = RiemannianTriple::make(1, {{Field::parse("1", 1)}},
                                      Field::parse("0", 1), {{a, b}});
  } else {
    throw Error("unknown domain '" + name + "'");
  }
  return L;
}

}  // namespace

RiemannianTriple domain_triple(const DomainSpec& spec, std::string_view u_src) {
  DomainLayout L = domain_layout(spec);
  RiemannianTriple T = std::move(L.triple);
  T.u = Field::parse(u_src, T.dim);
  return T;
}

DomainAssembly build_domain(const RiemannianTriple& T, const DomainSpec& spec,
                            int order) {
  if (order < 2) throw Error("quadrature order must be at least 2");
  DomainLayout L = domain_layout(spec);
  if (L.triple.dim < 2)
    throw Error("one-dimensional domains are handled by the "
                "symmetric-reduction solver");
  if (T.dim != L.triple.dim)
    throw Error("triple dimension does not match the domain");
  for (int a = 0; a < T.dim; ++a) {
    double span = T.box[a][1] - T.box[a][0];
    if (L.triple.box[a][0] < T.box[a][0] - 1e-9 * span ||
        L.triple.box[a][1] > T.box[a][1] + 1e-9 * span)
      throw Error("domain region lies outside the chart box");
  }

  DomainAssembly A;
  A.triple = T;
  A.spec = spec;
  A.order = order;
  A.closed = L.closed;
  A.region = L.triple.box;

  const int n = T.dim;
  const QuadRule& rule = gauss_legendre(order);

  // Tensor-product volume nodes with the metric volume factor folded in.
  std::size_t total = 1;
  for (int a = 0; a < n; ++a) total *= order;
  A.volume_nodes.reserve(total);
  std::vector<int> idx(n, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % order);
      rem /= order;
    }
    VolumeNode node;
    node.x.resize(n);
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      double lo = A.region[a][0], hi = A.region[a][1];
      double half = 0.5 * (hi - lo);
      node.x[a] = lo + half * (1.0 + rule.nodes[idx[a]]);
      w *= half * rule.weights[idx[a]];
    }
    node.w = w * metric_at(T, node.x).sqrt_det;
    A.volume_nodes.push_back(std::move(node));
  }

  // Boundary frames and nodes with shape data (alpha = 0 baseline).
  ConnectionParams base = ConnectionParams::make(0.0, 0.0, n);
  for (const BoundaryPatch& patch : L.patches) A.frames.emplace_back(T, patch);
  for (std::size_t pi = 0; pi < A.frames.size(); ++pi) {
    const BoundaryFrame& F = A.frames[pi];
    const int m = F.boundary_dim();
    const auto& box = F.patch().param_box;
    std::size_t btotal = 1;
    for (int a = 0; a < m; ++a) btotal *= order;
    std::vector<int> bidx(m, 0);
    for (std::size_t flat = 0; flat < btotal; ++flat) {
      std::size_t rem = flat;
      for (int a = m - 1; a >= 0; --a) {
        bidx[a] = static_cast<int>(rem % order);
        rem /= order;
      }
      BoundaryNode node;
      node.q.resize(m);
      double w = 1.0;
      for (int a = 0; a < m; ++a) {
        double lo = box[a][0], hi = box[a][1];
        double half = 0.5 * (hi - lo);
        node.q[a] = lo + half * (1.0 + rule.nodes[bidx[a]]);
        w *= half * rule.weights[bidx[a]];
      }
      node.w = w * metric_at(F.induced_triple(), node.q).sqrt_det;
      node.shape = shape_at(F, base, node.q);
      node.patch = static_cast<int>(pi);
      A.boundary_nodes.push_back(std::move(node));
    }
  }
  return A;
}

double affine_mean_curvature(const ShapeData& s, const ConnectionParams& params) {
  return s.H + (params.dim - 1) * params.alpha * s.u_nu;
}

double integrate_volume(const DomainAssembly& A,
                        const std::function<double(std::span<const double>)>& f) {
  std::vector<double> terms;
  terms.reserve(A.volume_nodes.size());
  for (const VolumeNode& node : A.volume_nodes) terms.push_back(node.w * f(node.x));
  return pairwise_sum(terms);
}

double integrate_boundary(
    const DomainAssembly& A,
    const std::function<double(const BoundaryFrame&, const BoundaryNode&)>& f) {
  std::vector<double> terms;
  terms.reserve(A.boundary_nodes.size());
  for (const BoundaryNode& node : A.boundary_nodes)
    terms.push_back(node.w * f(A.frames[node.patch], node));
  return pairwise_sum(terms);
}

DomainAssembly refine(const DomainAssembly& A) {
  return build_domain(A.triple, A.spec, 2 * A.order);
}

}  // namespace affgeo
