#include "affgeo/catalog.hpp"

#include <cmath>

namespace affgeo {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr double kPi = 3.141592653589793;
// Collar keeping chart boxes clear of coordinate singularities (polar origin,
// sphere poles).
constexpr double kCollar = 0.05;

std::vector<std::vector<Field>> diag_metric(const std::vector<std::string>& entries,
                                            int dim) {
  std::vector<std::vector<Field>> g(dim, std::vector<Field>(dim));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      g[i][j] = Field::parse(i == j ? entries[i] : "0", dim);
  return g;
}

}  // namespace

RiemannianTriple catalog_triple(std::string_view name, std::string_view u_src,
                                std::string_view warp_src) {
  std::string key(name);
  int dim = 0;
  std::vector<std::vector<Field>> g;
  std::vector<std::array<double, 2>> box;
  std::string w(warp_src);

  if (key == "euclidean-2") {
    dim = 2;
    g = diag_metric({"1", "1"}, dim);
    box = {{-1.5, 1.5}, {-1.5, 1.5}};
  } else if (key == "euclidean-3") {
    dim = 3;
    g = diag_metric({"1", "1", "1"}, dim);
    box = {{-1.5, 1.5}, {-1.5, 1.5}, {-1.5, 1.5}};
  } else if (key == "polar-2") {
    dim = 2;
    g = diag_metric({"1", "x1^2"}, dim);
    box = {{kCollar, 2.0}, {0.0, kTwoPi}};
  } else if (key == "polar-3") {
    dim = 3;
    g = diag_metric({"1", "x1^2", "x1^2*sin(x2)^2"}, dim);
    box = {{kCollar, 2.0}, {kCollar, kPi - kCollar}, {0.0, kTwoPi}};
  } else if (key == "sphere-2") {
    dim = 2;
    g = diag_metric({"1", "sin(x1)^2"}, dim);
    box = {{kCollar, kPi - kCollar}, {0.0, kTwoPi}};
  } else if (key == "sphere-3") {
    dim = 3;
    g = diag_metric({"1", "sin(x1)^2", "sin(x1)^2*sin(x2)^2"}, dim);
    box = {{kCollar, kPi - kCollar}, {kCollar, kPi - kCollar}, {0.0, kTwoPi}};
  } else if (key == "hyperbolic-2") {
    dim = 2;
    g = diag_metric({"1", "sinh(x1)^2"}, dim);
    box = {{kCollar, 2.0}, {0.0, kTwoPi}};
  } else if (key == "hyperbolic-3") {
    dim = 3;
    g = diag_metric({"1", "sinh(x1)^2", "sinh(x1)^2*sin(x2)^2"}, dim);
    box = {{kCollar, 2.0}, {kCollar, kPi - kCollar}, {0.0, kTwoPi}};
  } else if (key == "warped-2") {
    dim = 2;
    g = diag_metric({"1", "(" + w + ")^2"}, dim);
    box = {{-1.5, 1.5}, {0.0, kTwoPi}};
  } else if (key == "warped-3") {
    dim = 3;
    g = diag_metric({"1", "(" + w + ")^2", "(" + w + ")^2*sin(x2)^2"}, dim);
    box = {{-1.5, 1.5}, {kCollar, kPi - kCollar}, {0.0, kTwoPi}};
  } else {
    throw Error("unknown catalog triple '" + key + "'");
  }

  return RiemannianTriple::make(dim, std::move(g), Field::parse(u_src, dim),
                                std::move(box));
}

std::vector<std::string> catalog_triple_names() {
  return {"euclidean-2", "euclidean-3", "polar-2",      "polar-3",
          "sphere-2",    "sphere-3",    "hyperbolic-2", "hyperbolic-3",
          "warped-2",    "warped-3"};
}

RiemannianTriple with_weight(const RiemannianTriple& T, std::string_view u_src) {
  RiemannianTriple out = T;
  out.u = Field::parse(u_src, T.dim);
  return out;
}

RiemannianTriple triple_from_json(const nlohmann::json& j) {
  if (!j.contains("dim") || !j.contains("g") || !j.contains("box"))
    throw Error("triple config needs keys dim, g, box");
  int dim = j.at("dim").get<int>();
  if (dim < 2) throw Error("triple config dimension must be >= 2");

  const auto& gj = j.at("g");
  if (!gj.is_array() || static_cast<int>(gj.size()) != dim)
    throw Error("triple config 'g' must be a dim x dim array of expressions");
  std::vector<std::vector<Field>> g(dim, std::vector<Field>(dim));
  for (int i = 0; i < dim; ++i) {
    const auto& row = gj.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw Error("triple config 'g' must be a dim x dim array of expressions");
    for (int k = 0; k < dim; ++k)
      g[i][k] = Field::parse(row.at(k).get<std::string>(), dim);
  }

  std::string u_src = j.value("u", std::string("0"));
  Field u = Field::parse(u_src, dim);

  const auto& bj = j.at("box");
  if (!bj.is_array() || static_cast<int>(bj.size()) != dim)
    throw Error("triple config 'box' must list one interval per coordinate");
  std::vector<std::array<double, 2>> box(dim);
  for (int a = 0; a < dim; ++a) {
    const auto& iv = bj.at(a);
    if (!iv.is_array() || iv.size() != 2)
      throw Error("triple config box entries must be [lo, hi]");
    box[a] = {iv.at(0).get<double>(), iv.at(1).get<double>()};
  }

  return RiemannianTriple::make(dim, std::move(g), std::move(u), std::move(box));
}

nlohmann::json triple_to_json(const RiemannianTriple& T) {
  nlohmann::json j;
  j["dim"] = T.dim;
  nlohmann::json gj = nlohmann::json::array();
  for (int i = 0; i < T.dim; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < T.dim; ++k) row.push_back(T.g[i][k].to_string());
    gj.push_back(row);
  }
  j["g"] = gj;
  j["u"] = T.u.to_string();
  nlohmann::json bj = nlohmann::json::array();
  for (const auto& iv : T.box) bj.push_back({iv[0], iv[1]});
  j["box"] = bj;
  return j;
}

}  // namespace affgeo
