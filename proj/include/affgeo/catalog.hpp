#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "affgeo/triple.hpp"

namespace affgeo {

/// Built-in chart catalog. Keys: euclidean-2/3, polar-2/3, sphere-2/3,
/// hyperbolic-2/3, warped-2/3. `u_src` is the weight exponent expression
/// (V = e^u); `warp_src` only applies to warped-* entries.
RiemannianTriple catalog_triple(std::string_view name, std::string_view u_src = "0",
                                std::string_view warp_src = "1 + 0.2*sin(x1)");

std::vector<std::string> catalog_triple_names();

/// Replace the weight exponent of an existing triple.
RiemannianTriple with_weight(const RiemannianTriple& T, std::string_view u_src);

/// Build a triple from JSON:
///   {"dim":2, "g":[["1","0"],["0","sin(x1)^2"]], "u":"0",
///    "box":[[0.05,3.09],[0,6.28]]}
RiemannianTriple triple_from_json(const nlohmann::json& j);

nlohmann::json triple_to_json(const RiemannianTriple& T);

}  // namespace affgeo
