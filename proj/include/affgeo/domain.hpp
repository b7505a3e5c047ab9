#pragma once

#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "affgeo/boundary.hpp"
#include "affgeo/triple.hpp"

namespace affgeo {

/// Gauss-Legendre rule on [-1, 1]; results are cached per order.
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const QuadRule& gauss_legendre(int order);

/// Deterministic pairwise sum in index order (bit-for-bit reproducible).
double pairwise_sum(std::span<const double> terms);

/// Named bounded domain with smooth boundary, described in the chart of its
/// canonical triple.
struct DomainSpec {
  std::string name;             // ball2, ball3, box2, box3, annulus2,
                                // ellipsoid (2 or 3 params), cap, band,
                                // sphere2 (closed), hyperbolic2, warpedband
  std::vector<double> params;
  std::string warp = "1 + 0.2*sin(x1)";

  /// Compact form: "ball3:1.0", "ellipsoid:1.5,1,1", "cap:1.047", "sphere2".
  static DomainSpec parse(std::string_view compact);
  static DomainSpec from_json(const nlohmann::json& j);
  std::string to_string() const;
};

std::vector<std::string> catalog_domain_names();

/// Representative parameterized specs, one per catalog family (two for the
/// ellipsoid: planar and spatial).
std::vector<DomainSpec> catalog_domain_specs();

/// Canonical chart triple for a domain spec (weight exponent u_src).
RiemannianTriple domain_triple(const DomainSpec& spec, std::string_view u_src = "0");

struct VolumeNode {
  std::vector<double> x;  // chart point
  double w = 0.0;         // quadrature weight including the volume factor
};

struct BoundaryNode {
  std::vector<double> q;  // boundary parameters
  double w = 0.0;         // quadrature weight including the area factor
  ShapeData shape;        // computed with alpha = 0 (HD = H there)
  int patch = 0;          // index into DomainAssembly::frames
};

struct DomainAssembly {
  RiemannianTriple triple;
  DomainSpec spec;
  int order = 0;
  bool closed = false;
  std::vector<std::array<double, 2>> region;  // chart box of the volume part
  std::vector<VolumeNode> volume_nodes;
  std::vector<BoundaryFrame> frames;
  std::vector<BoundaryNode> boundary_nodes;
};

/// Tensor-product Gauss-Legendre assembly of volume and boundary rules with
/// shape data precomputed at every boundary node.
DomainAssembly build_domain(const RiemannianTriple& T, const DomainSpec& spec,
                            int order);

/// Affine mean curvature for stored shape data: H + (n-1) * alpha * u_nu.
double affine_mean_curvature(const ShapeData& s, const ConnectionParams& params);

double integrate_volume(const DomainAssembly& A,
                        const std::function<double(std::span<const double>)>& f);

double integrate_boundary(
    const DomainAssembly& A,
    const std::function<double(const BoundaryFrame&, const BoundaryNode&)>& f);

/// Same assembly at twice the quadrature order.
DomainAssembly refine(const DomainAssembly& A);

}  // namespace affgeo
