#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "affgeo/connection.hpp"
#include "affgeo/triple.hpp"

namespace affgeo {

/// Parametrized boundary hypersurface: a map from (n-1) parameters into the
/// ambient chart, each component an exact expression. `orientation` flips the
/// computed normal so that it points out of the enclosed domain.
struct BoundaryPatch {
  std::vector<Field> map;                        // n components over n-1 params
  std::vector<std::array<double, 2>> param_box;  // n-1 intervals
  double orientation = 1.0;                      // +1 or -1

  static BoundaryPatch make(std::vector<Field> map,
                            std::vector<std::array<double, 2>> param_box,
                            double orientation = 1.0);
};

struct ShapeData {
  Eigen::VectorXd nu;      // unit outward normal, ambient chart components
  Eigen::MatrixXd h;       // second fundamental form on the parameter basis
  Eigen::MatrixXd g_ind;   // induced metric on the parameter basis
  double H = 0.0;          // mean curvature (trace of h against g_ind)
  double HD = 0.0;         // H + (n-1) * alpha * u_nu
  double u_nu = 0.0;       // normal derivative of the weight exponent
};

/// Symbolic frame bundle of a patch: tangents, unit normal, and induced
/// metric as exact expressions in the boundary parameters. Construction cost
/// is paid once; evaluations are pointwise.
class BoundaryFrame {
public:
  BoundaryFrame(RiemannianTriple ambient, BoundaryPatch patch);

  int ambient_dim() const { return n_; }
  int boundary_dim() const { return m_; }
  const RiemannianTriple& ambient() const { return ambient_; }
  const BoundaryPatch& patch() const { return patch_; }

  /// (n-1)-dimensional chart of the hypersurface with the induced metric;
  /// weight exponent is the restriction of the ambient one.
  const RiemannianTriple& induced_triple() const { return induced_; }

  /// Ambient scalar pulled back to the boundary parameters.
  Field restrict_field(const Field& ambient_f) const;

  /// Components of the unit outward normal as expressions in the parameters.
  const std::vector<Field>& normal_components() const { return nu_; }

  /// f_nu = nu^i d_i f as an exact expression in the boundary parameters
  /// (used where the normal derivative must itself be differentiated
  /// tangentially).
  Field normal_derivative_field(const Field& ambient_f) const;

  std::vector<double> ambient_point(std::span<const double> q) const;

private:
  friend ShapeData shape_at(const BoundaryFrame& F, const ConnectionParams& params,
                            std::span<const double> q);

  RiemannianTriple ambient_;
  BoundaryPatch patch_;
  int n_ = 0, m_ = 0;
  std::vector<std::vector<Field>> tangents_;  // [a][i] = d_a y^i
  std::vector<Field> nu_;                     // unit outward normal components
  RiemannianTriple induced_;
};

ShapeData shape_at(const BoundaryFrame& F, const ConnectionParams& params,
                   std::span<const double> q);

ShapeData shape_at(const RiemannianTriple& T, const BoundaryPatch& P,
                   const ConnectionParams& params, std::span<const double> q);

/// Intrinsic gradient of the restricted scalar in the parameter basis,
/// plain and weight-scaled: (grad f, V^{gamma-alpha} grad f).
struct TangentGradient {
  Eigen::VectorXd grad;
  Eigen::VectorXd d_grad;
};

TangentGradient tangential_gradient_at(const BoundaryFrame& F,
                                       const ConnectionParams& params,
                                       const Field& ambient_f,
                                       std::span<const double> q);

/// The bilinear form h - gamma * u_nu * g_ind on the tangent space.
Eigen::MatrixXd boundary_form_at(const BoundaryFrame& F,
                                 const ConnectionParams& params,
                                 std::span<const double> q);

/// Frobenius norm (indices raised by g_ind) of the trace-free part of h.
double umbilicity_defect(const BoundaryFrame& F, std::span<const double> q);

/// Ambient normal derivative of f at the boundary point.
double normal_derivative_at(const BoundaryFrame& F, const Field& ambient_f,
                            std::span<const double> q);

}  // namespace affgeo
