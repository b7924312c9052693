#pragma once

#include <array>
#include <vector>

#include "parax/field.hpp"

namespace parax::grid {

// Transverse difference operators. Interior nodes use centered second-order
// differences, Gamma nodes one-sided second-order stencils. Volume fields are
// processed plane by plane.

ScalarField d_dx(const ScalarField& f);
ScalarField d_dy(const ScalarField& f);
/// Fourth-order variants (five-point stencils, one-sided near Gamma); used to
/// assemble elliptic sources. Fall back to second order below 5 nodes.
ScalarField d_dx4(const ScalarField& f);
ScalarField d_dy4(const ScalarField& f);
ScalarField d_dzeta4(const ScalarField& f);
VectorField2 d_dzeta4(const VectorField2& f);
VectorField2 grad_perp4(const ScalarField& phi);
ScalarField div_perp4(const VectorField2& a);
VectorField2 curl_perp_scalar4(const ScalarField& phi);
ScalarField curl_perp_vector4(const VectorField2& a);
/// Longitudinal derivative; one-sided second order on the zeta end planes.
ScalarField d_dzeta(const ScalarField& f);
ScalarField d2_dzeta2(const ScalarField& f);
VectorField2 d_dzeta(const VectorField2& f);
VectorField2 d2_dzeta2(const VectorField2& f);

VectorField2 grad_perp(const ScalarField& phi);
ScalarField div_perp(const VectorField2& a);
/// (d phi/dy, -d phi/dx)
VectorField2 curl_perp_scalar(const ScalarField& phi);
/// dA_y/dx - dA_x/dy
ScalarField curl_perp_vector(const VectorField2& a);
/// Five-point Laplacian in the interior; one-sided second derivatives on Gamma.
ScalarField laplace_perp(const ScalarField& phi);
/// (A_y, -A_x)
VectorField2 cross_ez(const VectorField2& a);

/// Scalar data on Gamma for one transverse plane, stored per side in
/// increasing coordinate order. Corner nodes appear on both adjacent sides.
struct BoundaryTrace {
  std::array<std::vector<double>, 4> side;

  static BoundaryTrace zeros(const Mesh& m);
  std::vector<double>& operator[](Side s) { return side[static_cast<int>(s)]; }
  const std::vector<double>& operator[](Side s) const { return side[static_cast<int>(s)]; }
  double max_abs() const;
};

/// A . tau on each side of plane k.
BoundaryTrace boundary_tangential_trace(const VectorField2& a, int k = 0);
/// A . nu on each side of plane k.
BoundaryTrace boundary_normal_trace(const VectorField2& a, int k = 0);
/// Per-node traces using the mesh boundary table (corner nodes use the
/// diagonal normal).
std::vector<double> boundary_node_tangential(const VectorField2& a, int k = 0);
std::vector<double> boundary_node_normal(const VectorField2& a, int k = 0);

/// Trapezoid line integral of a side-wise trace around Gamma.
double line_integral(const Mesh& m, const BoundaryTrace& t);
/// Counterclockwise circulation of A along Gamma at plane k.
double circulation(const VectorField2& a, int k = 0);
/// Outward flux of A through Gamma at plane k.
double flux(const VectorField2& a, int k = 0);
/// Trapezoid integral over the transverse plane k.
double plane_integral(const ScalarField& f, int k = 0);
/// Trapezoid integral over the whole mesh.
double volume_integral(const ScalarField& f);
/// Trapezoid quadrature weight of node (i, j, k) (dual-cell volume).
double node_weight(const Mesh& m, int i, int j, int k = 0);

}  // namespace parax::grid
