#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "parax/mesh.hpp"

namespace parax::grid {

/// Nodal scalar on a mesh, stored row-major over (zeta, y, x).
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(MeshPtr mesh, double fill = 0.0);
  ScalarField(MeshPtr mesh, const std::function<double(double, double, double)>& fn);

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  bool empty() const { return !mesh_; }

  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t n) { return values_[n]; }
  double operator[](std::size_t n) const { return values_[n]; }
  double& at(int i, int j, int k = 0) { return values_[mesh_->index(i, j, k)]; }
  double at(int i, int j, int k = 0) const { return values_[mesh_->index(i, j, k)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

  /// Copy of transverse plane k on the plane mesh `plane`.
  ScalarField slice(int k, const MeshPtr& plane) const;
  void set_slice(int k, const ScalarField& s);

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
  /// this += s * o
  ScalarField& add_scaled(double s, const ScalarField& o);

  double max_abs() const;
  bool all_finite() const;
  bool is_zero() const;

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

struct VectorField2 {
  ScalarField x, y;

  VectorField2() = default;
  explicit VectorField2(MeshPtr mesh) : x(mesh), y(std::move(mesh)) {}
  VectorField2(ScalarField ax, ScalarField ay);

  const Mesh& mesh() const { return x.mesh(); }
  const MeshPtr& mesh_ptr() const { return x.mesh_ptr(); }

  VectorField2 slice(int k, const MeshPtr& plane) const {
    return {x.slice(k, plane), y.slice(k, plane)};
  }
  void set_slice(int k, const VectorField2& s) {
    x.set_slice(k, s.x);
    y.set_slice(k, s.y);
  }
  VectorField2& operator+=(const VectorField2& o);
  VectorField2& operator-=(const VectorField2& o);
  VectorField2& operator*=(double s);
  VectorField2& add_scaled(double s, const VectorField2& o);
  double max_abs() const;
  bool is_zero() const { return x.is_zero() && y.is_zero(); }
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
VectorField2 operator+(VectorField2 a, const VectorField2& b);
VectorField2 operator-(VectorField2 a, const VectorField2& b);
VectorField2 operator*(double s, VectorField2 a);

/// Throws std::invalid_argument when the fields live on different grids.
void require_same_mesh(const ScalarField& a, const ScalarField& b, const char* what);

/// CSV with header `x,y,zeta,<names...>`, rows over (zeta, y, x), 17 significant
/// digits. All columns must share one mesh.
void write_csv(std::ostream& os, const std::vector<std::string>& names,
               const std::vector<const ScalarField*>& columns);
std::string to_csv(const std::vector<std::string>& names,
                   const std::vector<const ScalarField*>& columns);

/// Element-wise norms over nodes not on any boundary plane of the mesh.
double interior_max(const ScalarField& f);
/// sqrt(sum f^2 dV) over interior nodes.
double interior_l2(const ScalarField& f);

}  // namespace parax::grid
