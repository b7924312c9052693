#include "parax/field.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace parax::grid {

ScalarField::ScalarField(MeshPtr mesh, double fill) : mesh_(std::move(mesh)) {
  if (!mesh_) throw std::invalid_argument("field requires a mesh");
  values_.assign(mesh_->size(), fill);
}

ScalarField::ScalarField(MeshPtr mesh, const std::function<double(double, double, double)>& fn)
    : ScalarField(std::move(mesh)) {
  const Mesh& m = *mesh_;
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) values_[m.index(i, j, k)] = fn(m.x(i), m.y(j), m.zeta(k));
}

ScalarField ScalarField::slice(int k, const MeshPtr& plane) const {
  if (plane->nx != mesh_->nx || plane->ny != mesh_->ny)
    throw std::invalid_argument("slice: plane mesh does not match");
  ScalarField s(plane);
  const std::size_t n = mesh_->plane_size();
  std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(n * k), n, s.values_.begin());
  return s;
}

void ScalarField::set_slice(int k, const ScalarField& s) {
  const std::size_t n = mesh_->plane_size();
  if (s.size() != n) throw std::invalid_argument("set_slice: plane size mismatch");
  std::copy(s.values_.begin(), s.values_.end(), values_.begin() + static_cast<std::ptrdiff_t>(n * k));
}

void require_same_mesh(const ScalarField& a, const ScalarField& b, const char* what) {
  if (a.empty() || b.empty() || (a.mesh_ptr() != b.mesh_ptr() && !a.mesh().same_grid(b.mesh())))
    throw std::invalid_argument(std::string(what) + ": fields live on different meshes");
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_mesh(*this, o, "operator+=");
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += o.values_[n];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_mesh(*this, o, "operator-=");
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= o.values_[n];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::add_scaled(double s, const ScalarField& o) {
  require_same_mesh(*this, o, "add_scaled");
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += s * o.values_[n];
  return *this;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool ScalarField::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

VectorField2::VectorField2(ScalarField ax, ScalarField ay) : x(std::move(ax)), y(std::move(ay)) {
  require_same_mesh(x, y, "VectorField2");
}

VectorField2& VectorField2::operator+=(const VectorField2& o) {
  x += o.x;
  y += o.y;
  return *this;
}
VectorField2& VectorField2::operator-=(const VectorField2& o) {
  x -= o.x;
  y -= o.y;
  return *this;
}
VectorField2& VectorField2::operator*=(double s) {
  x *= s;
  y *= s;
  return *this;
}
VectorField2& VectorField2::add_scaled(double s, const VectorField2& o) {
  x.add_scaled(s, o.x);
  y.add_scaled(s, o.y);
  return *this;
}
double VectorField2::max_abs() const { return std::max(x.max_abs(), y.max_abs()); }

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
VectorField2 operator+(VectorField2 a, const VectorField2& b) { return a += b; }
VectorField2 operator-(VectorField2 a, const VectorField2& b) { return a -= b; }
VectorField2 operator*(double s, VectorField2 a) { return a *= s; }

void write_csv(std::ostream& os, const std::vector<std::string>& names,
               const std::vector<const ScalarField*>& columns) {
  if (names.size() != columns.size() || columns.empty())
    throw std::invalid_argument("write_csv: one name per column required");
  for (const auto* c : columns) require_same_mesh(*columns.front(), *c, "write_csv");
  const Mesh& m = columns.front()->mesh();
  os << "x,y,zeta";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  os << std::setprecision(17);
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) {
        os << m.x(i) << ',' << m.y(j) << ',' << m.zeta(k);
        const std::size_t n = m.index(i, j, k);
        for (const auto* c : columns) os << ',' << (*c)[n];
        os << '\n';
      }
}

std::string to_csv(const std::vector<std::string>& names,
                   const std::vector<const ScalarField*>& columns) {
  std::ostringstream os;
  write_csv(os, names, columns);
  return os.str();
}

namespace {

template <class Fn>
void for_interior(const Mesh& m, Fn&& fn) {
  const int k0 = m.nz > 1 ? 1 : 0, k1 = m.nz > 1 ? m.nz - 1 : 1;
  for (int k = k0; k < k1; ++k)
    for (int j = 1; j < m.ny - 1; ++j)
      for (int i = 1; i < m.nx - 1; ++i) fn(m.index(i, j, k));
}

}  // namespace

double interior_max(const ScalarField& f) {
  double r = 0.0;
  for_interior(f.mesh(), [&](std::size_t n) { r = std::max(r, std::abs(f[n])); });
  return r;
}

double interior_l2(const ScalarField& f) {
  const Mesh& m = f.mesh();
  double s = 0.0;
  for_interior(m, [&](std::size_t n) { s += f[n] * f[n]; });
  const double dv = m.hx * m.hy * (m.nz > 1 ? m.hz : 1.0);
  return std::sqrt(s * dv);
}

}  // namespace parax::grid
