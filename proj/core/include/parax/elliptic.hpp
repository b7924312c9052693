#pragma once

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "parax/field.hpp"
#include "parax/operators.hpp"

namespace parax::elliptic {

enum class BcKind { dirichlet, neumann };
enum class Face { x_lo = 0, x_hi, y_lo, y_hi, zeta_lo, zeta_hi };
inline constexpr int face_count = 6;

/// Boundary data per face. Dirichlet faces carry values, Neumann faces the
/// outward normal derivative. Data are full-mesh nodal arrays (only entries on
/// the face are read); an empty array means homogeneous data. Zeta faces are
/// ignored on planar meshes. Nodes shared by a Dirichlet and a Neumann face
/// are Dirichlet.
struct BoundarySpec {
  std::array<BcKind, face_count> kind{BcKind::dirichlet, BcKind::dirichlet, BcKind::dirichlet,
                                      BcKind::dirichlet, BcKind::dirichlet, BcKind::dirichlet};
  std::array<std::vector<double>, face_count> values;

  static BoundarySpec all(BcKind k);
  BcKind& operator[](Face f) { return kind[static_cast<int>(f)]; }
  BcKind operator[](Face f) const { return kind[static_cast<int>(f)]; }
  std::vector<double>& data(Face f, const grid::Mesh& m);
  /// Fill the face data from fn(x, y, zeta).
  void set(Face f, const grid::Mesh& m, const std::function<double(double, double, double)>& fn);
  double value(Face f, std::size_t node) const;
};

enum class Method { automatic, conjugate_gradient, direct };

struct SolverSettings {
  double tolerance = 1e-10;
  /// 0 selects 10 * sqrt(unknowns).
  int max_iterations = 0;
  Method method = Method::automatic;
  /// Relative defect allowed in the solvability condition of singular
  /// problems before IncompatibleData is thrown; the defect is then removed
  /// by a uniform shift of the source. Negative disables the check.
  double compatibility_tolerance = 5e-2;

  void validate() const;
};

struct SolveReport {
  Method used = Method::automatic;
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> residual_history;
  /// Relative solvability defect that was projected out (singular problems).
  double compatibility_defect = 0.0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveReport r)
      : std::runtime_error(what), report(std::move(r)) {}
  SolveReport report;
};

class IncompatibleData : public std::invalid_argument {
 public:
  IncompatibleData(const std::string& what, double defect)
      : std::invalid_argument(what), defect(defect) {}
  double defect;
};

/// Discrete (Delta_perp + kappa d^2/dzeta^2) on a mesh with fixed boundary
/// kinds. Neumann faces use mirrored ghost nodes; boundary rows are scaled by
/// their trapezoid weights so the system is symmetric. Planar meshes ignore
/// kappa. The direct path factors once in the constructor; solve() is const
/// and reentrant.
class PoissonOperator {
 public:
  PoissonOperator(grid::MeshPtr mesh, double kappa, std::array<BcKind, face_count> kinds,
                  SolverSettings settings = {});
  ~PoissonOperator();
  PoissonOperator(PoissonOperator&&) noexcept;
  PoissonOperator& operator=(PoissonOperator&&) noexcept;

  grid::ScalarField solve(const grid::ScalarField& rhs, const BoundarySpec& bc,
                          SolveReport* report = nullptr) const;
  /// L u evaluated with the same stencils as the solver (ghost data from bc).
  grid::ScalarField apply(const grid::ScalarField& u, const BoundarySpec& bc) const;

  bool singular() const;
  std::size_t unknowns() const;
  Method method() const;
  const grid::Mesh& mesh() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

grid::ScalarField solve_poisson_2d(const grid::ScalarField& rhs, const BoundarySpec& bc,
                                   const SolverSettings& settings = {},
                                   SolveReport* report = nullptr);

/// Requires 0 < kappa < 1.
grid::ScalarField solve_anisotropic_poisson_3d(double kappa, const grid::ScalarField& rhs,
                                               const BoundarySpec& bc,
                                               const SolverSettings& settings = {},
                                               SolveReport* report = nullptr);

/// Which boundary trace the div-curl data prescribes.
enum class TraceKind {
  tangential,  ///< A . tau given; constraint is the circulation
  normal,      ///< A . nu given; constraint is the outward flux
};

struct DivCurlReport {
  SolveReport x;  ///< A_x component solve
  SolveReport y;  ///< A_y component solve
  /// |constraint - integral of the matching source| / scale
  double constraint_defect = 0.0;
  /// |line integral of the trace data - integral of the matching source| / scale
  double trace_defect = 0.0;
};

/// 2D div-curl solve for A with div A = div_src, curl A = curl_src and one
/// boundary trace. Each component solves Delta A = grad(div_src) +
/// curl(curl_src) rotated, i.e. Delta A_x = dx D - dy C, Delta A_y = dy D + dx C.
/// The traced component is Dirichlet on each side; the other one gets the
/// Neumann data implied by the divergence (tangential data) or curl (normal
/// data) equation.
class DivCurlSolver {
 public:
  DivCurlSolver(grid::MeshPtr plane, SolverSettings settings = {});

  /// `constraint` is the circulation (tangential) or flux (normal) and is
  /// checked against the integral of the curl (divergence) source.
  grid::VectorField2 solve(const grid::ScalarField& div_src, const grid::ScalarField& curl_src,
                           const grid::BoundaryTrace& data, TraceKind kind, double constraint,
                           DivCurlReport* report = nullptr) const;

  const SolverSettings& settings() const { return settings_; }

 private:
  grid::MeshPtr plane_;
  SolverSettings settings_;
  PoissonOperator x_neumann_;  ///< Neumann on x faces, Dirichlet on y faces
  PoissonOperator y_neumann_;  ///< Dirichlet on x faces, Neumann on y faces
};

grid::VectorField2 solve_divcurl_2d(const grid::ScalarField& div_src,
                                    const grid::ScalarField& curl_src,
                                    const grid::BoundaryTrace& data, TraceKind kind,
                                    double constraint, const SolverSettings& settings = {},
                                    DivCurlReport* report = nullptr);

/// Face data for a transverse side over all zeta planes from a per-plane trace.
void set_side_data(BoundarySpec& bc, const grid::Mesh& m, grid::Side side, int k,
                   const std::vector<double>& values);
Face face_of(grid::Side s);

}  // namespace parax::elliptic
