#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "parax/elliptic.hpp"
#include "parax/field.hpp"
#include "parax/operators.hpp"

namespace parax::hierarchy {

using grid::MeshPtr;
using grid::ScalarField;
using grid::VectorField2;

/// Charge and current densities on the volume mesh (dimensionless).
struct SourceMoments {
  ScalarField rho;
  VectorField2 Jperp;
  ScalarField Jzeta;

  static SourceMoments zeros(const MeshPtr& mesh);
  bool is_zero() const { return rho.is_zero() && Jperp.is_zero() && Jzeta.is_zero(); }
};

/// Coefficient of eta^n in the field expansion.
struct FieldOrder {
  int n = 0;
  ScalarField Ez, Bz;
  VectorField2 Eperp, Bperp, Ecal;

  static FieldOrder zeros(const MeshPtr& mesh, int n = 0);
  bool is_zero() const;
  const MeshPtr& mesh_ptr() const { return Ez.mesh_ptr(); }
};

/// Uniform applied magnetic field, entering order 0 only.
struct ExternalField {
  double bx = 0.0, by = 0.0, bz = 0.0;
  bool is_zero() const { return bx == 0.0 && by == 0.0 && bz == 0.0; }
};

struct HierarchySettings {
  elliptic::SolverSettings solver;
  /// Bound on successive B_perp . nu trace differences in the fixed-point loop.
  double tolerance = 1e-10;
  int max_fixed_point = 20;
  int threads = 0;

  void validate() const;
};

struct OrderDiagnostics {
  int n = 0;
  int fixed_point_iterations = 0;
  std::vector<double> trace_history;
  int solver_iterations = 0;
  double max_solver_residual = 0.0;
  /// Interior max-norm residuals, evaluated with the fourth-order differences.
  double gauss_residual = 0.0;
  double solenoidal_residual = 0.0;
  double pseudo_field_residual = 0.0;
  /// Worst relative per-slice defect between the prescribed boundary trace and
  /// the matching source integral.
  double circulation_defect = 0.0;
  double flux_defect = 0.0;
  /// max over slices of |int div B_perp + (1/beta) int dBz^{n-1}/dt|
  double bz_constraint_residual = 0.0;
};

class FixedPointError : public std::runtime_error {
 public:
  FixedPointError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history(std::move(history)) {}
  std::vector<double> history;
};

struct FieldHierarchy {
  MeshPtr mesh;
  double beta = 0.5;
  double eta = 0.1;
  double time = 0.0;
  ExternalField Be;
  std::vector<FieldOrder> orders;
  std::vector<OrderDiagnostics> diagnostics;

  int n_max() const { return static_cast<int>(orders.size()) - 1; }
  /// Throws std::out_of_range for orders not computed.
  const FieldOrder& order(int n) const;
  /// sum_{i <= n} eta^i F^i (n < 0 selects all orders).
  FieldOrder total(int n = -1) const;
};

enum class Component { Ez, Bz, Ex, Ey, Bx, By, Ecal_x, Ecal_y };

const ScalarField& component(const FieldOrder& f, Component c);

/// Recent snapshots, oldest first, with strictly increasing times.
class FieldHistory {
 public:
  explicit FieldHistory(std::size_t depth = 2);

  /// Throws std::invalid_argument when h.time does not exceed the latest time.
  void push(FieldHierarchy h);
  void clear() { snaps_.clear(); }
  std::size_t size() const { return snaps_.size(); }
  bool empty() const { return snaps_.empty(); }
  std::size_t depth() const { return depth_; }
  const FieldHierarchy& latest() const;
  const FieldHierarchy& at(std::size_t i) const { return snaps_.at(i); }

  /// (F_k - F_{k-1}) / dt over the two newest snapshots; zero with one snapshot.
  ScalarField time_derivative(int order, Component c) const;

 private:
  std::size_t depth_;
  std::deque<FieldHierarchy> snaps_;
};

/// Cached operators for one volume mesh and beta.
class Solvers {
 public:
  Solvers(MeshPtr mesh, double beta, elliptic::SolverSettings settings = {});

  const grid::Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const MeshPtr& plane() const { return plane_; }
  double beta() const { return beta_; }
  double kappa() const { return 1.0 - beta_ * beta_; }
  const elliptic::PoissonOperator& ez() const { return ez_; }
  const elliptic::PoissonOperator& ex() const { return ex_; }
  const elliptic::PoissonOperator& ey() const { return ey_; }
  const elliptic::DivCurlSolver& divcurl() const { return divcurl_; }

 private:
  MeshPtr mesh_, plane_;
  double beta_;
  elliptic::PoissonOperator ez_, ex_, ey_;
  elliptic::DivCurlSolver divcurl_;
};

/// Everything order n needs from lower orders and sources at the current time.
struct OrderInputs {
  int n = 0;
  double beta = 0.5;
  ScalarField rho;        ///< rho^n
  VectorField2 Jperp;     ///< J_perp^{n-1}
  ScalarField Jzeta;      ///< J_zeta^{n-1}
  FieldOrder lower;       ///< order n-1 (zero for n = 0)
  FieldOrder rate;        ///< time derivative of order n-1
  ExternalField Be;       ///< applied field (order 0 only, zero otherwise)
  int threads = 0;

  double kappa() const { return 1.0 - beta * beta; }
  const MeshPtr& mesh_ptr() const { return rho.mesh_ptr(); }
};

/// Builds the inputs of order n. `current` holds the completed orders < n at
/// `time`; `previous` is the latest earlier snapshot (nullptr at cold start).
OrderInputs make_order_inputs(int n, const std::vector<SourceMoments>& sources,
                              const std::vector<FieldOrder>& current, double time,
                              const FieldHierarchy* previous, double beta,
                              const ExternalField& Be, int threads = 0);

/// Per-plane traces of B_perp^n . nu on Gamma. Integrates
/// beta d(B.nu)/dzeta = -d(B^{n-1}.nu)/dt from zeta = 0.
std::vector<grid::BoundaryTrace> bperp_normal_trace(const OrderInputs& in);

ScalarField solve_Ez_order(const OrderInputs& in, const Solvers& s,
                           OrderDiagnostics* diag = nullptr);
/// `bperp_nu` holds B_perp^n . nu per plane; the tangential data is beta times it.
VectorField2 solve_Ecal_order(const OrderInputs& in, const ScalarField& Ez,
                              const std::vector<grid::BoundaryTrace>& bperp_nu, const Solvers& s,
                              OrderDiagnostics* diag = nullptr);
VectorField2 solve_Eperp_order(const OrderInputs& in, const VectorField2& Ecal,
                               const ScalarField& Ez, const Solvers& s,
                               OrderDiagnostics* diag = nullptr);
VectorField2 solve_Bperp_order(const OrderInputs& in, const VectorField2& Eperp,
                               const std::vector<grid::BoundaryTrace>& bperp_nu, const Solvers& s,
                               OrderDiagnostics* diag = nullptr);
ScalarField solve_Bz_order(const OrderInputs& in, const VectorField2& Bperp,
                           OrderDiagnostics* diag = nullptr);

/// Fills the residual fields of diag from a completed order.
void evaluate_constraints(const OrderInputs& in, const FieldOrder& f, OrderDiagnostics& diag);

/// Solves orders 0..n_max at `time`. Missing source orders are zero. The
/// history supplies the previous snapshot for time derivatives and the
/// initial B_perp trace guess.
FieldHierarchy solve_hierarchy(int n_max, const std::vector<SourceMoments>& sources,
                               const FieldHistory& history, double time, double beta, double eta,
                               const ExternalField& Be, const HierarchySettings& settings = {},
                               const Solvers* cache = nullptr);

}  // namespace parax::hierarchy
