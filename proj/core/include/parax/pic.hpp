#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "parax/hierarchy.hpp"

namespace parax::pic {

using grid::Mesh;
using grid::MeshPtr;
using hierarchy::FieldHierarchy;
using hierarchy::SourceMoments;

/// Macro-particles in beam-frame dimensionless variables. Absorbed particles
/// are removed; `id` keeps the original index.
struct ParticleEnsemble {
  std::vector<std::uint64_t> id;
  std::vector<double> x, y, zeta;
  std::vector<double> vx, vy, vzeta;
  std::vector<double> weight;
  std::size_t absorbed = 0;  ///< cumulative

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }
  void add(double x, double y, double zeta, double vx, double vy, double vzeta, double w);
  double total_weight() const;
  /// Throws std::invalid_argument on size mismatch or non-positive weights.
  void validate() const;
  /// Drops particles outside the closed box [x0, x0+a] x [y0, y0+b] x [0, Z];
  /// returns the number removed.
  std::size_t absorb_outside(const Mesh& m);
  void write_csv(std::ostream& os) const;
};

enum class Family { uniform_ellipse, gaussian, cold_beam };

Family parse_family(const std::string& s);
std::string to_string(Family f);

struct SamplingConfig {
  Family family = Family::uniform_ellipse;
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  /// Transverse centre; NaN selects the pipe centre.
  double cx = std::numeric_limits<double>::quiet_NaN();
  double cy = std::numeric_limits<double>::quiet_NaN();
  /// Ellipse semi-axes (uniform, cold) or standard deviations (gaussian).
  double rx = 0.25, ry = 0.25;
  /// Longitudinal extent: uniform in [zeta_lo, zeta_hi] (uniform, cold) or
  /// mean and standard deviation (gaussian, truncated to (0, Z)).
  double zeta_lo = 0.25, zeta_hi = 0.75;
  double zeta_mean = 0.5, zeta_sigma = 0.1;
  std::array<double, 3> v_mean{0.0, 0.0, 0.0};
  /// Thermal spread of (v_perp, v_zeta); ignored for the cold beam.
  double v_sigma_perp = 0.0, v_sigma_zeta = 0.0;
  /// Sum of the weights.
  double total_charge = 1.0;

  void validate(const Mesh& m) const;
};

/// Deterministic for a given seed.
ParticleEnsemble sample_initial_distribution(const SamplingConfig& cfg, const Mesh& m);

struct DepositReport {
  std::size_t skipped = 0;  ///< particles outside the mesh
};

/// Cloud-in-cell weighting, normalized by the node dual-cell volume, scaled by
/// `charge`. Particles are split into a fixed number of chunks accumulated in
/// separate buffers and merged in chunk order, so results do not depend on the
/// thread count.
SourceMoments deposit_sources(const ParticleEnsemble& p, const MeshPtr& mesh, double charge = 1.0,
                              int threads = 0, DepositReport* report = nullptr);

/// Per-order forces at one particle plus the eta-weighted total.
struct ForceSample {
  std::vector<std::array<double, 2>> Fperp;
  std::vector<double> Fz;
  std::array<double, 2> total_perp{0.0, 0.0};
  double total_z = 0.0;
};

/// Trilinear interpolation of a nodal field.
double interpolate(const grid::ScalarField& f, double x, double y, double zeta);

/// F_perp^i = Ecal^i + (Bz^{i-1} v_perp + v_zeta B_perp^{i-1}) x e_z,
/// F_z^i = Ez^i + v_perp . (B_perp^{i-1} x e_z) for i <= n; total uses h.eta.
/// Throws std::out_of_range when order n is missing.
ForceSample assemble_force(int n, const FieldHierarchy& h, double x, double y, double zeta,
                           double vx, double vy, double vzeta);

/// Returns (F_perp, F_z) for particle i.
using ForceEvaluator = std::function<std::array<double, 3>(const ParticleEnsemble&, std::size_t)>;

ForceEvaluator hierarchy_force(const FieldHierarchy& h, int n);

/// Half kick v_perp += F_perp dt/2, v_zeta -= F_z dt/2.
void kick(ParticleEnsemble& p, const ForceEvaluator& force, double dt, int threads = 0);
/// x += v dt, then absorption at Gamma and the zeta ends; returns the count removed.
std::size_t drift(ParticleEnsemble& p, const Mesh& m, double dt);

/// Kick-drift-kick step with a fixed force evaluator.
std::size_t push_particles(ParticleEnsemble& p, const ForceEvaluator& force, const Mesh& m,
                           double dt, int threads = 0);

/// Interior max of (rho_k - rho_{k-1})/dt + div J_perp + dJ_zeta/dzeta using
/// the latest snapshot's current.
double check_charge_conservation(const std::vector<SourceMoments>& history, double dt);

struct PicConfig {
  MeshPtr mesh;
  double beta = 0.5;
  double eta = 0.1;
  int n_max = 1;
  double charge = 1.0;
  double dt = 0.05;
  int steps = 10;
  hierarchy::ExternalField Be;
  hierarchy::HierarchySettings settings;
  SamplingConfig sampling;

  void validate() const;
};

struct OrderNorms {
  double Ez = 0.0, Bz = 0.0, Eperp = 0.0, Bperp = 0.0, Ecal = 0.0;
};

struct StepDiagnostics {
  int step = 0;
  double time = 0.0;
  std::size_t alive = 0;
  std::size_t absorbed = 0;  ///< cumulative
  double total_weight = 0.0;
  double charge_residual = 0.0;  ///< zero at step 0
  double rms_radius = 0.0;       ///< about the pipe centre
  std::vector<OrderNorms> norms;
  std::vector<int> fixed_point_iterations;
};

struct StepRecord {
  const StepDiagnostics& diag;
  const FieldHierarchy& fields;
  const ParticleEnsemble& particles;
  const SourceMoments& sources;
};

/// deposit -> solve_hierarchy -> forces -> push, recording after each field
/// solve (step 0 is the initial state). The current entering the field solve
/// at step k is the average of the deposits before and after the drift.
/// Failures are rethrown as std::runtime_error stamped with the step.
std::vector<StepDiagnostics> run_pic(const PicConfig& cfg,
                                     const std::function<void(const StepRecord&)>& observer = {});

}  // namespace parax::pic
