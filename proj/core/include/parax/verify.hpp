#pragma once

#include <array>
#include <string>
#include <vector>

#include "parax/hierarchy.hpp"

namespace parax::verify {

using grid::MeshPtr;
using grid::ScalarField;
using grid::VectorField2;
using hierarchy::FieldHierarchy;
using hierarchy::FieldHistory;
using hierarchy::FieldOrder;
using hierarchy::SourceMoments;

/// Closed-form oracle on a given mesh. Which members are filled depends on the
/// case: scalar_* for Poisson cases, div/curl/vector_exact for div-curl cases,
/// sources/exact for hierarchy cases.
struct ManufacturedSolution {
  std::string id;
  MeshPtr mesh;
  double beta = 0.5;
  ScalarField scalar_rhs, scalar_exact;
  ScalarField div_src, curl_src;
  VectorField2 vector_exact;
  std::vector<SourceMoments> sources;
  FieldOrder exact;
};

std::vector<std::string> mms_case_ids();
/// Throws std::invalid_argument for unknown ids or meshes of the wrong kind
/// (planar cases need nz == 1, volume cases nz >= 3).
ManufacturedSolution mms_case(const std::string& id, const MeshPtr& mesh, double beta,
                              double time = 0.0, double dt = 0.1);

/// Amplitude g(t) = 1 + t^2 of the quasi-static family.
double quasi_static_amplitude(double t);
/// rho = g(t) K^2 phi, J_perp = 0, J_zeta from the backward difference of g so
/// that d rho/dt + dJ_zeta/dzeta = 0 holds for the same backward difference.
SourceMoments quasi_static_sources(const MeshPtr& mesh, double beta, double t, double dt);

struct EquationNorm {
  std::string name;
  double l2 = 0.0;
  double max = 0.0;
};

struct ResidualReport {
  std::array<EquationNorm, 6> equations;
  double eta = 0.0, beta = 0.0, time = 0.0;
  int n_max = 0;
  int nx = 0, ny = 0, nz = 0;

  /// sqrt of the sum of squared per-equation L2 norms.
  double combined_l2() const;
  double combined_max() const;
};

/// Pointwise residuals of the six scaled equations (vector equations split).
struct ResidualFields {
  static constexpr int count = 8;
  static const std::array<const char*, count>& names();
  std::array<ScalarField, count> r;  ///< R1x R1y R2 R3 R4x R4y R5 R6
};

/// Reconstructs the eta-weighted totals of `h` (and the latest history
/// snapshot for d/dt) and substitutes them in the scaled system. Sources are
/// summed the same way. Without history d/dt is zero; that requires zero
/// current (a moving charge needs history).
ResidualFields maxwell_residual_fields(const FieldHierarchy& h, double eta,
                                       const std::vector<SourceMoments>& sources,
                                       const FieldHistory& history);
ResidualReport residual_report(const ResidualFields& r, const FieldHierarchy& h, double eta);
ResidualReport maxwell_residual(const FieldHierarchy& h, double eta,
                                const std::vector<SourceMoments>& sources,
                                const FieldHistory& history);

/// (4 R_fine - R_coarse) / 3 on the coarse nodes; the fine mesh must refine
/// the coarse one by 2 per axis.
ResidualFields richardson(const ResidualFields& fine, const ResidualFields& coarse);

struct ConvergenceReport {
  std::string target;
  std::string parameter_name;
  std::vector<double> parameter;
  std::vector<double> error;
  double slope = 0.0;
  double target_order = 0.0;
  bool passed() const { return slope >= target_order; }
};

/// Least-squares slope of log(error) against log(parameter). Requires >= 3
/// strictly monotone parameters and positive errors.
ConvergenceReport fit_convergence(std::string target, std::string parameter_name,
                                  std::vector<double> parameter, std::vector<double> error,
                                  double target_order);

/// Convergence targets for mms_error.
std::vector<std::string> convergence_targets();
/// Max-norm error of one solver against its oracle with `intervals` cells per
/// axis (transverse only for planar targets).
double mms_error(const std::string& target, int intervals, double beta = 0.5);
/// h-study over the interval counts (h = 1 / intervals).
ConvergenceReport convergence_study(const std::string& target, const std::vector<int>& intervals,
                                    double beta = 0.5, double target_order = 1.9);

struct EtaStudyConfig {
  int intervals_perp = 64;  ///< fine grid; the coarse grid has half
  int intervals_zeta = 32;
  double beta = 0.5;
  double dt = 0.1;
  std::vector<double> etas{0.2, 0.1, 0.05};
  int n_max = 1;
  hierarchy::HierarchySettings settings;
};

struct EtaStudy {
  /// One report per order 0..n_max, residuals Richardson-corrected.
  std::vector<ConvergenceReport> fits;
  /// residual[n][i] for etas[i] without Richardson (fine grid).
  std::vector<std::vector<double>> raw_fine;
};

/// Solves the quasi-static family at t = 0, dt, 2 dt on both grids and fits
/// the corrected residual at 2 dt against eta for every truncation order.
EtaStudy eta_scaling_study(const EtaStudyConfig& cfg);

}  // namespace parax::verify
