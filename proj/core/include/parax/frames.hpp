#pragma once

#include <array>
#include <span>

namespace parax::frames {

/// SI constants plus the particle species. Natural units (c = eps0 = mu0 = 1)
/// are available through natural_units().
struct PhysicalConstants {
  double c = 299792458.0;
  double eps0 = 8.8541878128e-12;
  double mu0 = 1.25663706212e-6;
  double m = 9.1093837015e-31;
  double q = 1.602176634e-19;

  /// Throws std::invalid_argument unless c > 0 and eps0*mu0*c^2 = 1 (1e-12 rel).
  void validate() const;
};

PhysicalConstants si_electron();
PhysicalConstants natural_units();

/// Characteristic scales and the derived scale factors. eta is stored, not
/// recomputed, so that it can be swept independently of beta.
struct ScalingParameters {
  double beta = 0.5;
  double l = 1.0;
  double vbar = 1.0;
  double eta = 0.1;
  double T = 1.0;
  double Ebar = 1.0;
  double Bbar = 1.0;
  double rhobar = 1.0;
  double fbar = 1.0;
  double Jbar = 1.0;
  double Fbar = 1.0;
  /// Set when eta > eta_warning_threshold.
  bool weak_separation = false;
};

inline constexpr double eta_warning_threshold = 0.3;

ScalingParameters compute_scaling(double l, double vbar, const PhysicalConstants& pc,
                                  double beta);

/// Dimensionless parameters only (lengths, velocities and all scale factors 1).
ScalingParameters dimensionless_scaling(double eta, double beta);

struct LabState {
  double x = 0.0, y = 0.0, z = 0.0;
  double vx = 0.0, vy = 0.0, vz = 0.0;
  double t = 0.0;
};

struct BeamFramePoint {
  std::array<double, 2> x_perp{};
  double zeta = 0.0;
  std::array<double, 2> v_perp{};
  double v_zeta = 0.0;
  double t = 0.0;
};

/// zeta = beta c t - z, v_zeta = beta c - v_z.
BeamFramePoint to_beam_frame(const LabState& s, double beta, double c);
LabState from_beam_frame(const BeamFramePoint& p, double beta, double c);

enum class Quantity {
  length,
  time,
  velocity,
  electric_field,
  magnetic_field,
  charge_density,
  distribution,
  force,
  current_density,  ///< eta-weighted: J = Jbar * eta * J'
};

/// Physical value of one dimensionless unit of `q`.
double scale_of(Quantity q, const ScalingParameters& s);

double nondimensionalize(double value, Quantity q, const ScalingParameters& s);
double redimensionalize(double value, Quantity q, const ScalingParameters& s);
void nondimensionalize(std::span<double> values, Quantity q, const ScalingParameters& s);
void redimensionalize(std::span<double> values, Quantity q, const ScalingParameters& s);

BeamFramePoint nondimensionalize(const BeamFramePoint& p, const ScalingParameters& s);
BeamFramePoint redimensionalize(const BeamFramePoint& p, const ScalingParameters& s);

}  // namespace parax::frames
