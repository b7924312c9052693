#include "parax/frames.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace parax::frames {

void PhysicalConstants::validate() const {
  if (!(c > 0.0)) throw std::invalid_argument("speed of light must be positive");
  if (!(eps0 > 0.0) || !(mu0 > 0.0)) throw std::invalid_argument("eps0 and mu0 must be positive");
  if (std::abs(eps0 * mu0 * c * c - 1.0) > 1e-12)
    throw std::invalid_argument("constants violate eps0*mu0*c^2 = 1");
  if (!(m > 0.0)) throw std::invalid_argument("particle mass must be positive");
  if (q == 0.0 || !std::isfinite(q)) throw std::invalid_argument("particle charge must be nonzero");
}

PhysicalConstants si_electron() {
  PhysicalConstants pc;
  // mu0 derived so the vacuum identity holds to rounding.
  pc.mu0 = 1.0 / (pc.eps0 * pc.c * pc.c);
  return pc;
}

PhysicalConstants natural_units() { return {1.0, 1.0, 1.0, 1.0, 1.0}; }

ScalingParameters compute_scaling(double l, double vbar, const PhysicalConstants& pc,
                                  double beta) {
  pc.validate();
  if (!(l > 0.0)) throw std::invalid_argument("characteristic length l must be positive");
  if (!(vbar > 0.0)) throw std::invalid_argument("characteristic velocity vbar must be positive");
  if (!(vbar < pc.c)) throw std::invalid_argument("characteristic velocity vbar must be below c");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");

  ScalingParameters s;
  s.beta = beta;
  s.l = l;
  s.vbar = vbar;
  s.eta = vbar / pc.c;
  s.T = l / vbar;
  s.Ebar = pc.m * vbar * vbar / (pc.q * l);
  s.Bbar = s.Ebar / pc.c;
  s.rhobar = pc.eps0 * s.Ebar / l;
  s.fbar = pc.eps0 * pc.m / (pc.q * pc.q * l * l * vbar);
  s.Jbar = s.rhobar * pc.c;
  s.Fbar = pc.m * vbar * vbar / l;
  s.weak_separation = s.eta > eta_warning_threshold;
  return s;
}

ScalingParameters dimensionless_scaling(double eta, double beta) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  ScalingParameters s;
  s.beta = beta;
  s.eta = eta;
  s.weak_separation = eta > eta_warning_threshold;
  return s;
}

BeamFramePoint to_beam_frame(const LabState& s, double beta, double c) {
  BeamFramePoint p;
  p.x_perp = {s.x, s.y};
  p.v_perp = {s.vx, s.vy};
  p.zeta = beta * c * s.t - s.z;
  p.v_zeta = beta * c - s.vz;
  p.t = s.t;
  return p;
}

LabState from_beam_frame(const BeamFramePoint& p, double beta, double c) {
  LabState s;
  s.x = p.x_perp[0];
  s.y = p.x_perp[1];
  s.vx = p.v_perp[0];
  s.vy = p.v_perp[1];
  s.z = beta * c * p.t - p.zeta;
  s.vz = beta * c - p.v_zeta;
  s.t = p.t;
  return s;
}

double scale_of(Quantity q, const ScalingParameters& s) {
  switch (q) {
    case Quantity::length: return s.l;
    case Quantity::time: return s.T;
    case Quantity::velocity: return s.vbar;
    case Quantity::electric_field: return s.Ebar;
    case Quantity::magnetic_field: return s.Bbar;
    case Quantity::charge_density: return s.rhobar;
    case Quantity::distribution: return s.fbar;
    case Quantity::force: return s.Fbar;
    case Quantity::current_density: return s.Jbar * s.eta;
  }
  throw std::invalid_argument("unknown quantity");
}

double nondimensionalize(double value, Quantity q, const ScalingParameters& s) {
  return value / scale_of(q, s);
}

double redimensionalize(double value, Quantity q, const ScalingParameters& s) {
  return value * scale_of(q, s);
}

void nondimensionalize(std::span<double> values, Quantity q, const ScalingParameters& s) {
  const double f = scale_of(q, s);
  for (double& v : values) v /= f;
}

void redimensionalize(std::span<double> values, Quantity q, const ScalingParameters& s) {
  const double f = scale_of(q, s);
  for (double& v : values) v *= f;
}

BeamFramePoint nondimensionalize(const BeamFramePoint& p, const ScalingParameters& s) {
  BeamFramePoint r;
  for (int d = 0; d < 2; ++d) {
    r.x_perp[d] = p.x_perp[d] / s.l;
    r.v_perp[d] = p.v_perp[d] / s.vbar;
  }
  r.zeta = p.zeta / s.l;
  r.v_zeta = p.v_zeta / s.vbar;
  r.t = p.t / s.T;
  return r;
}

BeamFramePoint redimensionalize(const BeamFramePoint& p, const ScalingParameters& s) {
  BeamFramePoint r;
  for (int d = 0; d < 2; ++d) {
    r.x_perp[d] = p.x_perp[d] * s.l;
    r.v_perp[d] = p.v_perp[d] * s.vbar;
  }
  r.zeta = p.zeta * s.l;
  r.v_zeta = p.v_zeta * s.vbar;
  r.t = p.t * s.T;
  return r;
}

}  // namespace parax::frames
