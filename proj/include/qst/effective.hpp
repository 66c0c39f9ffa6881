#pragma once

// First-order perturbative three-level model on {A, lambda0, B}, its
// adiabatic eigenbasis, and the adiabaticity diagnostics.

#include <cmath>

#include <Eigen/Dense>

#include "qst/protocol.hpp"

namespace qst {

/// 3x3 effective model: diagonal -mu, couplings -Omega_A, -Omega_B,
/// no direct A<->B term. Omega_alpha(t) = J_alpha(t) * u0(N0-l).
struct EffectiveHamiltonian {
  double omega_a = 0.0;
  double omega_b = 0.0;
  double mu = 0.0;

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d m;
    m << -mu, -omega_a, 0.0,
         -omega_a, -mu, -omega_b,
         0.0, -omega_b, -mu;
    return m;
  }
};

inline EffectiveHamiltonian effective_hamiltonian(const ProtocolSpec& spec,
                                                  const BoundState& bound, double t) {
  const PulsePair p = pulse_amplitudes(spec, t);
  const double u = bound.amplitude_at(spec.left_attach());
  return {p.j_a * u, p.j_b * u, spec.onsite_mu()};
}

/// Instantaneous eigenbasis in {A, lambda0, B} ordering.
/// D0 is the dark state: no weight on |lambda0>.
struct AdiabaticTriple {
  Eigen::Vector3d d_minus, d_zero, d_plus;
  double e_minus = 0.0, e_zero = 0.0, e_plus = 0.0;
};

inline AdiabaticTriple adiabatic_triple(const EffectiveHamiltonian& h) {
  if (h.omega_a == 0.0 && h.omega_b == 0.0)
    throw std::domain_error("adiabatic_triple: fully degenerate at Omega_A = Omega_B = 0");
  const double theta = std::atan2(h.omega_a, h.omega_b);
  const double s = std::sin(theta), c = std::cos(theta);
  const double split = std::sqrt(h.omega_a * h.omega_a + h.omega_b * h.omega_b);
  const double r = 1.0 / std::sqrt(2.0);
  AdiabaticTriple t;
  t.d_minus << r * s, -r, r * c;
  t.d_zero << c, 0.0, -s;
  t.d_plus << r * s, r, r * c;
  t.e_minus = -h.mu + split;
  t.e_zero = -h.mu;
  t.e_plus = -h.mu - split;
  return t;
}

/// Adiabaticity parameter
///   A(t) = |dOmega_A*Omega_B - dOmega_B*Omega_A| / (sqrt(2) (Omega_A^2+Omega_B^2)^{3/2})
/// in closed form for the sin^2/cos^2 pulses, finite on all of [0, t_max]:
/// with s = pi t / (2 t_max) the quotient simplifies to
///   A = (pi / (2 t_max)) sin(2s) / (sqrt(2) J0 u0 (1 - sin^2(2s)/2)^{3/2}).
inline double adiabaticity(const ProtocolSpec& spec, const BoundState& bound, double t) {
  spec.validate();
  if (t < 0.0 || t > spec.t_max)
    throw std::domain_error("adiabaticity: t outside [0, t_max]");
  const double pi = std::acos(-1.0);
  const double c0 = spec.j0_max * bound.amplitude_at(spec.left_attach());
  const double s2 = std::sin(pi * t / spec.t_max); // sin(2s)
  const double denom = std::pow(1.0 - 0.5 * s2 * s2, 1.5);
  return (pi / (2.0 * spec.t_max)) * s2 / (std::sqrt(2.0) * c0 * denom);
}

/// Closed-form peak of A(t), attained at t = t_max/2:
///   A_max = pi / (J0 u0(N0-l) t_max).
/// Adiabatic evolution needs A_max << 1, i.e. t_max >> pi/(J0 u0(N0-l)).
inline double max_adiabaticity(const ProtocolSpec& spec, const BoundState& bound) {
  spec.validate();
  const double pi = std::acos(-1.0);
  return pi / (spec.j0_max * bound.amplitude_at(spec.left_attach()) * spec.t_max);
}

}  // namespace qst
