#pragma once

// Pulse schedule, endpoint dots, quenched hopping disorder, and assembly
// of the full (N+2)-dimensional time-dependent Hamiltonian in the basis
// [A, 1..N, B].

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qst/lattice.hpp"

namespace qst {

struct PulsePair {
  double j_a = 0.0; // sender-side coupling J_A(t)
  double j_b = 0.0; // receiver-side coupling J_B(t)
};

/// Resonance condition: endpoint on-site energy matching |lambda0|,
/// which makes |A>, |lambda0>, |B> degenerate at J0 = 0.
inline double resonant_onsite_energy(const ChainSpec& chain) {
  chain.validate();
  const double xi = chain.xi();
  return 2.0 * chain.hopping * std::sqrt(xi * xi + 1.0);
}

/// Full experiment description: chain + endpoint dots + pulse parameters.
/// A couples to site N0-l, B to N0+l; transfer distance d = 2l+3.
struct ProtocolSpec {
  ChainSpec chain;
  int l = 1;            // attachment offset, 1 <= l <= N0-1
  double j0_max = 0.1;  // peak tunneling J0 (0 = endpoints decoupled)
  double t_max = 0.0;   // protocol duration, units 1/J
  bool swap_pulses = false; // exchange J_A and J_B roles (B -> A transfer)
  std::optional<double> onsite_mu_override; // detuned-mu studies only

  int distance() const { return 2 * l + 3; }
  int left_attach() const { return chain.defect_site() - l; }  // medium site, 1-based
  int right_attach() const { return chain.defect_site() + l; }
  double onsite_mu() const {
    return onsite_mu_override ? *onsite_mu_override : resonant_onsite_energy(chain);
  }

  void validate() const {
    chain.validate();
    if (l < 1 || l > chain.defect_site() - 1)
      throw std::invalid_argument("ProtocolSpec: l must satisfy 1 <= l <= N0-1");
    if (j0_max < 0.0) throw std::invalid_argument("ProtocolSpec: j0_max must be >= 0");
    if (t_max <= 0.0) throw std::invalid_argument("ProtocolSpec: t_max must be > 0");
  }
};

inline ProtocolSpec make_protocol_for_distance(ChainSpec chain, int distance, double j0,
                                               double t_max) {
  if (distance < 5 || distance % 2 == 0)
    throw std::invalid_argument("distance must be odd and >= 5 (d = 2l+3)");
  ProtocolSpec p;
  p.chain = chain;
  p.l = (distance - 3) / 2;
  p.j0_max = j0;
  p.t_max = t_max;
  return p;
}

/// Counter-intuitive sinusoidal pulses: J_B leads, J_A follows.
inline PulsePair pulse_amplitudes(const ProtocolSpec& spec, double t) {
  if (t < 0.0 || t > spec.t_max)
    throw std::domain_error("pulse_amplitudes: t outside [0, t_max]");
  const double pi = std::acos(-1.0);
  const double s = std::sin(pi * t / (2.0 * spec.t_max));
  const double c = std::cos(pi * t / (2.0 * spec.t_max));
  PulsePair p{spec.j0_max * s * s, spec.j0_max * c * c};
  if (spec.swap_pulses) std::swap(p.j_a, p.j_b);
  return p;
}

/// theta(t) = arctan(J_A/J_B), running 0 -> pi/2; the J_B = 0 endpoint
/// is the arctan limit.
inline double mixing_angle(const ProtocolSpec& spec, double t) {
  const PulsePair p = pulse_amplitudes(spec, t);
  return std::atan2(p.j_a, p.j_b);
}

/// Quenched relative hopping offsets, J -> J(1 + delta*eps_j).
struct DisorderRealization {
  double delta = 0.0;
  std::vector<double> epsilons; // N-1 draws from uniform[-1,1]
  std::uint64_t seed = 0;
};

/// Deterministic draws: mt19937_64 raw output mapped to [-1,1] via the
/// top-53-bit construction, identical on every platform for a given seed.
inline DisorderRealization sample_disorder(double delta, const ChainSpec& chain,
                                           std::uint64_t seed) {
  chain.validate();
  if (delta < 0.0) throw std::domain_error("sample_disorder: delta must be >= 0");
  DisorderRealization d;
  d.delta = delta;
  d.seed = seed;
  std::mt19937_64 rng(seed);
  d.epsilons.resize(chain.n_sites - 1);
  for (double& e : d.epsilons) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0,1)
    e = 2.0 * u - 1.0;
  }
  return d;
}

/// Total Hamiltonian at time t. Real symmetric (hence Hermitian); the
/// complex structure lives entirely in the state.
inline Eigen::MatrixXd build_total_hamiltonian(const ProtocolSpec& spec, double t,
                                               const DisorderRealization* disorder = nullptr) {
  spec.validate();
  const int n = spec.chain.n_sites;
  const int dim = n + 2;
  const int a = 0, b = dim - 1;      // endpoint indices
  const auto site = [](int j) { return j; }; // medium site j (1-based) -> index j

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = 1; j < n; ++j) {
    double hop = spec.chain.hopping;
    if (disorder) {
      if (static_cast<int>(disorder->epsilons.size()) != n - 1)
        throw std::invalid_argument("build_total_hamiltonian: disorder size mismatch");
      hop *= 1.0 + disorder->delta * disorder->epsilons[j - 1];
    }
    h(site(j), site(j + 1)) = -hop;
    h(site(j + 1), site(j)) = -hop;
  }
  h(site(spec.chain.defect_site()), site(spec.chain.defect_site())) = -spec.chain.defect_energy;

  const double mu = spec.onsite_mu();
  h(a, a) = -mu;
  h(b, b) = -mu;

  const PulsePair p = pulse_amplitudes(spec, t);
  h(a, site(spec.left_attach())) = -p.j_a;
  h(site(spec.left_attach()), a) = -p.j_a;
  h(b, site(spec.right_attach())) = -p.j_b;
  h(site(spec.right_attach()), b) = -p.j_b;
  return h;
}

}  // namespace qst
