#pragma once

// Fixed-step RK4 integration of the time-dependent Schroedinger equation
// (full (N+2)-dimensional and effective 3-level) and of the pure-dephasing
// master equation. The Hamiltonian is applied through its banded structure
// rather than as a dense matrix.

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qst/effective.hpp"
#include "qst/protocol.hpp"

namespace qst {

using Complex = std::complex<double>;

struct TrajectoryMeta {
  ProtocolSpec spec;
  double gamma = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  double step = 0.0; // integrator dt actually used
};

/// Sampled populations plus the final state of one protocol run.
/// pop_defect is the weight on the bound mode |lambda0>; pop_medium is the
/// total weight on the chain (which contains pop_defect).
struct Trajectory {
  std::vector<double> times;
  std::vector<double> pop_a, pop_b, pop_defect, pop_medium;
  Eigen::VectorXcd final_state;   // pure runs
  Eigen::MatrixXcd final_density; // mixed runs
  bool mixed = false;
  double norm_drift = 0.0;  // max ||psi|-1| (pure) or max |tr rho - 1| (mixed)
  double hermiticity_drift = 0.0;
  double min_eigenvalue = 0.0; // most negative rho eigenvalue seen at samples
  TrajectoryMeta meta;
};

inline double default_time_step(double t_max, double hopping = 1.0) {
  return std::min(0.02 / hopping, t_max / 20000.0);
}

namespace detail {

// Banded apply of the total Hamiltonian in the basis [A, 1..N, B]:
// tridiagonal medium block, defect and endpoint diagonals, and the two
// pulse couplings. hop[j-1] couples medium sites j and j+1.
// The integrator works with H + mu*I: a uniform diagonal shift is a pure
// global phase (and drops out of the commutator entirely), but it moves
// the populated ground manifold from energy -mu to ~0, which keeps the
// fixed-step scheme unitary to ~1e-12 instead of ~1e-6 over a protocol.
struct TotalHamiltonian {
  int n = 0;
  double mu = 0.0, mu0 = 0.0;
  double shift = 0.0;
  std::vector<double> hop;
  int defect = 0, left = 0, right = 0; // full-basis indices
  double j_a = 0.0, j_b = 0.0;         // set per evaluation time

  explicit TotalHamiltonian(const ProtocolSpec& spec,
                            const DisorderRealization* disorder = nullptr) {
    spec.validate();
    n = spec.chain.n_sites;
    mu = spec.onsite_mu();
    shift = mu;
    mu0 = spec.chain.defect_energy;
    defect = spec.chain.defect_site();
    left = spec.left_attach();
    right = spec.right_attach();
    hop.resize(n - 1, spec.chain.hopping);
    if (disorder) {
      if (static_cast<int>(disorder->epsilons.size()) != n - 1)
        throw std::invalid_argument("TotalHamiltonian: disorder size mismatch");
      for (int j = 0; j < n - 1; ++j)
        hop[j] *= 1.0 + disorder->delta * disorder->epsilons[j];
    }
  }

  void set_time(const ProtocolSpec& spec, double t) {
    const PulsePair p = pulse_amplitudes(spec, t);
    j_a = p.j_a;
    j_b = p.j_b;
  }

  int dim() const { return n + 2; }

  // y = (H + shift*I) x
  void apply(const Complex* x, Complex* y) const {
    const int b = n + 1;
    y[0] = (shift - mu) * x[0] - j_a * x[left];
    for (int j = 1; j <= n; ++j) {
      Complex acc = shift * x[j];
      if (j >= 2) acc -= hop[j - 2] * x[j - 1];
      if (j <= n - 1) acc -= hop[j - 1] * x[j + 1];
      if (j == defect) acc -= mu0 * x[j];
      y[j] = acc;
    }
    y[left] -= j_a * x[0];
    y[right] -= j_b * x[b];
    y[b] = (shift - mu) * x[b] - j_b * x[right];
  }

  void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    apply(x.data(), y.data());
  }

  // C = H * rho, column by column.
  void apply_left(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
    for (int c = 0; c < rho.cols(); ++c) apply(rho.col(c).data(), out.col(c).data());
  }
};

// dpsi/dt = -i H(t) psi
inline void schrodinger_rhs(const TotalHamiltonian& h, const Eigen::VectorXcd& psi,
                            Eigen::VectorXcd& out) {
  h.apply(psi, out);
  out *= Complex(0.0, -1.0);
}

// drho/dt = -i[H, rho] - Gamma (rho - diag rho).
// For Hermitian rho and real-symmetric H, rho H = (H rho)^dagger, so a
// single banded apply suffices; RK4 stage inputs stay Hermitian because
// the right-hand side of a Hermitian argument is Hermitian.
inline void master_rhs(const TotalHamiltonian& h, double gamma, const Eigen::MatrixXcd& rho,
                       Eigen::MatrixXcd& scratch, Eigen::MatrixXcd& out) {
  h.apply_left(rho, scratch);
  out = Complex(0.0, -1.0) * (scratch - scratch.adjoint());
  if (gamma > 0.0) {
    out -= gamma * rho;
    out.diagonal() += gamma * rho.diagonal();
  }
}

inline void check_normalized(const Eigen::VectorXcd& v, const char* who) {
  if (std::abs(v.norm() - 1.0) > 1e-8)
    throw std::invalid_argument(std::string(who) + ": initial state not normalized");
}

}  // namespace detail

/// |A> in the full basis.
inline Eigen::VectorXcd site_a_state(const ProtocolSpec& spec) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(spec.chain.n_sites + 2);
  v(0) = 1.0;
  return v;
}

/// |B> in the full basis.
inline Eigen::VectorXcd site_b_state(const ProtocolSpec& spec) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(spec.chain.n_sites + 2);
  v(spec.chain.n_sites + 1) = 1.0;
  return v;
}

/// Unitary evolution under the full time-dependent Hamiltonian.
/// `dt_override`, when positive, replaces the default step (used by the
/// step-halving convergence checks).
inline Trajectory evolve_schrodinger(const ProtocolSpec& spec,
                                     const DisorderRealization* disorder,
                                     const Eigen::VectorXcd& initial, int n_samples = 501,
                                     double dt_override = 0.0) {
  spec.validate();
  if (n_samples < 2) throw std::invalid_argument("evolve_schrodinger: n_samples >= 2");
  detail::check_normalized(initial, "evolve_schrodinger");
  const int dim = spec.chain.n_sites + 2;
  if (initial.size() != dim)
    throw std::invalid_argument("evolve_schrodinger: initial state has wrong dimension");

  detail::TotalHamiltonian h(spec, disorder);
  // unit-norm bound profile for the defect-mode population
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(dim);
  if (spec.chain.defect_energy > 0.0) {
    const BoundState b = bound_state(spec.chain);
    for (int j = 1; j <= spec.chain.n_sites; ++j) u0(j) = b.profile[j - 1];
    u0.normalize();
  }

  const double interval = spec.t_max / (n_samples - 1);
  const double dt_target = dt_override > 0.0 ? dt_override : default_time_step(spec.t_max, spec.chain.hopping);
  const int steps_per_interval = std::max(1, static_cast<int>(std::ceil(interval / dt_target)));
  const double dt = interval / steps_per_interval;

  Trajectory traj;
  traj.meta.spec = spec;
  traj.meta.delta = disorder ? disorder->delta : 0.0;
  traj.meta.seed = disorder ? disorder->seed : 0;
  traj.meta.step = dt;

  Eigen::VectorXcd psi = initial;
  Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

  const auto sample = [&](double t) {
    traj.times.push_back(t);
    traj.pop_a.push_back(std::norm(psi(0)));
    traj.pop_b.push_back(std::norm(psi(dim - 1)));
    double med = 0.0;
    for (int j = 1; j <= spec.chain.n_sites; ++j) med += std::norm(psi(j));
    traj.pop_medium.push_back(med);
    traj.pop_defect.push_back(std::norm(u0.cast<Complex>().dot(psi)));
    traj.norm_drift = std::max(traj.norm_drift, std::abs(psi.norm() - 1.0));
  };

  sample(0.0);
  for (int i = 0; i < n_samples - 1; ++i) {
    const double t0 = i * interval;
    for (int s = 0; s < steps_per_interval; ++s) {
      const double t = t0 + s * dt;
      h.set_time(spec, t);
      detail::schrodinger_rhs(h, psi, k1);
      h.set_time(spec, t + 0.5 * dt);
      tmp = psi + 0.5 * dt * k1;
      detail::schrodinger_rhs(h, tmp, k2);
      tmp = psi + 0.5 * dt * k2;
      detail::schrodinger_rhs(h, tmp, k3);
      h.set_time(spec, std::min(t + dt, spec.t_max));
      tmp = psi + dt * k3;
      detail::schrodinger_rhs(h, tmp, k4);
      psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    sample((i + 1) * interval);
  }
  traj.final_state = psi;
  return traj;
}

/// Effective 3-level evolution in the {A, lambda0, B} basis. The common
/// -mu diagonal is removed as a global phase; populations are unaffected.
inline Trajectory evolve_effective(const ProtocolSpec& spec, const BoundState& bound,
                                   const Eigen::Vector3cd& initial, int n_samples = 501,
                                   double dt_override = 0.0) {
  spec.validate();
  if (n_samples < 2) throw std::invalid_argument("evolve_effective: n_samples >= 2");
  Eigen::VectorXcd init = initial;
  detail::check_normalized(init, "evolve_effective");

  const double u = bound.amplitude_at(spec.left_attach());
  const double interval = spec.t_max / (n_samples - 1);
  const double dt_target = dt_override > 0.0 ? dt_override : default_time_step(spec.t_max, spec.chain.hopping);
  const int steps_per_interval = std::max(1, static_cast<int>(std::ceil(interval / dt_target)));
  const double dt = interval / steps_per_interval;

  Trajectory traj;
  traj.meta.spec = spec;
  traj.meta.step = dt;

  const auto rhs = [&](double t, const Eigen::Vector3cd& c) -> Eigen::Vector3cd {
    const PulsePair p = pulse_amplitudes(spec, std::min(t, spec.t_max));
    const double oa = p.j_a * u, ob = p.j_b * u;
    const Complex i(0.0, 1.0);
    return {i * oa * c(1), i * (oa * c(0) + ob * c(2)), i * ob * c(1)};
  };

  Eigen::Vector3cd c = initial;
  const auto sample = [&](double t) {
    traj.times.push_back(t);
    traj.pop_a.push_back(std::norm(c(0)));
    traj.pop_defect.push_back(std::norm(c(1)));
    traj.pop_medium.push_back(std::norm(c(1)));
    traj.pop_b.push_back(std::norm(c(2)));
    traj.norm_drift = std::max(traj.norm_drift, std::abs(c.norm() - 1.0));
  };

  sample(0.0);
  for (int i = 0; i < n_samples - 1; ++i) {
    const double t0 = i * interval;
    for (int s = 0; s < steps_per_interval; ++s) {
      const double t = t0 + s * dt;
      const Eigen::Vector3cd k1 = rhs(t, c);
      const Eigen::Vector3cd k2 = rhs(t + 0.5 * dt, c + 0.5 * dt * k1);
      const Eigen::Vector3cd k3 = rhs(t + 0.5 * dt, c + 0.5 * dt * k2);
      const Eigen::Vector3cd k4 = rhs(t + dt, c + dt * k3);
      c += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    sample((i + 1) * interval);
  }
  traj.final_state = c;
  return traj;
}

/// |A><A| in the full basis.
inline Eigen::MatrixXcd site_a_density(const ProtocolSpec& spec) {
  const int dim = spec.chain.n_sites + 2;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  rho(0, 0) = 1.0;
  return rho;
}

/// Pure-dephasing master equation in the site basis. Positivity is
/// monitored at sample points; violation beyond -1e-6 aborts.
inline Trajectory evolve_master(const ProtocolSpec& spec, const DisorderRealization* disorder,
                                double gamma, const Eigen::MatrixXcd& initial,
                                int n_samples = 501, double dt_override = 0.0) {
  spec.validate();
  if (gamma < 0.0) throw std::invalid_argument("evolve_master: gamma must be >= 0");
  if (n_samples < 2) throw std::invalid_argument("evolve_master: n_samples >= 2");
  const int dim = spec.chain.n_sites + 2;
  if (initial.rows() != dim || initial.cols() != dim)
    throw std::invalid_argument("evolve_master: initial density has wrong dimension");
  if ((initial - initial.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("evolve_master: initial density not Hermitian");
  if (std::abs(initial.trace().real() - 1.0) > 1e-9)
    throw std::invalid_argument("evolve_master: initial density trace != 1");

  detail::TotalHamiltonian h(spec, disorder);
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(dim);
  if (spec.chain.defect_energy > 0.0) {
    const BoundState b = bound_state(spec.chain);
    for (int j = 1; j <= spec.chain.n_sites; ++j) u0(j) = b.profile[j - 1];
    u0.normalize();
  }

  const double interval = spec.t_max / (n_samples - 1);
  const double dt_target = dt_override > 0.0 ? dt_override : default_time_step(spec.t_max, spec.chain.hopping);
  const int steps_per_interval = std::max(1, static_cast<int>(std::ceil(interval / dt_target)));
  const double dt = interval / steps_per_interval;

  Trajectory traj;
  traj.mixed = true;
  traj.meta.spec = spec;
  traj.meta.gamma = gamma;
  traj.meta.delta = disorder ? disorder->delta : 0.0;
  traj.meta.seed = disorder ? disorder->seed : 0;
  traj.meta.step = dt;
  traj.min_eigenvalue = 0.0;

  Eigen::MatrixXcd rho = initial;
  Eigen::MatrixXcd k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim);
  Eigen::MatrixXcd tmp(dim, dim), scratch(dim, dim);

  const auto sample = [&](double t) {
    traj.times.push_back(t);
    traj.pop_a.push_back(rho(0, 0).real());
    traj.pop_b.push_back(rho(dim - 1, dim - 1).real());
    double med = 0.0;
    for (int j = 1; j <= spec.chain.n_sites; ++j) med += rho(j, j).real();
    traj.pop_medium.push_back(med);
    traj.pop_defect.push_back((u0.cast<Complex>().adjoint() * rho * u0.cast<Complex>())(0).real());
    traj.norm_drift = std::max(traj.norm_drift, std::abs(rho.trace().real() - 1.0));
    traj.hermiticity_drift =
        std::max(traj.hermiticity_drift, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    traj.min_eigenvalue = std::min(traj.min_eigenvalue, lmin);
    if (lmin < -1e-6)
      throw solver_error("evolve_master: positivity violated beyond tolerance at t=" +
                         std::to_string(t));
  };

  sample(0.0);
  for (int i = 0; i < n_samples - 1; ++i) {
    const double t0 = i * interval;
    for (int s = 0; s < steps_per_interval; ++s) {
      const double t = t0 + s * dt;
      h.set_time(spec, t);
      detail::master_rhs(h, gamma, rho, scratch, k1);
      h.set_time(spec, t + 0.5 * dt);
      tmp = rho + 0.5 * dt * k1;
      detail::master_rhs(h, gamma, tmp, scratch, k2);
      tmp = rho + 0.5 * dt * k2;
      detail::master_rhs(h, gamma, tmp, scratch, k3);
      h.set_time(spec, std::min(t + dt, spec.t_max));
      tmp = rho + dt * k3;
      detail::master_rhs(h, gamma, tmp, scratch, k4);
      rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    sample((i + 1) * interval);
  }
  traj.final_density = rho;
  return traj;
}

}  // namespace qst
