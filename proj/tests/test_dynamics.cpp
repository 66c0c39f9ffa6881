#include <doctest.h>

#include <cmath>

#include "qst/dynamics.hpp"
#include "qst/metrics.hpp"

using namespace qst;

namespace {
ProtocolSpec params(int n_sites, double mu0, double j0, int d, double t_max_pi_over_j0) {
  return make_protocol_for_distance({n_sites, 1.0, mu0}, d, j0,
                                    t_max_pi_over_j0 * std::acos(-1.0) / j0);
}
}  // namespace

TEST_CASE("schrodinger evolution basics") {
  SUBCASE("J0 = 0 leaves the sender untouched") {
    ProtocolSpec spec = params(19, 1.0, 0.1, 5, 5.0);
    spec.j0_max = 0.0;
    const Trajectory traj = evolve_schrodinger(spec, nullptr, site_a_state(spec), 21);
    for (double p : traj.pop_a) CHECK(p == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::norm(traj.final_state(0)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("norm drift within budget") {
    const ProtocolSpec spec = params(39, 1.0, 0.1, 5, 19.0);
    const Trajectory traj = evolve_schrodinger(spec, nullptr, site_a_state(spec), 51);
    CHECK(traj.norm_drift <= 1e-9);
  }
  SUBCASE("headline transfer succeeds") {
    const ProtocolSpec spec = params(39, 1.0, 0.1, 5, 19.0);
    const Trajectory traj = evolve_schrodinger(spec, nullptr, site_a_state(spec), 51);
    CHECK(transfer_fidelity_pure(traj) >= 0.995);
  }
  SUBCASE("step halving leaves the fidelity unchanged to 1e-8") {
    const ProtocolSpec spec = params(39, 1.0, 0.1, 5, 10.0);
    const Trajectory coarse = evolve_schrodinger(spec, nullptr, site_a_state(spec), 21);
    const Trajectory fine =
        evolve_schrodinger(spec, nullptr, site_a_state(spec), 21, coarse.meta.step / 2.0);
    CHECK(std::abs(transfer_fidelity_pure(coarse) - transfer_fidelity_pure(fine)) <= 1e-8);
  }
  SUBCASE("unnormalized initial state rejected") {
    const ProtocolSpec spec = params(19, 1.0, 0.1, 5, 5.0);
    Eigen::VectorXcd bad = site_a_state(spec) * 0.5;
    CHECK_THROWS_AS(evolve_schrodinger(spec, nullptr, bad, 11), std::invalid_argument);
  }
  SUBCASE("sample times are uniform from 0 to t_max") {
    const ProtocolSpec spec = params(19, 1.0, 0.1, 5, 5.0);
    const Trajectory traj = evolve_schrodinger(spec, nullptr, site_a_state(spec), 11);
    REQUIRE(traj.times.size() == 11);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(spec.t_max).epsilon(1e-12));
    for (std::size_t i = 1; i < traj.times.size(); ++i) CHECK(traj.times[i] > traj.times[i - 1]);
  }
}

TEST_CASE("effective three-level evolution") {
  SUBCASE("long protocol transfers completely") {
    const ProtocolSpec spec = params(39, 1.0, 0.1, 5, 40.0);
    const BoundState bound = bound_state(spec.chain);
    const Trajectory traj = evolve_effective(spec, bound, {1.0, 0.0, 0.0}, 51);
    CHECK(traj.pop_b.back() > 0.999);
  }
  SUBCASE("short protocol is visibly incomplete") {
    const ProtocolSpec spec = params(39, 1.0, 0.1, 5, 10.0);
    const BoundState bound = bound_state(spec.chain);
    const Trajectory traj = evolve_effective(spec, bound, {1.0, 0.0, 0.0}, 51);
    CHECK(traj.pop_b.back() < 0.995);
  }
  SUBCASE("dark-state leakage onto the bus mode stays small") {
    const ProtocolSpec spec = params(39, 1.0, 0.1, 5, 19.0);
    const BoundState bound = bound_state(spec.chain);
    const Trajectory traj = evolve_effective(spec, bound, {1.0, 0.0, 0.0}, 201);
    double max_bus = 0.0;
    for (double p : traj.pop_defect) max_bus = std::max(max_bus, p);
    CHECK(max_bus <= 0.05); // A_max ~ 0.127 here
  }
  SUBCASE("agrees with the full model in the weak-coupling regime") {
    for (double t_pi : {10.0, 20.0}) {
      const ProtocolSpec spec = params(39, 1.0, 0.1, 5, t_pi);
      const BoundState bound = bound_state(spec.chain);
      const Trajectory eff = evolve_effective(spec, bound, {1.0, 0.0, 0.0}, 21);
      const Trajectory full = evolve_schrodinger(spec, nullptr, site_a_state(spec), 21);
      CHECK(std::abs(eff.pop_b.back() - full.pop_b.back()) <= 0.01);
    }
  }
}

TEST_CASE("two-way mirror symmetry") {
  const ProtocolSpec forward = params(39, 1.0, 0.1, 5, 12.0);
  ProtocolSpec backward = forward;
  backward.swap_pulses = true;
  const Trajectory ab = evolve_schrodinger(forward, nullptr, site_a_state(forward), 41);
  const Trajectory ba = evolve_schrodinger(backward, nullptr, site_b_state(backward), 41);
  CHECK(std::abs(ab.pop_b.back() - ba.pop_a.back()) <= 1e-9);
  for (std::size_t i = 0; i < ab.times.size(); ++i) {
    CHECK(ab.pop_a[i] == doctest::Approx(ba.pop_b[i]).scale(1.0).epsilon(1e-9));
    CHECK(ab.pop_b[i] == doctest::Approx(ba.pop_a[i]).scale(1.0).epsilon(1e-9));
  }
}

TEST_CASE("master equation") {
  SUBCASE("gamma = 0 reproduces the pure-state populations") {
    const ProtocolSpec spec = params(19, 1.0, 0.1, 5, 5.0);
    const Trajectory pure = evolve_schrodinger(spec, nullptr, site_a_state(spec), 21);
    const Trajectory mixed = evolve_master(spec, nullptr, 0.0, site_a_density(spec), 21);
    CHECK(std::abs(transfer_fidelity_mixed(mixed.final_density) -
                   transfer_fidelity_pure(pure)) <= 1e-6);
    CHECK(mixed.norm_drift <= 1e-9);
    CHECK(mixed.hermiticity_drift <= 1e-10);
    CHECK(mixed.min_eigenvalue >= -1e-8);
  }
  SUBCASE("pure dephasing with a switched-off hamiltonian") {
    // hop = J(1 - 1) = 0, mu0 = 0, mu override 0, J0 = 0: H' is exactly zero
    ProtocolSpec spec;
    spec.chain = {3, 1.0, 0.0};
    spec.l = 1;
    spec.j0_max = 0.0;
    spec.t_max = 2.0;
    spec.onsite_mu_override = 0.0;
    DisorderRealization kill;
    kill.delta = 1.0;
    kill.epsilons = {-1.0, -1.0};
    const double gamma = 0.7;
    const int dim = 5;
    Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(dim);
    plus(0) = plus(dim - 1) = 1.0 / std::sqrt(2.0);
    const Eigen::MatrixXcd rho0 = plus * plus.adjoint();
    const Trajectory traj = evolve_master(spec, &kill, gamma, rho0, 21);
    const double decay = std::exp(-gamma * spec.t_max);
    CHECK(traj.final_density(0, dim - 1).real() ==
          doctest::Approx(0.5 * decay).epsilon(1e-9));
    CHECK(traj.final_density(0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(traj.final_density(dim - 1, dim - 1).real() == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("dephasing degrades the transfer monotonically") {
    const ProtocolSpec spec = params(19, 1.0, 0.1, 5, 10.0);
    double prev = 2.0;
    for (double gamma_j0 : {0.0, 0.001, 0.005, 0.01}) {
      const Trajectory traj =
          evolve_master(spec, nullptr, gamma_j0 * spec.j0_max, site_a_density(spec), 11);
      const double f = transfer_fidelity_mixed(traj.final_density);
      CHECK(f <= prev + 1e-12);
      prev = f;
    }
  }
  SUBCASE("invalid initial densities rejected") {
    const ProtocolSpec spec = params(19, 1.0, 0.1, 5, 5.0);
    Eigen::MatrixXcd bad = site_a_density(spec) * 2.0;
    CHECK_THROWS_AS(evolve_master(spec, nullptr, 0.0, bad, 11), std::invalid_argument);
    CHECK_THROWS_AS(evolve_master(spec, nullptr, -0.1, site_a_density(spec), 11),
                    std::invalid_argument);
  }
}
