#include <doctest.h>

#include <cmath>
#include <random>

#include "qst/metrics.hpp"

using namespace qst;

namespace {
// Brute-force Uhlmann fidelity F(rho, sigma) = (tr sqrt(sqrt(sigma) rho sqrt(sigma)))^2
// for 2x2 Hermitian PSD inputs, via eigendecompositions.
Eigen::Matrix2cd matrix_sqrt(const Eigen::Matrix2cd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m);
  Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

double uhlmann(const Eigen::Matrix2cd& rho, const Eigen::Matrix2cd& sigma) {
  const Eigen::Matrix2cd s = matrix_sqrt(sigma);
  const Eigen::Matrix2cd inner = matrix_sqrt(s * rho * s);
  const double tr = inner.trace().real();
  return tr * tr;
}
}  // namespace

TEST_CASE("transfer fidelity") {
  SUBCASE("pure accessor reads the final B population") {
    Trajectory traj;
    traj.pop_b = {0.0, 0.3, 0.98};
    CHECK(transfer_fidelity_pure(traj) == 0.98);
    CHECK(transfer_fidelity(traj) == 0.98);
  }
  SUBCASE("pure accessor rejects mixed trajectories") {
    Trajectory traj;
    traj.mixed = true;
    traj.pop_b = {0.0};
    CHECK_THROWS_AS(transfer_fidelity_pure(traj), std::invalid_argument);
  }
  SUBCASE("mixed accessor reads rho_BB") {
    const int dim = 41;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(dim, dim) / double(dim);
    CHECK(transfer_fidelity_mixed(rho) == doctest::Approx(1.0 / 41.0).epsilon(1e-14));
    rho.setZero();
    rho(dim - 1, dim - 1) = 1.0;
    CHECK(transfer_fidelity_mixed(rho) == 1.0);
  }
}

TEST_CASE("endpoint reduction") {
  SUBCASE("sender state") {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(7);
    psi(0) = 1.0;
    const ReducedEndpointOperator r = reduce_to_endpoints(psi);
    CHECK(r.block(0, 0).real() == 1.0);
    CHECK(r.block(1, 1).real() == 0.0);
    CHECK(std::abs(r.block(0, 1)) == 0.0);
    CHECK(r.vacuum_weight == 0.0);
  }
  SUBCASE("balanced bright state with half the weight in the medium") {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(7);
    psi(0) = 0.5;
    psi(6) = 0.5;
    psi(3) = 1.0 / std::sqrt(2.0);
    const ReducedEndpointOperator r = reduce_to_endpoints(psi);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) CHECK(r.block(a, b).real() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(r.vacuum_weight == doctest::Approx(0.5).epsilon(1e-14));
    CHECK((r.block.trace().real() + r.vacuum_weight) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("block is Hermitian and PSD for random states") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXcd psi(9);
      for (int i = 0; i < 9; ++i) psi(i) = Complex(g(rng), g(rng));
      psi.normalize();
      const ReducedEndpointOperator r = reduce_to_endpoints(psi);
      CHECK((r.block - r.block.adjoint()).cwiseAbs().maxCoeff() <= 1e-15);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(r.block);
      CHECK(es.eigenvalues().minCoeff() >= -1e-15);
      CHECK(r.block.trace().real() + r.vacuum_weight == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("dark-state overlap") {
  SUBCASE("exact on the balanced dark state") {
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(5);
    psi(0) = 1.0 / std::sqrt(2.0);
    psi(4) = -1.0 / std::sqrt(2.0);
    CHECK(dark_state_overlap(psi) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(dark_state_overlap(-psi) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("zero on the orthogonal bright state") {
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(5);
    psi(0) = psi(4) = 1.0 / std::sqrt(2.0);
    CHECK(dark_state_overlap(psi) == 0.0);
  }
  SUBCASE("collapses to the Uhlmann fidelity with the pure reference") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Matrix2cd dark;
    dark << 0.5, -0.5, -0.5, 0.5; // |D0><D0|, D0 = (A - B)/sqrt(2)
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd psi(7);
      for (int i = 0; i < 7; ++i) psi(i) = g(rng);
      psi.normalize();
      const ReducedEndpointOperator r = reduce_to_endpoints(psi.cast<Complex>());
      CHECK(dark_state_overlap(psi) == doctest::Approx(uhlmann(r.block, dark)).epsilon(1e-10));
    }
  }
}

TEST_CASE("operator fidelity of the dark-state reduction") {
  SUBCASE("weak coupling is close to one") {
    const ProtocolSpec spec =
        make_protocol_for_distance({39, 1.0, 1.0}, 5, 0.1, 1.0);
    const double f = operator_fidelity(spec);
    CHECK(f >= 0.99);
    CHECK(f <= 1.0);
  }
  SUBCASE("strong coupling degrades it") {
    const ProtocolSpec weak = make_protocol_for_distance({39, 1.0, 1.0}, 5, 0.05, 1.0);
    const ProtocolSpec strong = make_protocol_for_distance({39, 1.0, 1.0}, 5, 0.4, 1.0);
    CHECK(operator_fidelity(strong) < operator_fidelity(weak));
  }
  SUBCASE("degenerate midpoint manifold rejected") {
    const ProtocolSpec spec = make_protocol_for_distance({39, 1.0, 1.0}, 5, 0.0, 1.0);
    CHECK_THROWS_AS(operator_fidelity(spec), solver_error);
  }
}

TEST_CASE("fidelity as a function of duration") {
  const ProtocolSpec spec = make_protocol_for_distance({19, 1.0, 1.0}, 5, 0.1, 1.0);
  const double pi = std::acos(-1.0);
  SUBCASE("matches a direct evolution") {
    ProtocolSpec direct = spec;
    direct.t_max = 12.0 * pi / 0.1;
    const Trajectory traj = evolve_schrodinger(direct, nullptr, site_a_state(direct), 51);
    CHECK(fidelity_at_duration(spec, direct.t_max) ==
          doctest::Approx(transfer_fidelity_pure(traj)).epsilon(1e-12));
  }
  SUBCASE("long durations transfer, short ones do not") {
    CHECK(fidelity_at_duration(spec, 25.0 * pi / 0.1) >= 0.995);
    CHECK(fidelity_at_duration(spec, 3.0 * pi / 0.1) < 0.9);
  }
}

TEST_CASE("minimal transfer time") {
  const ProtocolSpec spec = make_protocol_for_distance({19, 1.0, 1.0}, 5, 0.1, 1.0);
  const double pi = std::acos(-1.0);
  SUBCASE("finds a stable crossing") {
    const double t_min = minimal_transfer_time(spec, 0.005, 2.0 * pi / 0.1, 50.0 * pi / 0.1);
    CHECK(t_min > 2.0 * pi / 0.1);
    CHECK(t_min < 50.0 * pi / 0.1);
    CHECK(fidelity_at_duration(spec, t_min) >= 0.995);
    // stability just above the crossing (the search guarantees two widths)
    CHECK(fidelity_at_duration(spec, t_min + 0.25 * pi / 0.1) >= 0.995);
  }
  SUBCASE("invalid arguments rejected") {
    CHECK_THROWS_AS(minimal_transfer_time(spec, 0.0, 1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(minimal_transfer_time(spec, 1.5, 1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(minimal_transfer_time(spec, 0.005, 5.0, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(minimal_transfer_time(spec, 0.005, -1.0, 4.0), std::invalid_argument);
  }
  SUBCASE("unreachable threshold reported as a solver failure") {
    CHECK_THROWS_AS(minimal_transfer_time(spec, 0.005, 1.0 * pi / 0.1, 3.0 * pi / 0.1),
                    solver_error);
  }
}
