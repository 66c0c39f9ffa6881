#pragma once

// Defected tight-binding chain: Hamiltonian construction and its spectrum,
// solved both in closed form (wavevector quantization, bound state, gap)
// and by dense diagonalization. Each route checks the other.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qst/errors.hpp"

namespace qst {

/// Static description of the medium chain: N sites, uniform hopping J,
/// a single diagonal defect -mu0 at the central site N0 = (N+1)/2.
struct ChainSpec {
  int n_sites = 39;           // N, odd, >= 3
  double hopping = 1.0;       // J > 0 (internal unit of energy)
  double defect_energy = 1.0; // mu0 >= 0

  int defect_site() const { return (n_sites + 1) / 2; }        // N0, 1-based
  double xi() const { return defect_energy / (2.0 * hopping); }

  void validate() const {
    if (n_sites < 3 || n_sites % 2 == 0)
      throw std::invalid_argument("ChainSpec: n_sites must be odd and >= 3");
    if (hopping <= 0.0)
      throw std::invalid_argument("ChainSpec: hopping must be positive");
    if (defect_energy < 0.0)
      throw std::invalid_argument("ChainSpec: defect_energy must be >= 0");
  }
};

/// Localized ground state of the defected chain.
/// profile is the thermodynamic-limit expression, so its norm is <= 1
/// for finite N.
struct BoundState {
  double q = 0.0;           // inverse localization length
  double energy = 0.0;      // -2J cosh q
  double norm_lambda = 0.0; // Lambda = cosh q / sinh q
  std::vector<double> profile; // u0(j), j = 1..N

  double amplitude_at(int site) const { return profile.at(site - 1); }
};

enum class Parity { Odd, Even };

struct WavevectorRoot {
  double k = 0.0;
  Parity parity = Parity::Odd;
  double energy = 0.0; // -2J cos k
};

struct WavevectorSet {
  std::vector<WavevectorRoot> roots; // N-1 real roots, ascending in k
  double bound_q = 0.0;              // the single imaginary branch
};

struct MediumSpectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors; // columns, sign-fixed
};

inline Eigen::MatrixXd build_medium_hamiltonian(const ChainSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) {
    h(j, j + 1) = -spec.hopping;
    h(j + 1, j) = -spec.hopping;
  }
  h(spec.defect_site() - 1, spec.defect_site() - 1) = -spec.defect_energy;
  return h;
}

inline BoundState bound_state(const ChainSpec& spec) {
  spec.validate();
  if (spec.defect_energy <= 0.0)
    throw std::domain_error("bound_state: no bound state for mu0 = 0");
  const double xi = spec.xi();
  BoundState b;
  b.q = std::log(xi + std::sqrt(xi * xi + 1.0));
  b.energy = -2.0 * spec.hopping * std::sqrt(xi * xi + 1.0);
  b.norm_lambda = std::cosh(b.q) / std::sinh(b.q);
  const int n0 = spec.defect_site();
  b.profile.resize(spec.n_sites);
  for (int j = 1; j <= spec.n_sites; ++j)
    b.profile[j - 1] = std::exp(-b.q * std::abs(n0 - j)) / std::sqrt(b.norm_lambda);
  return b;
}

/// Thermodynamic-limit gap between the bound state and the band edge.
inline double energy_gap(const ChainSpec& spec) {
  spec.validate();
  const double xi = spec.xi();
  return 2.0 * spec.hopping * (std::sqrt(xi * xi + 1.0) - 1.0);
}

namespace detail {

// Even-parity quantization function, cot(k N0) sin k - xi.
inline double even_parity_residual(double k, int n0, double xi) {
  return std::cos(k * n0) / std::sin(k * n0) * std::sin(k) - xi;
}

inline double bisect_even_root(double lo, double hi, int n0, double xi) {
  double flo = even_parity_residual(lo, n0, xi);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = even_parity_residual(mid, n0, xi);
    if ((flo > 0.0) == (fmid > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// All N-1 real wavevectors in (0, pi) plus the imaginary branch q.
/// Odd-parity (antisymmetric) roots are exact: k = m*pi/N0. Even-parity
/// roots are bracketed between consecutive poles of cot(k N0) and bisected.
inline WavevectorSet solve_wavevectors(const ChainSpec& spec) {
  spec.validate();
  if (spec.defect_energy <= 0.0)
    throw std::domain_error("solve_wavevectors: requires mu0 > 0");
  const int n0 = spec.defect_site();
  const double xi = spec.xi();
  const double pi = std::acos(-1.0);

  WavevectorSet set;
  set.bound_q = std::log(xi + std::sqrt(xi * xi + 1.0));

  // Antisymmetric states have a node at the defect and are unaffected
  // by mu0: sin(k N0) = 0.
  for (int m = 1; m < n0; ++m) {
    WavevectorRoot r;
    r.k = m * pi / n0;
    r.parity = Parity::Odd;
    r.energy = -2.0 * spec.hopping * std::cos(r.k);
    set.roots.push_back(r);
  }

  // Symmetric states: one root per pole interval (m*pi/N0, (m+1)*pi/N0).
  // The m = 0 interval has lost its real root to the bound state whenever
  // xi exceeds the k->0 limit 1/N0.
  const double eps = 1e-9;
  for (int m = 0; m < n0; ++m) {
    const double lo = m * pi / n0 + eps;
    const double hi = (m + 1) * pi / n0 - eps;
    const double flo = detail::even_parity_residual(lo, n0, xi);
    const double fhi = detail::even_parity_residual(hi, n0, xi);
    if ((flo > 0.0) == (fhi > 0.0)) continue;
    WavevectorRoot r;
    r.k = detail::bisect_even_root(lo, hi, n0, xi);
    r.parity = Parity::Even;
    r.energy = -2.0 * spec.hopping * std::cos(r.k);
    set.roots.push_back(r);
  }

  std::sort(set.roots.begin(), set.roots.end(),
            [](const WavevectorRoot& a, const WavevectorRoot& b) { return a.k < b.k; });

  if (static_cast<int>(set.roots.size()) != spec.n_sites - 1)
    throw solver_error("solve_wavevectors: found " + std::to_string(set.roots.size()) +
                       " real roots, expected " + std::to_string(spec.n_sites - 1));
  return set;
}

/// Dense symmetric eigendecomposition, eigenvalues ascending, eigenvector
/// sign fixed so the largest-magnitude component is positive.
inline MediumSpectrum diagonalize_medium(const ChainSpec& spec) {
  const Eigen::MatrixXd h = build_medium_hamiltonian(spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  MediumSpectrum s;
  s.eigenvalues = solver.eigenvalues();
  s.eigenvectors = solver.eigenvectors();
  for (int c = 0; c < s.eigenvectors.cols(); ++c) {
    int imax = 0;
    s.eigenvectors.col(c).cwiseAbs().maxCoeff(&imax);
    if (s.eigenvectors(imax, c) < 0.0) s.eigenvectors.col(c) *= -1.0;
  }
  return s;
}

}  // namespace qst
