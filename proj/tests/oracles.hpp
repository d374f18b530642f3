#pragma once

// Test-only reference computations, independent of the library's solvers:
// a Fourier series for the square torsion maximum, fixed-step RK4 shooting
// for 1D two-point boundary value problems, and a dense-matrix bisection
// eigensolver.

#include "subell/core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

using subell::Real;

/// Maximum of the torsion function of the unit square, truncated to < 1e-8:
/// u(1/2,1/2) = 1/8 - (4/pi^3) sum_{k odd} (-1)^((k-1)/2) sech(k pi/2) / k^3.
inline Real square_torsion_max() {
  Real acc = 0.125;
  for (int k = 1; k <= 41; k += 2) {
    const Real sign = ((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
    acc -= 4.0 / (M_PI * M_PI * M_PI) * sign /
           (std::cosh(k * M_PI / 2.0) * k * k * k);
  }
  return acc;
}

/// RK4 integration of u'' = g(x, u) from (a, u0, s) to b with fixed steps.
/// Returns the trajectory sampled at every step.
struct Trajectory {
  std::vector<Real> x, u;
};

inline Trajectory integrate_second_order(const std::function<Real(Real, Real)>& g,
                                         Real a, Real b, Real u0, Real s,
                                         int steps) {
  Trajectory tr;
  const Real h = (b - a) / steps;
  Real x = a, u = u0, v = s;
  tr.x.push_back(x);
  tr.u.push_back(u);
  for (int i = 0; i < steps; ++i) {
    // y = (u, v), y' = (v, g(x,u))
    const Real k1u = v, k1v = g(x, u);
    const Real k2u = v + 0.5 * h * k1v, k2v = g(x + 0.5 * h, u + 0.5 * h * k1u);
    const Real k3u = v + 0.5 * h * k2v, k3v = g(x + 0.5 * h, u + 0.5 * h * k2u);
    const Real k4u = v + h * k3v, k4v = g(x + h, u + h * k3u);
    u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    x = a + (i + 1) * h;
    tr.x.push_back(x);
    tr.u.push_back(u);
  }
  return tr;
}

/// Shooting solve of u'' = g(x, u), u(a) = ua, u(b) = ub. The initial slope
/// is found by bisection on [s_lo, s_hi]; the endpoint mismatch must change
/// sign across the bracket.
inline Trajectory shoot_bvp(const std::function<Real(Real, Real)>& g, Real a,
                            Real b, Real ua, Real ub, Real s_lo, Real s_hi,
                            int steps = 40000, int bisections = 100) {
  auto endpoint = [&](Real s) {
    return integrate_second_order(g, a, b, ua, s, steps).u.back() - ub;
  };
  Real f_lo = endpoint(s_lo), f_hi = endpoint(s_hi);
  if (f_lo * f_hi > 0)
    throw std::runtime_error("shooting bracket does not straddle the target");
  for (int it = 0; it < bisections; ++it) {
    const Real mid = 0.5 * (s_lo + s_hi);
    const Real f_mid = endpoint(mid);
    if (f_lo * f_mid <= 0) {
      s_hi = mid;
      f_hi = f_mid;
    } else {
      s_lo = mid;
      f_lo = f_mid;
    }
  }
  return integrate_second_order(g, a, b, ua, 0.5 * (s_lo + s_hi), steps);
}

/// Linear interpolation of a trajectory.
inline Real sample(const Trajectory& tr, Real x) {
  if (x <= tr.x.front())
    return tr.u.front();
  if (x >= tr.x.back())
    return tr.u.back();
  const Real h = tr.x[1] - tr.x[0];
  const std::size_t k = static_cast<std::size_t>((x - tr.x.front()) / h);
  const Real t = (x - tr.x[k]) / h;
  return (1 - t) * tr.u[k] + t * tr.u[k + 1];
}

/// Smallest positive lambda with a positive eigenvector of A phi = lambda D phi,
/// via dense symmetric eigensolves of A - lambda D and bisection in lambda.
inline Real dense_principal_eigenvalue(const Eigen::MatrixXd& A,
                                       const Eigen::VectorXd& d) {
  auto mu1 = [&](Real lambda) {
    Eigen::MatrixXd S = A;
    S.diagonal() -= lambda * d;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  };
  Real lo = 0.0, hi = 1.0;
  while (mu1(hi) >= 0) {
    lo = hi;
    hi *= 2;
    if (hi > 1e12)
      throw std::runtime_error("dense eigen oracle found no bracket");
  }
  for (int it = 0; it < 80; ++it) {
    const Real mid = 0.5 * (lo + hi);
    (mu1(mid) >= 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace oracles
