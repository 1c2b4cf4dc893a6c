#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "randlat/scattering.hpp"

namespace oracle {

using cplx = std::complex<double>;

// Direct tridiagonal solve of the harmonic equations on sites 0..L+1 with
// radiation closures on both sides. Returns (T, R) with T the amplitude of
// lambda^x on the right.
inline std::pair<cplx, cplx> brute_force(const randlat::HarmonicSetup& s) {
  const int n = s.length();
  const double w2 = s.omega * s.omega;
  const int m = n + 2;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m, m);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(m);
  const cplx e0 = std::polar(1.0, s.left.k);
  auto mass = [&](int x) {
    if (x <= 0) return 1.0 + s.profile.left_offset;
    if (x > n) return 1.0 + s.profile.right_offset;
    return 1.0 + s.profile.deltas[x - 1];
  };
  for (int x = 0; x <= n + 1; ++x) {
    a(x, x) = -(2.0 + s.ks) + w2 * mass(x);
    if (x + 1 <= n + 1)
      a(x, x + 1) += 1.0;
    else
      a(x, x) += s.right.lambda;
    if (x - 1 >= 0) {
      a(x, x - 1) += 1.0;
    } else {
      // u_{-1} = e^{ik0} u_0 + e^{-ik0} - e^{ik0}
      a(x, x) += e0;
      rhs[x] -= std::conj(e0) - e0;
    }
  }
  const Eigen::VectorXcd u = a.fullPivLu().solve(rhs);
  cplx lam_pow = s.right.propagative() ? std::polar(1.0, s.right.k * (n + 1))
                                       : cplx(std::pow(s.right.lambda.real(), n + 1), 0.0);
  return {u[n + 1] / lam_pow, u[0] - 1.0};
}

}  // namespace oracle
