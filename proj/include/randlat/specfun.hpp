#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "randlat/error.hpp"
#include "randlat/quadrature.hpp"

namespace randlat {

namespace detail {

// Ascending series, |x| small.
inline double bessel_j_series(int n, double x) {
  const long double h = 0.5L * x;
  long double term = std::exp(n * std::log(h) - std::lgamma(n + 1.0L));
  long double sum = term;
  const long double h2 = h * h;
  for (int m = 1; m < 500; ++m) {
    term *= -h2 / (static_cast<long double>(m) * (m + n));
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum) && m > h) break;
  }
  return static_cast<double>(sum);
}

// Miller backward recurrence normalized by J0 + 2 sum J_2m = 1.
inline double bessel_j_miller(int n, double x) {
  const double mx = std::max<double>(n, x);
  int top = static_cast<int>(mx + 30.0 + 12.0 * std::cbrt(mx));
  if (top % 2) ++top;
  double jp1 = 0.0, j = 1e-300, norm = 0.0, want = 0.0;
  for (int k = top; k >= 1; --k) {
    const double jm1 = (2.0 * k / x) * j - jp1;
    jp1 = j;
    j = jm1;
    if (k - 1 == n) want = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j;
    if (std::fabs(j) > 1e250) {
      j *= 1e-250;
      jp1 *= 1e-250;
      norm *= 1e-250;
      want *= 1e-250;
    }
  }
  norm += j;  // J_0
  return want / norm;
}

}  // namespace detail

// Integer-order Bessel function of the first kind.
inline double bessel_j(int n, double x) {
  double sign = 1.0;
  if (n < 0) {
    n = -n;
    if (n % 2) sign = -sign;
  }
  if (x < 0.0) {
    x = -x;
    if (n % 2) sign = -sign;
  }
  if (x == 0.0) return n == 0 ? sign : 0.0;
  if (x <= 12.0) return sign * detail::bessel_j_series(n, x);
  return sign * detail::bessel_j_miller(n, x);
}

inline constexpr long double airy_ai0 = 0.355028053887817239260063186004L;
inline constexpr long double airy_aip0 = -0.258819403792806798405183560189L;

namespace detail {

inline double airy_series(double x) {
  // Ai = c1 f - c2 g
  const long double x3 = static_cast<long double>(x) * x * x;
  long double tf = 1.0L, tg = x, f = 1.0L, g = x;
  for (int k = 1; k < 200; ++k) {
    tf *= x3 / ((3.0L * k - 1.0L) * (3.0L * k));
    tg *= x3 / ((3.0L * k) * (3.0L * k + 1.0L));
    f += tf;
    g += tg;
    if (std::fabs(tf) + std::fabs(tg) < 1e-24L * (std::fabs(f) + std::fabs(g))) break;
  }
  return static_cast<double>(airy_ai0 * f + airy_aip0 * g);
}

// u_k of the Airy asymptotic expansions.
inline double airy_u(int k) {
  double u = 1.0;
  for (int j = 1; j <= k; ++j)
    u *= (6.0 * j - 5.0) * (6.0 * j - 3.0) * (6.0 * j - 1.0) / ((2.0 * j - 1.0) * 216.0 * j);
  return u;
}

inline double airy_asym_pos(double x) {
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  double sum = 0.0, prev = 1e300;
  for (int k = 0; k < 60; ++k) {
    const double t = airy_u(k) / std::pow(zeta, k);
    if (t > prev) break;
    sum += (k % 2 ? -t : t);
    if (t < 1e-17) break;
    prev = t;
  }
  return std::exp(-zeta) / (2.0 * std::sqrt(std::numbers::pi) * std::pow(x, 0.25)) * sum;
}

inline double airy_asym_neg(double z) {
  const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
  double even = 0.0, odd = 0.0, prev = 1e300;
  for (int k = 0; k < 60; ++k) {
    const double t = airy_u(k) / std::pow(zeta, k);
    if (t > prev) break;
    const double sgn = ((k / 2) % 2) ? -1.0 : 1.0;
    (k % 2 ? odd : even) += sgn * t;
    if (t < 1e-17) break;
    prev = t;
  }
  const double ph = zeta - std::numbers::pi / 4.0;
  return (std::cos(ph) * even + std::sin(ph) * odd) /
         (std::sqrt(std::numbers::pi) * std::pow(z, 0.25));
}

}  // namespace detail

inline double airy_ai(double x) {
  if (std::fabs(x) <= 8.0) return detail::airy_series(x);
  if (x > 0.0) return detail::airy_asym_pos(x);
  return detail::airy_asym_neg(-x);
}

namespace detail {

// Panel count for the substituted Mehler-Dirichlet integrand; the integrand
// oscillates like cos(s xi v^2) on [0, 1].
inline int conical_panels(double s, double xi) { return 4 + static_cast<int>(std::ceil(s * xi / 3.0)); }

template <class Visit>
void conical_nodes(double xi, int panels, Visit&& visit) {
  const auto& r = quad::gauss_legendre<20>();
  const double h = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = (p + 0.5) * h;
    for (int i = 0; i < 20; ++i) {
      const double v = c + 0.5 * h * r.x[i];
      const double t = xi * (1.0 - v * v);
      const double den = 2.0 * std::sinh(0.5 * (xi + t)) * std::sinh(0.5 * xi * v * v);
      visit(t, 0.5 * h * r.w[i] * 2.0 * xi * v / std::sqrt(den));
    }
  }
}

}  // namespace detail

// P_{-1/2+is}(cosh xi) from the Mehler-Dirichlet integral
//   (sqrt2/pi) int_0^xi cos(s t) / sqrt(cosh xi - cosh t) dt
// with t = xi (1 - v^2) removing the endpoint singularity.
inline double legendre_conical_xi(double s, double xi) {
  if (!(s >= 0.0) || !(xi >= 0.0)) throw DomainError("legendre_conical: need s >= 0, eta >= 1");
  if (xi == 0.0) return 1.0;
  double acc = 0.0;
  detail::conical_nodes(xi, detail::conical_panels(s, xi), [&](double t, double w) { acc += w * std::cos(s * t); });
  return std::numbers::sqrt2 / std::numbers::pi * acc;
}

// Same function for many s at one xi, sharing the kernel evaluations.
inline std::vector<double> legendre_conical_xi(const std::vector<double>& s, double xi) {
  std::vector<double> out(s.size(), 0.0);
  if (s.empty()) return out;
  if (xi == 0.0) {
    std::fill(out.begin(), out.end(), 1.0);
    return out;
  }
  const double smax = *std::max_element(s.begin(), s.end());
  detail::conical_nodes(xi, detail::conical_panels(smax, xi), [&](double t, double w) {
    for (std::size_t j = 0; j < s.size(); ++j) out[j] += w * std::cos(s[j] * t);
  });
  for (auto& v : out) v *= std::numbers::sqrt2 / std::numbers::pi;
  return out;
}

inline double legendre_conical(double s, double eta) {
  if (!(eta >= 1.0)) throw DomainError("legendre_conical: need eta >= 1");
  const double e1 = eta - 1.0;
  return legendre_conical_xi(s, std::log1p(e1 + std::sqrt(e1 * (eta + 1.0))));
}

// log of prod_{j=1}^{n-1} (s^2 + (j-1/2)^2) / j^2
inline double log_phi_n(int n, double s) {
  if (n < 1) throw DomainError("phi_n: n must be >= 1");
  double acc = 0.0;
  for (int j = 1; j < n; ++j) acc += std::log((s * s + (j - 0.5) * (j - 0.5)) / (double(j) * j));
  return acc;
}

inline double phi_n(int n, double s) { return std::exp(log_phi_n(n, s)); }

}  // namespace randlat
