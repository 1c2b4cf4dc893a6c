#pragma once

#include <cmath>
#include <numbers>

#include "randlat/error.hpp"
#include "randlat/lattice.hpp"
#include "randlat/specfun.hpp"
#include "randlat/transmission.hpp"

namespace randlat {

// Leading-order value plus a flag set near the caustic alpha -> alpha_s,
// where the bulk prefactor diverges and the front formula should be used.
struct AsymptoticValue {
  double value;
  bool near_caustic;
};

inline constexpr double caustic_guard = 1e-3;

namespace detail {

struct Branch {
  double omega;
  double amplitude;  // sqrt2 w^{3/2} / sqrt(pi alpha |w^4 - ws^4| x)
  double phase;      // +-pi/4 + (k(w) - w alpha) x
};

inline void check_bulk(double x, double alpha, double ks) {
  if (!(x >= 1.0)) throw DomainError("asymptotics: x must be >= 1");
  (void)alpha;
  (void)ks;
}

template <class Visit>
AsymptoticValue bulk_sum(double x, double alpha, double ks, Visit&& weight) {
  check_bulk(x, alpha, ks);
  const auto fr = stationary_frequencies(alpha, ks);  // throws NoStationaryPoint
  const double ws4 = 4.0 * ks + ks * ks;
  const bool near = alpha < front_params(ks).alpha_s * (1.0 + caustic_guard);
  auto branch = [&](double w, double sign) {
    const double amp = std::numbers::sqrt2 * std::pow(w, 1.5) /
                       std::sqrt(std::numbers::pi * alpha * std::fabs(w * w * w * w - ws4) * x);
    const double ph = sign * std::numbers::pi / 4.0 + (wavenumber(w, ks) - w * alpha) * x;
    return weight(Branch{w, amp, ph});
  };
  double v = branch(fr.plus, 1.0);
  if (fr.minus) v += branch(*fr.minus, -1.0);
  return {v, near};
}

}  // namespace detail

// Stationary-phase field at t = alpha x (one branch for Ks = 0, two for Ks > 0).
inline AsymptoticValue unperturbed_bulk(double x, double alpha, double ks) {
  return detail::bulk_sum(x, alpha, ks, [](const detail::Branch& b) { return b.amplitude * std::cos(b.phase); });
}

// Airy front at t = alpha_s x + beta x^{1/3}.
inline double unperturbed_front(double x, double beta, double ks) {
  if (!(x >= 1.0)) throw DomainError("asymptotics: x must be >= 1");
  const double c = std::cbrt(x);
  if (ks == 0.0) return airy_ai(-2.0 * beta) / c;
  const auto fp = front_params(ks);
  const double k = wavenumber(fp.omega_s, ks);
  return std::cbrt(2.0) / c * airy_ai(-std::cbrt(2.0) * beta / fp.alpha_s) *
         std::cos((k - fp.omega_s * fp.alpha_s) * x - fp.omega_s * beta * c);
}

// Mean field with disorder on [1, L]: each branch damped by e^{-gamma(w) L}.
inline AsymptoticValue mean_bulk(double x, double alpha, double ks, double sigma, int length) {
  if (!(x > length)) throw DomainError("mean_bulk: x must exceed L");
  return detail::bulk_sum(x, alpha, ks, [&](const detail::Branch& b) {
    return b.amplitude * std::cos(b.phase) * std::exp(-gamma_iid(b.omega, sigma, ks) * length);
  });
}

// Mean front: unchanged for Ks = 0, damped by e^{-gamma(w_s) L} for Ks > 0.
inline double mean_front(double x, double beta, double sigma, int length, double ks) {
  if (!(x > length)) throw DomainError("mean_front: x must exceed L");
  const double u = unperturbed_front(x, beta, ks);
  if (ks == 0.0) return u;
  return u * std::exp(-gamma_iid(front_params(ks).omega_s, sigma, ks) * length);
}

// One realization of the transmitted bulk field given w ~ N(0, L):
// amplitude e^{-gamma L / 2}, phase shifted by sqrt(gamma) w.
inline AsymptoticValue sample_transmitted_bulk(double x, double alpha, double ks, double sigma, int length,
                                               double w) {
  if (!(x > length)) throw DomainError("sample_transmitted_bulk: x must exceed L");
  return detail::bulk_sum(x, alpha, ks, [&](const detail::Branch& b) {
    const double g = gamma_iid(b.omega, sigma, ks);
    return b.amplitude * std::exp(-0.5 * g * length) * std::cos(b.phase + std::sqrt(g) * w);
  });
}

// Damping exponent gamma(w_alpha) L of the single Ks = 0 branch.
inline double bulk_attenuation_exponent(double alpha, double sigma, int length) {
  return gamma_iid(stationary_frequencies(alpha, 0.0).plus, sigma, 0.0) * length;
}

}  // namespace randlat
