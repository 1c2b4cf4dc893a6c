#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <variant>
#include <vector>

#include "randlat/error.hpp"
#include "randlat/lattice.hpp"
#include "randlat/quadrature.hpp"
#include "randlat/specfun.hpp"

namespace randlat {

struct Uncorrelated {};
struct GeometricCorrelation {
  double rho;  // Gamma(j) = rho^|j|
};
struct TabulatedCorrelation {
  std::vector<double> gamma;  // Gamma(0..J), Gamma(0) = 1
};
using CorrelationModel = std::variant<Uncorrelated, GeometricCorrelation, TabulatedCorrelation>;

inline void validate(const CorrelationModel& m) {
  if (auto g = std::get_if<GeometricCorrelation>(&m)) {
    if (!(g->rho > -1.0 && g->rho < 1.0)) throw DomainError("geometric correlation needs |rho| < 1");
  } else if (auto t = std::get_if<TabulatedCorrelation>(&m)) {
    if (t->gamma.empty() || std::fabs(t->gamma[0] - 1.0) > 1e-12)
      throw DomainError("tabulated correlation needs Gamma(0) = 1");
  }
}

// Gamma-check(k) = Gamma(0) + 2 sum_j cos(kj) Gamma(j)
inline double spectral_density(const CorrelationModel& m, double k) {
  struct V {
    double k;
    double operator()(const Uncorrelated&) const { return 1.0; }
    double operator()(const GeometricCorrelation& g) const {
      const double r = g.rho;
      return (1.0 - r * r) / (1.0 - 2.0 * r * std::cos(k) + r * r);
    }
    double operator()(const TabulatedCorrelation& t) const {
      double s = t.gamma[0];
      for (std::size_t j = 1; j < t.gamma.size(); ++j) s += 2.0 * std::cos(k * j) * t.gamma[j];
      return s;
    }
  };
  return std::visit(V{k}, m);
}

// sigma^2 w^4 / (4 sin^2 k)
inline double gamma_iid(double omega, double sigma, double ks) {
  detail::check_band(omega, ks);
  const double a = omega * omega - ks;
  const double b = 4.0 + ks - omega * omega;
  return sigma * sigma * omega * omega * omega * omega / (a * b);
}

inline double gamma_correlated(double omega, double sigma, double ks, const CorrelationModel& m) {
  const double g = gamma_iid(omega, sigma, ks);
  if (std::holds_alternative<Uncorrelated>(m)) return g;
  return g * spectral_density(m, 2.0 * wavenumber(omega, ks));
}

inline double localization_length(double omega, double sigma, double ks) {
  return 1.0 / gamma_iid(omega, sigma, ks);
}

namespace detail {

// log of 2 pi s tanh(pi s) sech(pi s)
inline double log_moment_weight(double s) {
  const double x = std::numbers::pi * s;
  return std::log(2.0 * std::numbers::pi * s) + std::log(std::tanh(x)) + std::log(2.0) - x -
         std::log1p(std::exp(-2.0 * x));
}

inline double log_density_weight(double s) {
  return std::log(s) + std::log(std::tanh(std::numbers::pi * s));
}

// Upper cutoff where weight * e^{-g s^2} * (1+s^2)^growth falls 40 e-folds below its peak.
template <class LogW>
double cutoff(LogW logw, double g, double growth, double* log_peak) {
  auto env = [&](double s) { return logw(s) - g * s * s + growth * std::log1p(s * s); };
  double best = -INFINITY, s = 0.05;
  const double h = 0.05;
  for (; s < 5000.0; s += h) {
    const double e = env(s);
    best = std::max(best, e);
    if (e < best - 40.0 && s > 1.0) break;
  }
  if (log_peak) *log_peak = best;
  return s;
}

// e^{-g/4} int_0^inf w(s) e^{-g s^2} f(s) ds with w the moment weight
template <class F>
double moment_integral(double g, double growth, F f, double tol_rel = 1e-13) {
  double lp = 0.0;
  const double smax = cutoff(log_moment_weight, g, growth, &lp);
  auto h = [&](double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(log_moment_weight(s) - g * s * s) * f(s);
  };
  const double scale = std::exp(lp) * smax;
  const auto r = quad::composite_refine<20>(h, 0.0, smax, tol_rel * scale,
                                            std::max(4, static_cast<int>(std::ceil(smax))));
  return std::exp(-g / 4.0) * r.value;
}

}  // namespace detail

struct TransmittanceMoments {
  double gammaL;
  std::vector<double> m;  // m[n-1] = E|T|^{2n}
  double mean() const { return m.at(0); }
  double std_dev() const { return std::sqrt(std::max(m.at(1) - m.at(0) * m.at(0), 0.0)); }
};

// E|T|^{2n}, n = 1..n_max, matched half-spaces
inline TransmittanceMoments moments_matched(int n_max, double gammaL) {
  if (n_max < 1 || n_max > 20) throw DomainError("moments_matched: n_max must be in 1..20");
  if (!(gammaL >= 0.0)) throw DomainError("moments_matched: gammaL must be >= 0");
  TransmittanceMoments out{gammaL, {}};
  for (int n = 1; n <= n_max; ++n)
    out.m.push_back(detail::moment_integral(gammaL, n - 1.0, [n](double s) { return phi_n(n, s); }));
  return out;
}

inline double moment_matched(int n, double gammaL) { return moments_matched(n, gammaL).m.back(); }

struct NonmatchedQuery {
  double omega;
  double ks;
  double sigma;
  int length;
  double offset;  // Delta0 for the left case, Delta1 for the right case
  CorrelationModel correlation = Uncorrelated{};
};

namespace detail {

inline double query_gamma_l(const NonmatchedQuery& q) {
  return gamma_correlated(q.omega, q.sigma, q.ks, q.correlation) * q.length;
}

inline double offset_wavenumber(const NonmatchedQuery& q) {
  const double a = q.omega * q.omega * (1.0 + q.offset) - q.ks;
  const double qq = (2.0 + q.ks - q.omega * q.omega * (1.0 + q.offset)) / 2.0;
  if (!(qq > -1.0 && qq < 1.0)) throw DomainError("half-space is not propagative at this frequency");
  return 2.0 * std::asin(std::sqrt(a) / 2.0);
}

// continuous dual Hahn sequence psi_0..psi_m at s (a = b = c = 1/2)
inline void dual_hahn(int m, double s, std::vector<double>& out) {
  out.assign(m + 1, 0.0);
  out[0] = 1.0;
  if (m >= 1) out[1] = 1.0 - (0.25 + s * s);
  for (int n = 1; n < m; ++n) {
    const double a = (n + 1.0) * (n + 1.0);
    out[n + 1] = ((a + double(n) * n - 0.25 - s * s) * out[n] - double(n) * n * out[n - 1]) / a;
  }
}

}  // namespace detail

// E|T|^{2n}, n in {1, 2}, with only the left half-space offset.
inline double moments_nonmatched_left(int n, const NonmatchedQuery& q) {
  if (n != 1 && n != 2) throw DomainError("moments_nonmatched_left: n must be 1 or 2");
  const double k = wavenumber(q.omega, q.ks);
  const double k0 = detail::offset_wavenumber(q);
  const double g = detail::query_gamma_l(q);
  const double r = (1.0 - std::cos(k - k0)) / (1.0 - std::cos(k + k0));
  if (!(r < 1.0)) throw DomainError("moments_nonmatched_left: ratio r >= 1");
  const double pref = 2.0 * std::sin(k0) * std::sin(k0) / (1.0 - std::cos(k + k0));

  // e_m = E[tau (1-tau)^m], summed until the geometric tail bound is negligible
  std::vector<double> e;
  std::vector<double> buf;
  auto e_of = [&](int m) {
    while (static_cast<int>(e.size()) <= m) {
      const int mm = static_cast<int>(e.size());
      e.push_back(detail::moment_integral(g, mm, [&](double s) {
        detail::dual_hahn(mm, s, buf);
        return buf[mm];
      }));
    }
    return e[m];
  };
  double sum = 0.0, rm = 1.0;
  for (int m = 0; m < 2000; ++m) {
    const double term = n == 1 ? rm * e_of(m) : (m + 1.0) * (m + 1.0) * rm * (e_of(m) - e_of(m + 1));
    sum += term;
    const double tail_factor = n == 1 ? r / (1.0 - r) : r * (m + 3.0) * (m + 3.0) / (1.0 - r);
    if (std::fabs(term) * tail_factor < 1e-12 && m > 0) break;
    rm *= r;
  }
  const double result = (n == 1 ? pref : pref * pref) * sum;

  // swapped summation order, valid when r/(1-r) is small
  const double qq = r / (1.0 - r);
  if (n == 1 && qq <= 0.25 && e.size() > 0) {
    const auto mom = moments_matched(20, g);
    double alt = 0.0, qn = 1.0 / (1.0 - r);
    for (int j = 0; j < 20; ++j) {
      alt += (j % 2 ? -1.0 : 1.0) * mom.m[j] * qn;
      qn *= qq;
    }
    alt *= pref;
    if (std::fabs(alt - result) > 1e-9) {
      std::ostringstream os;
      os << "left-offset moment series disagree: " << result << " vs " << alt;
      throw ConsistencyError(os.str());
    }
  }
  return result;
}

// E|T|^{2n} with only the right half-space offset.
inline double moments_nonmatched_right(int n, const NonmatchedQuery& q) {
  if (n < 1 || n > 20) throw DomainError("moments_nonmatched_right: n must be in 1..20");
  const double k = wavenumber(q.omega, q.ks);
  const double k1 = detail::offset_wavenumber(q);
  const double g = detail::query_gamma_l(q);
  const double eta = std::max(1.0, (1.0 - std::cos(k) * std::cos(k1)) / (std::sin(k) * std::sin(k1)));
  const double e1 = eta - 1.0;
  const double xi = std::log1p(e1 + std::sqrt(e1 * (eta + 1.0)));
  const double v = detail::moment_integral(
      g, n - 1.0, [&](double s) { return phi_n(n, s) * legendre_conical_xi(s, xi); });
  return std::pow(std::sin(k) / std::sin(k1), n) * v;
}

// Transmittance density in the variable xi, tau = 2/(1+cosh xi):
// returns p(tau) |dtau/dxi| = sinh(xi) e^{-g/4} int s tanh(pi s) P(cosh xi) P(eta0) e^{-g s^2} ds
inline double density_xi(double xi, double tau0, double gammaL) {
  if (!(gammaL > 0.0)) throw DomainError("density: gammaL must be > 0");
  if (!(tau0 > 0.0 && tau0 <= 1.0)) throw DomainError("density: tau0 must be in (0, 1]");
  if (!(xi >= 0.0)) throw DomainError("density: xi must be >= 0");
  const double eta0 = 2.0 / tau0 - 1.0;
  const double e10 = eta0 - 1.0;
  const double xi0 = std::log1p(e10 + std::sqrt(e10 * (eta0 + 1.0)));
  const double smax = detail::cutoff(detail::log_density_weight, gammaL, 0.0, nullptr);
  // P oscillates in s with period ~ 2 pi / xi
  const int panels = 4 + static_cast<int>(std::ceil(smax * (1.0 + (xi + xi0) / 4.0)));
  const auto& r = quad::gauss_legendre<20>();
  const double h = smax / panels;
  std::vector<double> s, w;
  s.reserve(panels * 20);
  w.reserve(panels * 20);
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < 20; ++i) {
      const double si = (p + 0.5) * h + 0.5 * h * r.x[i];
      s.push_back(si);
      w.push_back(0.5 * h * r.w[i] * std::exp(detail::log_density_weight(si) - gammaL * si * si));
    }
  const auto p1 = legendre_conical_xi(s, xi);
  const auto p0 = legendre_conical_xi(s, xi0);
  double acc = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) acc += w[j] * p1[j] * p0[j];
  return std::sinh(xi) * std::exp(-gammaL / 4.0) * acc;
}

inline double density(double tau, double tau0, double gammaL) {
  if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("density: tau must be in (0, 1]");
  if (tau == 1.0) {
    // p dtau = sinh(xi) q dxi with sinh(xi) ~ xi, dtau ~ xi dxi / 2 near xi = 0
    const double h = 1e-4;
    const double q = density_xi(h, tau0, gammaL) / std::sinh(h);
    return 2.0 * q;
  }
  const double eta = 2.0 / tau - 1.0;
  const double e1 = eta - 1.0;
  const double xi = std::log1p(e1 + std::sqrt(e1 * (eta + 1.0)));
  // dtau/dxi = -2 sinh(xi) / (1 + cosh xi)^2 = -tau^2 sinh(xi) / 2
  return density_xi(xi, tau0, gammaL) / (0.5 * tau * tau * std::sinh(xi));
}

// Practical upper limit for xi integrals of the density.
inline double density_xi_max(double gammaL) { return 6.0 + 2.0 * gammaL + 14.0 * std::sqrt(gammaL); }

}  // namespace randlat
