#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <vector>

#include "randlat/error.hpp"
#include "randlat/lattice.hpp"

namespace randlat {

using cplx = std::complex<double>;

// Wave in a homogeneous region: u_x proportional to lambda^x.
struct RegionWave {
  enum class Kind { propagative, evanescent_cosh, evanescent_alt };
  Kind kind;
  double k;      // wavenumber in (0, pi); 0 when evanescent
  double decay;  // kappa (cosh case) or rho in (-1, 0) (alternating case)
  cplx lambda;   // e^{ik}, e^{-kappa} or rho

  bool propagative() const { return kind == Kind::propagative; }
};

inline RegionWave region_wave(double omega, double ks, double offset) {
  const double q = (2.0 + ks - omega * omega * (1.0 + offset)) / 2.0;
  if (q > -1.0 && q < 1.0) {
    // 2 asin form is accurate near k = 0
    const double a = omega * omega * (1.0 + offset) - ks;
    const double k = 2.0 * std::asin(std::sqrt(a) / 2.0);
    return {RegionWave::Kind::propagative, k, 0.0, std::polar(1.0, k)};
  }
  if (q >= 1.0) {
    const double kappa = std::acosh(q);
    return {RegionWave::Kind::evanescent_cosh, 0.0, kappa, cplx(std::exp(-kappa), 0.0)};
  }
  const double rho = q + std::sqrt(q * q - 1.0);
  return {RegionWave::Kind::evanescent_alt, 0.0, rho, cplx(rho, 0.0)};
}

struct HarmonicSetup {
  double omega = 0.0;
  double ks = 0.0;
  MassProfile profile;
  RegionWave section{};
  RegionWave left{};
  RegionWave right{};
  bool cross_check = true;  // run the Green's-kernel back-end alongside the recursion

  HarmonicSetup() = default;
  HarmonicSetup(double w, double pinning, MassProfile p) : omega(w), ks(pinning), profile(std::move(p)) {
    profile.validate();
    detail::check_band(omega, ks);
    section = region_wave(omega, ks, 0.0);
    left = region_wave(omega, ks, profile.left_offset);
    right = region_wave(omega, ks, profile.right_offset);
  }
  int length() const { return profile.length(); }
};

struct ScatteringResult {
  cplx T;
  cplx R;
  std::vector<cplx> interior;  // field at sites 1..L for unit incident amplitude
  double flux_deficit = 0.0;
  std::optional<RegionWave> tail;  // set when the right half-space is evanescent
};

namespace detail {

inline Eigen::VectorXcd solve_dense(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    std::ostringstream os;
    os << "near-singular scattering system, condition estimate " << (rc > 0 ? 1.0 / rc : INFINITY);
    throw SolverSingular(rc > 0 ? 1.0 / rc : INFINITY, os.str());
  }
  return lu.solve(b);
}

inline double matched_flux(cplx t, cplx r) { return std::fabs(std::norm(r) + std::norm(t) - 1.0); }

// Backward alpha/beta sweep over x = L..1. Returns (alpha_x, beta_x) for x = 0..L
// rescaled so that the largest |alpha| stays bounded; log_scale accumulates the
// factors divided out of entries below the last rescale point.
struct Sweep {
  std::vector<cplx> alpha, beta;
  std::vector<double> log_scale;  // alpha_true_x = alpha_x * exp(log_scale_x)
};

inline Sweep sweep(const HarmonicSetup& s, cplx a_l, cplx b_l) {
  const int n = s.length();
  const double k = s.section.k;
  const cplx c(0.0, s.omega * s.omega / (2.0 * std::sin(k)));
  Sweep out;
  out.alpha.resize(n + 1);
  out.beta.resize(n + 1);
  out.log_scale.assign(n + 1, 0.0);
  out.alpha[n] = a_l;
  out.beta[n] = b_l;
  double ls = 0.0;
  for (int x = n; x >= 1; --x) {
    const cplx a = out.alpha[x], b = out.beta[x];
    const double d = s.profile.deltas[x - 1];
    const cplx e = std::polar(1.0, 2.0 * k * x);
    cplx an = a - c * d * (a + b * std::conj(e));
    cplx bn = b + c * d * (a * e + b);
    const double m = std::abs(an);
    if (m > 1e100) {
      an /= m;
      bn /= m;
      ls += std::log(m);
    }
    out.alpha[x - 1] = an;
    out.beta[x - 1] = bn;
    out.log_scale[x - 1] = ls;
  }
  // make every entry relative to the final scale so ratios across x stay valid
  for (int x = 0; x <= n; ++x) {
    const double shift = out.log_scale[x] - ls;
    if (shift != 0.0) {
      out.alpha[x] *= std::exp(shift);
      out.beta[x] *= std::exp(shift);
    }
    out.log_scale[x] = ls;
  }
  return out;
}

inline void fill_interior(ScatteringResult& r, const HarmonicSetup& s, const Sweep& sw, cplx amp) {
  const int n = s.length();
  const double k = s.section.k;
  r.interior.resize(n);
  for (int x = 1; x <= n; ++x) {
    const cplx e = std::polar(1.0, k * x);
    r.interior[x - 1] = amp * (sw.alpha[x] * e + sw.beta[x] * std::conj(e));
  }
}

}  // namespace detail

// Green's-function solve of the Lippmann-Schwinger system, matched half-spaces.
inline ScatteringResult solve_matched_toeplitz(const HarmonicSetup& s) {
  if (s.profile.left_offset != 0.0 || s.profile.right_offset != 0.0)
    throw DomainError("solve_matched_toeplitz needs zero half-space offsets");
  const int n = s.length();
  const double k = s.section.k;
  const cplx z = s.section.lambda;
  const cplx cc = 1.0 / cplx(0.0, 2.0 * std::sin(k));
  const double w2 = s.omega * s.omega;

  Eigen::VectorXcd zp(n), zm(n), dvec(n);
  for (int p = 1; p <= n; ++p) {
    zp[p - 1] = std::polar(1.0, k * p);
    zm[p - 1] = std::conj(zp[p - 1]);
    dvec[p - 1] = -w2 * s.profile.deltas[p - 1];
  }
  Eigen::MatrixXcd a(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      a(p, q) = (p == q ? 1.0 : 0.0) - cc * std::polar(1.0, k * std::abs(p - q)) * dvec[q];
  const Eigen::VectorXcd u = detail::solve_dense(a, zp);
  const Eigen::VectorXcd du = dvec.cwiseProduct(u);

  ScatteringResult r;
  r.T = 1.0 + cc * zm.cwiseProduct(du).sum();
  r.R = cc * zp.cwiseProduct(du).sum();
  r.interior.assign(u.data(), u.data() + n);
  r.flux_deficit = detail::matched_flux(r.T, r.R);
  (void)z;
  return r;
}

// Transfer recursion, matched half-spaces.
inline ScatteringResult solve_matched_recursion(const HarmonicSetup& s) {
  if (s.profile.left_offset != 0.0 || s.profile.right_offset != 0.0)
    throw DomainError("solve_matched_recursion needs zero half-space offsets");
  const auto sw = detail::sweep(s, 1.0, 0.0);
  ScatteringResult r;
  const double ls = sw.log_scale[0];
  r.T = std::exp(-ls) / sw.alpha[0];
  r.R = sw.beta[0] / sw.alpha[0];
  detail::fill_interior(r, s, sw, r.T * std::exp(ls));
  r.flux_deficit = detail::matched_flux(r.T, r.R);
  return r;
}

namespace detail {

// Recursion for arbitrary half-spaces; the right side may be evanescent.
inline ScatteringResult nonmatched_recursion(const HarmonicSetup& s) {
  if (!s.left.propagative()) throw DomainError("incoming half-space is not propagative");
  const int n = s.length();
  const double k = s.section.k;
  const cplx lam = s.right.lambda;
  const cplx tsk(0.0, 2.0 * std::sin(k));
  const cplx eik = std::polar(1.0, k);
  cplx lam_n;
  if (s.right.propagative())
    lam_n = std::polar(1.0, s.right.k * n);
  else
    lam_n = std::pow(lam.real(), n);
  const cplx a_l = lam_n * std::polar(1.0, -k * n) * (lam - std::conj(eik)) / tsk;
  const cplx b_l = -lam_n * std::polar(1.0, k * n) * (lam - eik) / tsk;
  const auto sw = sweep(s, a_l, b_l);
  const double ls = sw.log_scale[0];

  const double k0 = s.left.k;
  const cplx e0 = std::polar(1.0, k0);
  const cplx A = e0 - std::conj(eik);
  const cplx B = e0 - eik;
  const cplx rt = sw.beta[0] / sw.alpha[0];
  const cplx den = 1.0 + std::conj(B) / std::conj(A) * rt;

  ScatteringResult r;
  // T-tilde = 1/alpha_0 carries the log scale
  const cplx tt = std::exp(-ls) / sw.alpha[0];
  r.T = -(cplx(0.0, 2.0 * std::sin(k0)) / std::conj(A)) * tt / den;
  r.R = -(A / std::conj(A)) * (B / A + rt) / den;
  fill_interior(r, s, sw, r.T * std::exp(ls));
  if (s.right.propagative()) {
    r.flux_deficit =
        std::fabs(std::norm(r.R) + std::sin(s.right.k) / std::sin(k0) * std::norm(r.T) - 1.0);
  } else {
    r.flux_deficit = std::fabs(std::abs(r.R) - 1.0);
    r.tail = s.right;
  }
  return r;
}

inline cplx kernel_c2(double a, double b) {
  return -(1.0 - std::polar(1.0, b - a)) / (1.0 - std::polar(1.0, a + b));
}
inline cplx kernel_c3(double a, double b) {
  return -std::polar(1.0, b - a) / (1.0 - std::polar(1.0, a + b));
}

}  // namespace detail

// Green's kernel with the interface on the left (right offset zero).
inline cplx kernel_transmission_left(const HarmonicSetup& s) {
  const int n = s.length();
  const double k = s.section.k, k0 = s.left.k;
  const cplx cc = 1.0 / cplx(0.0, 2.0 * std::sin(k));
  const cplx c1 = cc * detail::kernel_c2(k, k0);
  const cplx t = cplx(0.0, 2.0 * std::sin(k0)) / (std::polar(1.0, k) - std::polar(1.0, -k0));
  const double w2 = s.omega * s.omega;
  Eigen::VectorXcd zp(n), zm(n), dvec(n);
  for (int p = 1; p <= n; ++p) {
    zp[p - 1] = std::polar(1.0, k * p);
    zm[p - 1] = std::conj(zp[p - 1]);
    dvec[p - 1] = -w2 * s.profile.deltas[p - 1];
  }
  Eigen::MatrixXcd a(n, n);
  for (int p = 1; p <= n; ++p)
    for (int q = 1; q <= n; ++q) {
      const cplx g = cc * std::polar(1.0, k * std::abs(p - q)) + c1 * std::polar(1.0, k * (p + q));
      a(p - 1, q - 1) = (p == q ? 1.0 : 0.0) - g * dvec[q - 1];
    }
  const Eigen::VectorXcd u = t * detail::solve_dense(a, zp);
  const Eigen::VectorXcd du = dvec.cwiseProduct(u);
  return t + c1 * zp.cwiseProduct(du).sum() + cc * zm.cwiseProduct(du).sum();
}

// Green's kernel with the interface on the right (left offset zero).
inline cplx kernel_transmission_right(const HarmonicSetup& s) {
  const int n = s.length();
  const double k = s.section.k, k1 = s.right.k;
  const cplx cc = 1.0 / cplx(0.0, 2.0 * std::sin(k));
  const cplx c2 = detail::kernel_c2(k, k1);
  const cplx c1 = cc * c2;
  const double w2 = s.omega * s.omega;
  Eigen::VectorXcd rhs(n), zr(n), dvec(n);
  for (int p = 1; p <= n; ++p) {
    rhs[p - 1] = std::polar(1.0, k * p) + c2 * std::polar(1.0, k * (2 * n + 2 - p));
    zr[p - 1] = std::polar(1.0, k * (2 - p));
    dvec[p - 1] = -w2 * s.profile.deltas[p - 1];
  }
  Eigen::MatrixXcd a(n, n);
  for (int p = 1; p <= n; ++p)
    for (int q = 1; q <= n; ++q) {
      const cplx g = cc * std::polar(1.0, k * std::abs(p - q)) +
                     c1 * std::polar(1.0, k * (2 * n + 2 - p - q));
      a(p - 1, q - 1) = (p == q ? 1.0 : 0.0) - g * dvec[q - 1];
    }
  const Eigen::VectorXcd u = detail::solve_dense(a, rhs);
  const Eigen::VectorXcd du = dvec.cwiseProduct(u);
  const cplx t3 = std::polar(1.0, -k1) * detail::kernel_c3(k, k1) * zr.cwiseProduct(du).sum();
  const cplx z = s.section.lambda;
  return std::polar(1.0, (k - k1) * n) * (1.0 + z * z * c2 + t3);
}

inline constexpr double kernel_agreement_tol = 1e-10;

// Recursion route for any offsets; kernel cross-check when exactly one offset is zero.
inline ScatteringResult solve_nonmatched(const HarmonicSetup& s) {
  if (!s.left.propagative() || !s.right.propagative())
    throw DomainError("solve_nonmatched needs propagative half-spaces; use reflect_evanescent");
  ScatteringResult r = detail::nonmatched_recursion(s);
  const bool l0 = s.profile.left_offset == 0.0, r0 = s.profile.right_offset == 0.0;
  if (s.cross_check && (l0 != r0)) {
    const cplx tk = r0 ? kernel_transmission_left(s) : kernel_transmission_right(s);
    const double diff = std::abs(tk - r.T);
    if (!(diff <= kernel_agreement_tol)) {
      std::ostringstream os;
      os << "kernel and recursion transmission disagree by " << diff << " at omega=" << s.omega;
      throw ConsistencyError(os.str());
    }
  }
  return r;
}

// Right half-space outside its band: total reflection.
inline ScatteringResult reflect_evanescent(const HarmonicSetup& s) {
  if (s.right.propagative()) throw DomainError("right half-space is propagative");
  return detail::nonmatched_recursion(s);
}

// Dispatch on the setup.
inline ScatteringResult solve(const HarmonicSetup& s) {
  if (!s.right.propagative()) return reflect_evanescent(s);
  if (s.profile.left_offset == 0.0 && s.profile.right_offset == 0.0) return solve_matched_recursion(s);
  return solve_nonmatched(s);
}

}  // namespace randlat
