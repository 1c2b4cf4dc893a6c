#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace randlat::quad {

template <int N>
struct GaussRule {
  std::array<double, N> x{};
  std::array<double, N> w{};
};

// Nodes on [-1, 1] by Newton iteration on P_N.
template <int N>
const GaussRule<N>& gauss_legendre() {
  static const GaussRule<N> rule = [] {
    GaussRule<N> r;
    for (int i = 0; i < (N + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= N; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = N * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::fabs(dz) < 1e-16) break;
      }
      r.x[i] = -z;
      r.x[N - 1 - i] = z;
      r.w[i] = r.w[N - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
  }();
  return rule;
}

template <int N, class F>
double gauss(F&& f, double a, double b) {
  const auto& r = gauss_legendre<N>();
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  double s = 0.0;
  for (int i = 0; i < N; ++i) s += r.w[i] * f(c + h * r.x[i]);
  return s * h;
}

// Composite rule with `panels` equal panels.
template <int N = 20, class F>
double composite(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) s += gauss<N>(f, a + p * h, a + (p + 1) * h);
  return s;
}

struct Result {
  double value;
  double error;
};

// Composite Gauss-Legendre, doubling panels until successive sums agree.
template <int N = 20, class F>
Result composite_refine(F&& f, double a, double b, double tol_abs = 1e-10, int panels = 4,
                        int max_panels = 4096) {
  double prev = composite<N>(f, a, b, panels);
  while (panels < max_panels) {
    panels *= 2;
    const double cur = composite<N>(f, a, b, panels);
    const double err = std::fabs(cur - prev);
    if (err <= tol_abs) return {cur, err};
    prev = cur;
  }
  return {prev, std::numeric_limits<double>::quiet_NaN()};
}

namespace detail {

struct Kronrod15 {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

template <class F>
Result gk15(F& f, double a, double b) {
  using K = Kronrod15;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double rk = fc * K::wgk[7];
  double rg = fc * K::wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * K::xgk[j];
    const double fs = f(c - dx) + f(c + dx);
    rk += K::wgk[j] * fs;
    if (j % 2 == 1) rg += K::wg[j / 2] * fs;
  }
  return {rk * h, std::fabs((rk - rg) * h)};
}

template <class F>
Result adapt(F& f, double a, double b, double tol, int depth) {
  const Result whole = gk15(f, a, b);
  if (whole.error <= tol || depth <= 0) return whole;
  const double m = 0.5 * (a + b);
  const Result l = adapt(f, a, m, 0.5 * tol, depth - 1);
  const Result r = adapt(f, m, b, 0.5 * tol, depth - 1);
  return {l.value + r.value, l.error + r.error};
}

}  // namespace detail

// Recursive Gauss-Kronrod 7/15.
template <class F>
Result adaptive(F&& f, double a, double b, double tol_abs = 1e-10, int max_depth = 40) {
  return detail::adapt(f, a, b, tol_abs, max_depth);
}

}  // namespace randlat::quad
