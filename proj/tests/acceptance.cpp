// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "randlat/asymptotics.hpp"
#include "randlat/ensemble.hpp"
#include "randlat/scattering.hpp"
#include "randlat/specfun.hpp"
#include "randlat/timedomain.hpp"
#include "randlat/transmission.hpp"

using namespace randlat;

namespace {

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("%s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char b[256];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char b[512];
  std::snprintf(b, sizeof b, f, a...);
  return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::mt19937_64 rng(20240611);
double unif(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

MassProfile random_profile(int n, double sigma, double d0 = 0, double d1 = 0) {
  MassProfile p;
  p.deltas.resize(n);
  for (auto& d : p.deltas) d = unif(-std::sqrt(3.0) * sigma, std::sqrt(3.0) * sigma);
  p.left_offset = d0;
  p.right_offset = d1;
  return p;
}

Band common_band(double ks, double d0, double d1) {
  const Band a = propagative_band(ks), b = propagative_band(ks, d0), c = propagative_band(ks, d1);
  return {std::max({a.lower, b.lower, c.lower}), std::min({a.upper, b.upper, c.upper})};
}

// 30 frequencies at band fractions 0.05 .. 0.95
std::vector<double> band_grid(const Band& b) {
  std::vector<double> w;
  for (int i = 0; i < 30; ++i) w.push_back(b.lower + (0.05 + 0.9 * i / 29.0) * (b.upper - b.lower));
  return w;
}

DisorderSpec disorder(double sigma, int L, std::uint64_t seed, double d0 = 0, double d1 = 0) {
  DisorderSpec s;
  s.sigma = sigma;
  s.length = L;
  s.master_seed = seed;
  s.left_offset = d0;
  s.right_offset = d1;
  return s;
}

void p1() {
  const auto t0 = std::chrono::steady_clock::now();
  LatticeConfig c;
  const auto r = simulate(c, MassProfile{{0.0}, 0, 0}, impulse(0), 20.0, 1e-3, 40, {-30, 30, 1 << 30});
  double err = 0;
  for (int x = -30; x <= 30; ++x) err = std::max(err, std::fabs(r.values.back()[x + 30] - bessel_j(2 * x, 40.0)));
  const double sec = seconds_since(t0);
  report("P1", err <= 1e-6 && sec <= 10, fmt("max |u - J_2x(2t)| = %.3g (<= 1e-6), %.2f s (<= 10 s)", err, sec));
}

void p2() {
  double dm = 0, fm = 0, dn = 0, fn = 0;
  for (int i = 0; i < 100; ++i) {
    const double ks = unif(0, 2);
    const int n = 1 + static_cast<int>(unif(0, 50));
    const Band b = propagative_band(ks);
    const double w = b.lower + unif(0.01, 0.99) * (b.upper - b.lower);
    HarmonicSetup s(w, ks, random_profile(n, unif(0, 0.2)));
    const auto a = solve_matched_toeplitz(s), r = solve_matched_recursion(s);
    dm = std::max(dm, std::abs(a.T - r.T));
    fm = std::max({fm, a.flux_deficit, r.flux_deficit});
  }
  for (int i = 0; i < 100; ++i) {
    const double ks = unif(0, 1.5);
    const int n = 1 + static_cast<int>(unif(0, 50));
    const bool left = i % 2 == 0;
    const double off = unif(-0.3, 0.3);
    const double d0 = left ? off : 0.0, d1 = left ? 0.0 : off;
    const Band b = common_band(ks, d0, d1);
    const double w = b.lower + unif(0.01, 0.99) * (b.upper - b.lower);
    HarmonicSetup s(w, ks, random_profile(n, unif(0, 0.2), d0, d1));
    s.cross_check = false;
    const auto r = detail::nonmatched_recursion(s);
    const cplx k = left ? kernel_transmission_left(s) : kernel_transmission_right(s);
    dn = std::max(dn, std::abs(r.T - k));
    fn = std::max(fn, r.flux_deficit);
  }
  report("P2", dm <= 1e-10 && fm <= 1e-12 && dn <= 1e-10 && fn <= 1e-12,
         fmt("matched |dT| %.2g flux %.2g; non-matched |dT| %.2g flux %.2g (<= 1e-10 / 1e-12)", dm, fm, dn, fn));
}

void p3() {
  bool exact = true;
  double dev = 0;
  for (int i = 0; i < 50; ++i) {
    const double ks = unif(0, 1.5);
    const int n = 1 + static_cast<int>(unif(0, 50));
    const Band b = propagative_band(ks);
    const double w = b.lower + unif(0.01, 0.99) * (b.upper - b.lower);
    const MassProfile clean{std::vector<double>(n, 0.0), 0, 0};
    const auto r = solve_matched_recursion(HarmonicSetup(w, ks, clean));
    const auto t = solve_matched_toeplitz(HarmonicSetup(w, ks, clean));
    exact = exact && r.T == cplx(1, 0) && r.R == cplx(0, 0) && t.T == cplx(1, 0) && t.R == cplx(0, 0);

    const bool left = i % 2 == 0;
    const double off = unif(-0.3, 0.3);
    const double d0 = left ? off : 0.0, d1 = left ? 0.0 : off;
    const Band cb = common_band(ks, d0, d1);
    const double wn = cb.lower + unif(0.01, 0.99) * (cb.upper - cb.lower);
    HarmonicSetup s(wn, ks, MassProfile{std::vector<double>(n, 0.0), d0, d1});
    const double k0 = s.left.k, k1 = s.right.k;
    dev = std::max(dev, std::fabs(std::norm(solve(s).T) - (1 - std::cos(2 * k0)) / (1 - std::cos(k0 + k1))));
  }
  report("P3", exact && dev <= 1e-12,
         fmt("matched T=1,R=0 exactly: %s; non-matched max ||T|^2 - closed form| = %.2g (<= 1e-12)",
             exact ? "yes" : "no", dev));
}

void p4() {
  const auto m = moments_matched(5, 0.0);
  double dev = 0;
  for (double v : m.m) dev = std::max(dev, std::fabs(v - 1));
  report("P4", dev <= 1e-8, fmt("max_n |M_n(0) - 1| = %.2g (<= 1e-8)", dev));
}

// std of the sample std via the delta method: Var(s) ~ (mu4 - s^4) / (4 s^2 n)
double std_stderr(const std::vector<double>& v, double mean, double sd) {
  double m4 = 0;
  for (double x : v) m4 += std::pow(x - mean, 4);
  m4 /= static_cast<double>(v.size());
  return std::sqrt(std::max(m4 - std::pow(sd, 4), 0.0) / (4 * sd * sd * v.size()));
}

void p5() {
  const auto t0 = std::chrono::steady_clock::now();
  const double ks = 0.02, sigma = 0.05;
  const int L = 40;
  const auto ws = band_grid(propagative_band(ks));
  auto solver = [&](const MassProfile& p, long) {
    std::vector<double> out;
    for (double w : ws) out.push_back(std::norm(solve_matched_recursion(HarmonicSetup(w, ks, p)).T));
    return out;
  };
  const auto samples = run_samples(disorder(sigma, L, 505), solver, 2000);
  const auto sum = summarize(ws, samples);
  double worst_mean = 0, worst_std = 0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const auto m = moments_matched(2, gamma_iid(ws[i], sigma, ks) * L);
    worst_mean = std::max(worst_mean, std::fabs(sum.mean[i] - m.mean()) / sum.stderr_[i]);
    std::vector<double> col;
    for (const auto& s : samples) col.push_back(s[i]);
    const double se = std_stderr(col, sum.mean[i], sum.std[i]);
    worst_std = std::max(worst_std, std::fabs(sum.std[i] - m.std_dev()) / se);
  }
  const double sec = seconds_since(t0);
  report("P5", worst_mean <= 4 && worst_std <= 4 && sec <= 120,
         fmt("max |mean - M1|/stderr = %.2f, max |std - Std|/stderr = %.2f (<= 4) over 30 freqs, %.1f s", worst_mean,
             worst_std, sec));
}

void p6() {
  const double ks = 0.02, sigma = 0.05;
  const int L = 40;
  std::string detail;
  bool pass = true;
  for (int side = 0; side < 2; ++side) {
    const double d0 = side == 0 ? 0.1 : 0.0, d1 = side == 0 ? 0.0 : -0.1;
    const auto ws = band_grid(common_band(ks, d0, d1));
    auto solver = [&](const MassProfile& p, long) {
      std::vector<double> out;
      for (double w : ws) {
        HarmonicSetup s(w, ks, p);
        s.cross_check = false;
        out.push_back(std::norm(solve(s).T));
      }
      return out;
    };
    const auto sum = run_campaign(disorder(sigma, L, 606 + side, d0, d1), solver, 2000, ws);
    double worst = 0;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      NonmatchedQuery q{ws[i], ks, sigma, L, side == 0 ? d0 : d1};
      const double th = side == 0 ? moments_nonmatched_left(1, q) : moments_nonmatched_right(1, q);
      worst = std::max(worst, std::fabs(sum.mean[i] - th) / sum.stderr_[i]);
    }
    pass = pass && worst <= 4;
    detail += fmt("%s max |mean - theory|/stderr = %.2f; ", side == 0 ? "(D0=0.1,D1=0)" : "(D0=0,D1=-0.1)", worst);
  }
  report("P6", pass, detail + "(<= 4)");
}

void p7() {
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const double alpha = unif(1.05, 4), sig = unif(0, 0.3), ks = unif(0.01, 3);
    const double wa = stationary_frequencies(alpha, 0.0).plus;
    worst = std::max(worst, std::fabs(gamma_iid(wa, sig, 0.0) - sig * sig * (alpha * alpha - 1)));
    const double closed =
        sig * sig * std::sqrt(ks) * std::sqrt(4 + ks) / std::pow(std::sqrt(4 + ks) - std::sqrt(ks), 2);
    worst = std::max(worst, std::fabs(gamma_iid(front_params(ks).omega_s, sig, ks) - closed));
  }
  report("P7", worst <= 1e-12, fmt("max identity deviation %.2g (<= 1e-12)", worst));
}

// ensemble of exact transmitted fields at the requested (x, t) pairs
std::vector<std::vector<double>> field_samples(double ks, double sigma, int L, std::uint64_t seed, long n,
                                               int x, const std::vector<double>& times) {
  auto solver = [&](const MassProfile& p, long) {
    TransmittedField f(ks, p, 0);
    const auto w = f.weights(x);
    std::vector<double> out;
    for (double t : times) out.push_back(f.at(w, t));
    return out;
  };
  return run_samples(disorder(sigma, L, seed), solver, n);
}

void p8() {
  const double x = 400, c = std::cbrt(x);
  std::vector<double> betas, times;
  for (int i = 0; i < 7; ++i) {
    betas.push_back(-1 + 0.5 * i);
    times.push_back(x + betas.back() * c);
  }
  const auto sum = summarize(times, field_samples(0.0, 0.15, 16, 808, 500, 400, times));
  double peak = 0;
  for (double b : betas) peak = std::max(peak, std::fabs(static_cast<double>(airy_ai(-2 * b))) / c);
  bool pass = true;
  std::string d = "beta:mean/theory/tol ";
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const double th = airy_ai(-2 * betas[i]) / c;
    const double tol = std::max(0.1 * peak, 4 * sum.stderr_[i]);
    pass = pass && std::fabs(sum.mean[i] - th) <= tol;
    d += fmt("%g:%.4g/%.4g/%.2g ", betas[i], sum.mean[i], th, tol);
  }
  report("P8", pass, d + "(10% of peak theory amplitude or 4 stderr)");
}

// Least-squares carrier fit a cos(w t) + b sin(w t) over +-2 periods around t0; returns per-sample (a, b).
struct CarrierFit {
  double envelope, stderr_;
};

CarrierFit carrier_envelope(const std::vector<std::vector<double>>& samples, const std::vector<double>& times,
                            double w) {
  // normal equations for the two-column design matrix
  double cc = 0, ss = 0, cs = 0;
  for (double t : times) {
    cc += std::cos(w * t) * std::cos(w * t);
    ss += std::sin(w * t) * std::sin(w * t);
    cs += std::cos(w * t) * std::sin(w * t);
  }
  const double det = cc * ss - cs * cs;
  std::vector<double> a, b;
  for (const auto& s : samples) {
    double yc = 0, ys = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      yc += s[i] * std::cos(w * times[i]);
      ys += s[i] * std::sin(w * times[i]);
    }
    a.push_back((ss * yc - cs * ys) / det);
    b.push_back((cc * ys - cs * yc) / det);
  }
  const double n = static_cast<double>(samples.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double vaa = 0, vbb = 0, vab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    vaa += (a[i] - ma) * (a[i] - ma);
    vbb += (b[i] - mb) * (b[i] - mb);
    vab += (a[i] - ma) * (b[i] - mb);
  }
  vaa /= n - 1;
  vbb /= n - 1;
  vab /= n - 1;
  const double e = std::hypot(ma, mb);
  const double var = (ma * ma * vaa + mb * mb * vbb + 2 * ma * mb * vab) / (e * e * n);
  return {e, std::sqrt(var)};
}

std::vector<double> window(double t0, double w, int points = 96) {
  const double half = 2 * 2 * std::numbers::pi / w;
  std::vector<double> t;
  for (int i = 0; i < points; ++i) t.push_back(t0 - half + 2 * half * i / (points - 1.0));
  return t;
}

void p9() {
  const double x = 500, sigma = 0.15;
  bool pass = true;
  std::string d;
  for (double alpha : {1.5, 2.0}) {
    const double w = stationary_frequencies(alpha, 0.0).plus;
    const auto ts = window(alpha * x, w);
    const double amp = 1.0 / std::sqrt(std::numbers::pi * x * std::sqrt(alpha * alpha - 1));
    std::vector<double> Ls, logs, lvar;
    for (int L : {8, 16, 32}) {
      const auto fit = carrier_envelope(field_samples(0.0, sigma, L, 900 + L, 500, 500, ts), ts, w);
      Ls.push_back(L);
      logs.push_back(std::log(fit.envelope));
      lvar.push_back(std::pow(fit.stderr_ / fit.envelope, 2));
      if (L == 16) {
        const double th = amp * std::exp(-bulk_attenuation_exponent(alpha, sigma, L));
        const double tol = std::max(0.1 * th, 4 * fit.stderr_);
        pass = pass && std::fabs(fit.envelope - th) <= tol;
        d += fmt("alpha=%g L=16 envelope %.4g vs %.4g (tol %.2g); ", alpha, fit.envelope, th, tol);
      }
    }
    const double mL = (Ls[0] + Ls[1] + Ls[2]) / 3, mY = (logs[0] + logs[1] + logs[2]) / 3;
    double sxy = 0, sxx = 0, vs = 0;
    for (int i = 0; i < 3; ++i) {
      sxy += (Ls[i] - mL) * (logs[i] - mY);
      sxx += (Ls[i] - mL) * (Ls[i] - mL);
    }
    for (int i = 0; i < 3; ++i) vs += std::pow(Ls[i] - mL, 2) * lvar[i];
    const double slope = sxy / sxx, th = -sigma * sigma * (alpha * alpha - 1);
    pass = pass && std::fabs(slope - th) <= 0.15 * std::fabs(th);
    d += fmt("slope %.4g +- %.2g vs %.4g (%.1f%% off, tol 15%%); ", slope, std::sqrt(vs) / sxx, th,
             100 * std::fabs(slope / th - 1));
  }
  report("P9", pass, d);
}

void p10() {
  const double ks = 1.1, sigma = 0.15, x = 400;
  const int L = 8;
  const auto fp = front_params(ks);
  const double c = std::cbrt(x);
  std::vector<double> ts;
  for (int i = 0; i < 121; ++i) ts.push_back(fp.alpha_s * x + (-1.0 + 3.0 * i / 120) * c);
  // unperturbed reference from the same synthesis with a clean section
  TransmittedField clean(ks, MassProfile{std::vector<double>(L, 0.0), 0, 0}, 0);
  const auto cw = clean.weights(static_cast<int>(x));
  std::vector<double> u0;
  double norm = 0;
  for (double t : ts) {
    u0.push_back(clean.at(cw, t));
    norm += u0.back() * u0.back();
  }
  const auto samples = field_samples(ks, sigma, L, 1010, 500, static_cast<int>(x), ts);
  std::vector<std::vector<double>> ratio;
  for (const auto& s : samples) {
    double acc = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) acc += s[i] * u0[i];
    ratio.push_back({acc / norm});
  }
  const auto sum = summarize({0.0}, ratio);
  const double th = std::exp(-gamma_iid(fp.omega_s, sigma, ks) * L);
  const double tol = std::max(0.1 * th, 4 * sum.stderr_[0]);
  report("P10", std::fabs(sum.mean[0] - th) <= tol,
         fmt("front amplitude ratio %.4g +- %.2g vs e^{-gamma(w_s) L} = %.4g (tol %.2g)", sum.mean[0], sum.stderr_[0],
             th, tol));
}

void p11() {
  bool pass = true;
  std::string d = "bulk field rel err vs J_2x(2 alpha x):";
  const double x = 2000;
  for (double alpha : {1.5, 2.0, 3.0}) {
    const double exact = bessel_j(static_cast<int>(2 * x), 2 * alpha * x);
    const double rel = std::fabs(unperturbed_bulk(x, alpha, 0.0).value - exact) / std::fabs(exact);
    pass = pass && rel <= 0.02;
    d += fmt(" %.2g", rel);
  }
  d += " (<= 2%); pinned front err/envelope vs simulation:";
  const double ks = 1.1, xs = 600;
  const auto fp = front_params(ks);
  LatticeConfig c;
  c.pinning = ks;
  for (double beta : {0.0, 1.0}) {
    const double t = fp.alpha_s * xs + beta * std::cbrt(xs);
    const auto r = simulate(c, MassProfile{{0.0}, 0, 0}, impulse(0), t, 5e-3, static_cast<int>(t) + 20,
                            {static_cast<int>(xs), static_cast<int>(xs), 1 << 30});
    const double sim = r.values.back()[0];
    const double asy = unperturbed_front(xs, beta, ks);
    const double env = std::cbrt(2.0) / std::cbrt(xs) * std::fabs(static_cast<double>(airy_ai(-std::cbrt(2.0) * beta / fp.alpha_s)));
    const double e = std::fabs(sim - asy) / env;
    pass = pass && e <= 0.1;
    d += fmt(" beta=%g %.3g (pointwise %.3g)", beta, e, std::fabs(sim - asy) / std::fabs(sim));
  }
  report("P11", pass, d + " (<= 10%)");
}

void p12() {
  double worst = 0;
  int n = 0;
  while (n < 20) {
    const double ks = unif(0.05, 1.0);
    const bool upper = n % 2;
    const double w = upper ? std::sqrt(ks + 4) * unif(0.7, 0.95) : std::sqrt(ks) * unif(1.1, 1.5);
    const double d1 = upper ? (ks + 4) / (w * w) - 1 + unif(0.05, 0.5) : ks / (w * w) - 1 - unif(0.02, 0.1);
    if (!(1 + d1 > 0)) continue;
    HarmonicSetup s(w, ks, random_profile(1 + static_cast<int>(unif(0, 40)), 0.1, 0.0, d1));
    if (s.right.propagative()) continue;
    worst = std::max(worst, std::fabs(std::abs(solve(s).R) - 1));
    ++n;
  }
  report("P12", worst <= 1e-12, fmt("20 evanescent instances, max ||R| - 1| = %.2g (<= 1e-12)", worst));
}

void p13() {
  bool pass = true;
  std::string d;
  for (double g : {0.5, 1.0, 2.0}) {
    const double xm = density_xi_max(g);
    const int panels = static_cast<int>(xm);
    const double mass = quad::composite<20>([&](double xi) { return density_xi(xi, 1.0, g); }, 0, xm, panels);
    const double mean = quad::composite<20>(
        [&](double xi) { return 2 / (1 + std::cosh(xi)) * density_xi(xi, 1.0, g); }, 0, xm, panels);
    const double dm = std::fabs(mass - 1), d1 = std::fabs(mean - moment_matched(1, g));
    pass = pass && dm <= 1e-5 && d1 <= 1e-5;
    d += fmt("gL=%g |mass-1| %.2g |mean-M1| %.2g; ", g, dm, d1);
  }
  report("P13", pass, d + "(<= 1e-5)");
}

void p14() {
  double leg = 0;
  for (double s = 0; s <= 10.0001; s += 0.25) leg = std::max(leg, std::fabs(legendre_conical(s, 1.0) - 1));
  double airy = 0;
  const double h = 1e-3;
  for (double x = -5; x <= 5.0001; x += 0.05) {
    const double d2 = (airy_ai(x + h) - 2 * airy_ai(x) + airy_ai(x - h)) / (h * h);
    airy = std::max(airy, std::fabs(d2 - x * airy_ai(x)));
  }
  double rec = 0;
  for (double x : {0.5, 3.0, 11.0, 12.5, 40.0, 80.0})
    for (int n = 1; n < 60; ++n)
      rec = std::max(rec, std::fabs(bessel_j(n - 1, x) + bessel_j(n + 1, x) - 2 * n / x * bessel_j(n, x)));
  report("P14", leg <= 1e-8 && airy <= 1e-5 && rec <= 1e-9,
         fmt("conical P(eta=1) dev %.2g (<= 1e-8); Airy residual %.2g (<= 1e-5); Bessel recurrence %.2g (<= 1e-9)", leg,
             airy, rec));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> all{
      {"P1", p1}, {"P2", p2}, {"P3", p3}, {"P4", p4},   {"P5", p5},   {"P6", p6},   {"P7", p7},
      {"P8", p8}, {"P9", p9}, {"P10", p10}, {"P11", p11}, {"P12", p12}, {"P13", p13}, {"P14", p14}};
  for (const auto& [id, f] : all) {
    try {
      f();
    } catch (const std::exception& e) {
      report(id, false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, all.size());
  return failures == 0 ? 0 : 1;
}
