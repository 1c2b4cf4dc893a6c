#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "randlat/csv.hpp"
#include "randlat/error.hpp"
#include "randlat/lattice.hpp"
#include "randlat/transmission.hpp"

namespace randlat {

enum class Distribution { uniform, two_point, truncated_gaussian };

inline const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::uniform: return "uniform";
    case Distribution::two_point: return "two_point";
    case Distribution::truncated_gaussian: return "truncated_gaussian";
  }
  return "?";
}

namespace detail {

inline constexpr double gauss_cut = 3.0;  // truncated gaussian lives on [-3 s, 3 s]

// variance of a unit normal conditioned on |z| < c
inline double truncated_normal_variance(double c) {
  const double phi = std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi);
  return 1.0 - 2.0 * c * phi / std::erf(c / std::numbers::sqrt2);
}

// largest |xi| for a unit-variance draw of each law
inline double unit_bound(Distribution d) {
  switch (d) {
    case Distribution::uniform: return std::sqrt(3.0);
    case Distribution::two_point: return 1.0;
    case Distribution::truncated_gaussian: return gauss_cut / std::sqrt(truncated_normal_variance(gauss_cut));
  }
  return 0.0;
}

// Moving-average weights h with sum h_j h_{j+m} = Gamma(m) and sum h^2 = 1.
inline std::vector<double> ma_weights(const CorrelationModel& m) {
  if (std::holds_alternative<Uncorrelated>(m)) return {1.0};
  if (auto g = std::get_if<GeometricCorrelation>(&m)) {
    // AR(1) written as a one-sided filter, cut once |rho|^j < 1e-8
    std::vector<double> h;
    double p = 1.0;
    while (std::fabs(p) >= 1e-8 || h.empty()) {
      h.push_back(p);
      p *= g->rho;
    }
    double s = 0.0;
    for (double v : h) s += v * v;
    for (double& v : h) v /= std::sqrt(s);
    return h;
  }
  // tabulated: symmetric square root of the spectral density
  const auto& t = std::get<TabulatedCorrelation>(m);
  const int n = 8192;
  std::vector<double> root(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double s = spectral_density(m, std::numbers::pi * i / n);
    if (s < -1e-12) throw DomainError("tabulated correlation has a negative spectral density");
    root[i] = std::sqrt(std::max(s, 0.0));
  }
  auto coef = [&](int j) {
    // (1/pi) int_0^pi sqrt(S) cos(jk) dk, trapezoid (spectrally accurate for smooth periodic S)
    double acc = 0.5 * (root[0] + root[n] * std::cos(std::numbers::pi * j));
    for (int i = 1; i < n; ++i) acc += root[i] * std::cos(std::numbers::pi * j * static_cast<double>(i) / n);
    return acc / n;
  };
  std::vector<double> half{coef(0)};
  const int min_len = static_cast<int>(t.gamma.size());
  for (int j = 1; j < n / 2; ++j) {
    const double c = coef(j);
    if (j >= min_len && std::fabs(c) < 1e-10 * half[0]) break;
    half.push_back(c);
  }
  std::vector<double> h(half.rbegin(), half.rend());
  h.insert(h.end(), half.begin() + 1, half.end());
  double s = 0.0;
  for (double v : h) s += v * v;
  for (double& v : h) v /= std::sqrt(s);
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

struct DisorderSpec {
  double sigma = 0.0;
  Distribution distribution = Distribution::uniform;
  CorrelationModel correlation = Uncorrelated{};
  int length = 1;
  std::uint64_t master_seed = 0;
  double left_offset = 0.0;
  double right_offset = 0.0;

  // largest |Delta| any draw can reach
  double max_abs_delta() const {
    double l1 = 0.0;
    for (double v : detail::ma_weights(correlation)) l1 += std::fabs(v);
    return sigma * detail::unit_bound(distribution) * l1;
  }

  void validate() const {
    if (!(sigma >= 0.0)) throw DomainError("disorder sigma must be >= 0");
    if (length < 1) throw DomainError("disorder length must be >= 1");
    randlat::validate(correlation);
    if (!(1.0 + left_offset > 0.0) || !(1.0 + right_offset > 0.0))
      throw DomainError("half-space masses must be positive");
    if (!(max_abs_delta() < 1.0))
      throw DomainError(std::string("sigma too large for ") + to_string(distribution) +
                        " disorder: masses 1+Delta could reach zero");
  }
};

// Per-realization generator: (master_seed, index) -> independent stream.
inline std::mt19937_64 realization_rng(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t s = master_seed;
  const std::uint64_t a = detail::splitmix64(s);
  std::uint64_t t = a ^ index;
  const std::uint64_t b = detail::splitmix64(t);
  const std::uint64_t c = detail::splitmix64(t);
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

namespace detail {

// unit-variance draw
inline double unit_draw(Distribution d, std::mt19937_64& g) {
  switch (d) {
    case Distribution::uniform: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      return std::sqrt(3.0) * u(g);
    }
    case Distribution::two_point: return (g() >> 63) ? 1.0 : -1.0;
    case Distribution::truncated_gaussian: {
      std::normal_distribution<double> n(0.0, 1.0);
      double z;
      do z = n(g);
      while (std::fabs(z) >= gauss_cut);
      return z / std::sqrt(truncated_normal_variance(gauss_cut));
    }
  }
  return 0.0;
}

}  // namespace detail

inline MassProfile draw_profile(const DisorderSpec& spec, long index) {
  if (index < 0) throw DomainError("realization index must be >= 0");
  MassProfile p;
  p.left_offset = spec.left_offset;
  p.right_offset = spec.right_offset;
  p.deltas.assign(spec.length, 0.0);
  if (spec.sigma == 0.0) return p;
  auto g = realization_rng(spec.master_seed, static_cast<std::uint64_t>(index));
  const auto h = detail::ma_weights(spec.correlation);
  std::vector<double> xi(spec.length + h.size() - 1);
  for (double& v : xi) v = detail::unit_draw(spec.distribution, g);
  for (int x = 0; x < spec.length; ++x) {
    double s = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) s += h[j] * xi[x + j];
    p.deltas[x] = spec.sigma * s;
  }
  return p;
}

struct EnsembleSummary {
  long n_real = 0;
  std::vector<double> coord, mean, std, stderr_;

  // coord,mean,std,stderr,n
  void write_csv(std::ostream& os) const {
    os << "coord,mean,std,stderr,n\n";
    for (std::size_t i = 0; i < coord.size(); ++i)
      csv::write_row(os, {csv::num(coord[i]), csv::num(mean[i]), csv::num(std[i]), csv::num(stderr_[i]),
                          csv::num(static_cast<long long>(n_real))});
  }
};

// samples[r][i]: realization r at point i; reduced in index order.
inline EnsembleSummary summarize(const std::vector<double>& coord, const std::vector<std::vector<double>>& samples) {
  if (samples.size() < 2) throw DomainError("a summary needs at least two realizations");
  EnsembleSummary s;
  s.n_real = static_cast<long>(samples.size());
  s.coord = coord;
  const std::size_t m = coord.size();
  s.mean.assign(m, 0.0);
  s.std.assign(m, 0.0);
  s.stderr_.assign(m, 0.0);
  for (const auto& r : samples) {
    if (r.size() != m) throw DomainError("realization returned the wrong number of points");
    for (std::size_t i = 0; i < m; ++i) s.mean[i] += r[i];
  }
  const double n = static_cast<double>(samples.size());
  for (double& v : s.mean) v /= n;
  for (const auto& r : samples)
    for (std::size_t i = 0; i < m; ++i) s.std[i] += (r[i] - s.mean[i]) * (r[i] - s.mean[i]);
  for (std::size_t i = 0; i < m; ++i) {
    s.std[i] = std::sqrt(s.std[i] / (n - 1.0));
    s.stderr_[i] = s.std[i] / std::sqrt(n);
  }
  return s;
}

using RealizationSolver = std::function<std::vector<double>(const MassProfile&, long index)>;

inline unsigned default_threads() {
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1u : h;
}

// Runs the solver on realizations 0..n_real-1; results stored by index so the
// outcome does not depend on scheduling. The first failing index (lowest) is reported.
inline std::vector<std::vector<double>> run_samples(const DisorderSpec& spec, const RealizationSolver& solver,
                                                    long n_real, unsigned threads = 0) {
  spec.validate();
  if (n_real < 1) throw DomainError("n_real must be >= 1");
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<long>(threads, n_real));
  std::vector<std::vector<double>> out(n_real);
  std::atomic<long> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  long bad = -1;
  std::string bad_what;
  auto work = [&] {
    for (;;) {
      // a claimed index is always run, so every index below a failure gets evaluated
      if (stop.load()) return;
      const long i = next.fetch_add(1);
      if (i >= n_real) return;
      try {
        out[i] = solver(draw_profile(spec, i), i);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(mu);
        if (bad < 0 || i < bad) {
          bad = i;
          bad_what = e.what();
        }
        stop = true;
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (bad >= 0) throw CampaignError(bad, "realization " + std::to_string(bad) + ": " + bad_what);
  return out;
}

inline EnsembleSummary run_campaign(const DisorderSpec& spec, const RealizationSolver& solver, long n_real,
                                    const std::vector<double>& coord, unsigned threads = 0) {
  if (n_real < 2) throw DomainError("n_real must be >= 2");
  return summarize(coord, run_samples(spec, solver, n_real, threads));
}

}  // namespace randlat
