#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "randlat/csv.hpp"
#include "randlat/error.hpp"
#include "randlat/lattice.hpp"
#include "randlat/scattering.hpp"

namespace randlat {

struct InitialCondition {
  int source_site = 0;
  std::vector<std::pair<int, double>> displacements;
  std::vector<std::pair<int, double>> velocities;
};

inline InitialCondition impulse(int x0) { return {x0, {{x0, 1.0}}, {}}; }

struct RecordSpec {
  int first_site;
  int last_site;
  int stride = 1;  // record every stride-th step
  bool energy = false;
};

struct TrajectoryRecord {
  int first_site = 0;
  int last_site = -1;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[time][site - first_site]
  std::vector<double> energy;               // discrete energy at recorded times, if requested

  int sites() const { return last_site - first_site + 1; }
  double at(std::size_t ti, int site) const { return values.at(ti).at(site - first_site); }

  void write_csv(std::ostream& os) const {
    std::vector<std::string> row{"t"};
    for (int x = first_site; x <= last_site; ++x) row.push_back("site_" + std::to_string(x));
    csv::write_row(os, row);
    for (std::size_t i = 0; i < times.size(); ++i) {
      row.assign(1, csv::num(times[i]));
      for (double v : values[i]) row.push_back(csv::num(v));
      csv::write_row(os, row);
    }
  }
};

// Velocity-Verlet integration of (1+Delta_x) u'' = u_{x+1} + u_{x-1} - (2+Ks) u_x
// on sites [-radius, radius] with zero boundary values outside. The section
// occupies sites 1..L; sites <= 0 and > L carry the half-space offsets.
inline TrajectoryRecord simulate(const LatticeConfig& config, const MassProfile& profile,
                                 const InitialCondition& init, double t_max, double dt, int radius,
                                 const RecordSpec& rec) {
  config.validate();
  profile.validate();
  if (!(dt > 0.0 && dt <= 0.1)) throw DomainError("simulate: dt must be in (0, 0.1]");
  if (!(t_max >= 0.0)) throw DomainError("simulate: t_max must be >= 0");
  const int n = profile.length();
  const int need = std::abs(init.source_site) + static_cast<int>(std::ceil(t_max)) + 10;
  if (radius < need || radius < n + 1) {
    std::ostringstream os;
    os << "radius " << radius << " below causal bound " << std::max(need, n + 1);
    throw CausalityError(os.str());
  }
  if (rec.first_site < -radius || rec.last_site > radius || rec.first_site > rec.last_site || rec.stride < 1)
    throw DomainError("simulate: record window outside the domain");

  const int m = 2 * radius + 1;
  auto idx = [radius](int x) { return x + radius; };
  std::vector<double> inv_mass(m), mass(m), u(m, 0.0), v(m, 0.0), a(m, 0.0);
  for (int x = -radius; x <= radius; ++x) {
    double d = x <= 0 ? profile.left_offset : (x > n ? profile.right_offset : profile.deltas[x - 1]);
    mass[idx(x)] = 1.0 + d;
    inv_mass[idx(x)] = 1.0 / (1.0 + d);
  }
  for (const auto& [x, val] : init.displacements) {
    if (std::abs(x) > radius) throw CausalityError("initial displacement outside the domain");
    u[idx(x)] += val;
  }
  for (const auto& [x, val] : init.velocities) {
    if (std::abs(x) > radius) throw CausalityError("initial velocity outside the domain");
    v[idx(x)] += val;
  }
  const double c = 2.0 + config.pinning;
  auto accel = [&] {
    for (int i = 0; i < m; ++i) {
      const double l = i > 0 ? u[i - 1] : 0.0;
      const double r = i + 1 < m ? u[i + 1] : 0.0;
      a[i] = (l + r - c * u[i]) * inv_mass[i];
    }
  };
  auto energy = [&] {
    double e = 0.0;
    for (int i = 0; i < m; ++i) {
      e += 0.5 * mass[i] * v[i] * v[i] + 0.5 * config.pinning * u[i] * u[i];
      const double r = i + 1 < m ? u[i + 1] : 0.0;
      e += 0.5 * (r - u[i]) * (r - u[i]);
    }
    // spring to the fixed left wall
    e += 0.5 * u[0] * u[0];
    return e;
  };

  const long steps = std::max(1L, static_cast<long>(std::ceil(t_max / dt - 1e-9)));
  const double h = t_max > 0.0 ? t_max / steps : dt;
  TrajectoryRecord out;
  out.first_site = rec.first_site;
  out.last_site = rec.last_site;
  out.dt = h;
  auto record = [&](double t) {
    out.times.push_back(t);
    out.values.emplace_back(u.begin() + idx(rec.first_site), u.begin() + idx(rec.last_site) + 1);
    if (rec.energy) out.energy.push_back(energy());
  };
  record(0.0);
  if (t_max == 0.0) return out;
  accel();
  for (long s = 1; s <= steps; ++s) {
    for (int i = 0; i < m; ++i) {
      v[i] += 0.5 * h * a[i];
      u[i] += h * v[i];
    }
    accel();
    for (int i = 0; i < m; ++i) v[i] += 0.5 * h * a[i];
    if (s % rec.stride == 0 || s == steps) record(s * h);
  }
  return out;
}

// Exact field at x > L for an impulse at x0 <= 0 and matched half-spaces:
//   u_x(t) = (1/pi) int_0^pi Re[T(w(k)) e^{ik(x-x0)}] cos(w(k) t) dk
// evaluated with the N-point midpoint rule (the integrand is smooth and
// 2 pi periodic once extended evenly). Bound states of the section are ignored.
class TransmittedField {
public:
  TransmittedField(double ks, MassProfile profile, int x0, int nodes = 8192)
      : ks_(ks), x0_(x0), n_(profile.length()) {
    profile.validate();
    if (profile.left_offset != 0.0 || profile.right_offset != 0.0)
      throw DomainError("TransmittedField needs matched half-spaces");
    if (x0 > 0) throw DomainError("TransmittedField needs the source at x0 <= 0");
    k_.resize(nodes);
    w_.resize(nodes);
    t_.resize(nodes);
    for (int j = 0; j < nodes; ++j) {
      const double k = std::numbers::pi * (j + 0.5) / nodes;
      const double w = std::sqrt(ks + 2.0 - 2.0 * std::cos(k));
      k_[j] = k;
      w_[j] = w;
      bool clean = std::all_of(profile.deltas.begin(), profile.deltas.end(), [](double d) { return d == 0.0; });
      t_[j] = clean ? cplx(1.0, 0.0) : solve_matched_recursion(HarmonicSetup(w, ks, profile)).T;
    }
  }

  // phases Re/Im of T e^{ik(x-x0)} for one site, reusable across times
  struct SiteWeights {
    int x;
    std::vector<double> re;
  };

  SiteWeights weights(int x) const {
    if (x <= n_) throw DomainError("TransmittedField: x must lie beyond the section");
    SiteWeights s{x, std::vector<double>(k_.size())};
    for (std::size_t j = 0; j < k_.size(); ++j)
      s.re[j] = std::real(t_[j] * std::polar(1.0, k_[j] * (x - x0_)));
    return s;
  }

  double at(const SiteWeights& s, double t) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < k_.size(); ++j) acc += s.re[j] * std::cos(w_[j] * t);
    return acc / static_cast<double>(k_.size());
  }

  double at(int x, double t) const { return at(weights(x), t); }

  double pinning() const { return ks_; }

private:
  double ks_;
  int x0_;
  int n_;
  std::vector<double> k_, w_;
  std::vector<cplx> t_;
};

}  // namespace randlat
