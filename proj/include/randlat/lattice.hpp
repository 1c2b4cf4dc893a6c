#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "randlat/error.hpp"

namespace randlat {

struct LatticeConfig {
  double pinning = 0.0;       // Ks
  int section_length = 1;     // L
  double disorder_sigma = 0.0;
  double left_offset = 0.0;   // mass offset of the left half-space
  double right_offset = 0.0;  // mass offset of the right half-space

  void validate() const {
    if (!(pinning >= 0.0)) throw DomainError("pinning must be >= 0");
    if (section_length < 1) throw DomainError("section_length must be >= 1");
    if (!(disorder_sigma >= 0.0)) throw DomainError("disorder_sigma must be >= 0");
    if (!(1.0 + left_offset > 0.0)) throw DomainError("left_offset must be > -1");
    if (!(1.0 + right_offset > 0.0)) throw DomainError("right_offset must be > -1");
  }
  bool matched() const { return left_offset == 0.0 && right_offset == 0.0; }
};

// Realized perturbation Delta_1..Delta_L plus the half-space offsets.
struct MassProfile {
  std::vector<double> deltas;
  double left_offset = 0.0;
  double right_offset = 0.0;

  int length() const { return static_cast<int>(deltas.size()); }
  void validate() const {
    if (deltas.empty()) throw DomainError("mass profile is empty");
    for (std::size_t i = 0; i < deltas.size(); ++i)
      if (!(1.0 + deltas[i] > 0.0)) {
        std::ostringstream os;
        os << "nonpositive mass at site " << i + 1;
        throw DomainError(os.str());
      }
    if (!(1.0 + left_offset > 0.0) || !(1.0 + right_offset > 0.0))
      throw DomainError("nonpositive half-space mass");
  }
};

struct Band {
  double lower;
  double upper;
  bool contains(double w) const { return w > lower && w < upper; }
};

// Open band of a region of mass 1+offset.
inline Band propagative_band(double ks, double offset = 0.0) {
  return {std::sqrt(ks / (1.0 + offset)), std::sqrt((ks + 4.0) / (1.0 + offset))};
}

struct DispersionPoint {
  double omega;
  double k;
  double dk;   // k'
  double d2k;  // k''
  double d3k;  // k'''
};

struct FrontParams {
  double omega_s;
  double alpha_s;
};

struct SpectralAmplitude {
  double value;
  bool divergent;
};

struct StationaryFrequencies {
  std::optional<double> minus;  // absent when Ks = 0
  double plus;
};

namespace detail {

inline void check_band(double omega, double ks) {
  const Band b = propagative_band(ks);
  if (omega <= b.lower) {
    std::ostringstream os;
    os << "omega=" << omega << " at or below lower band edge " << b.lower;
    throw BandError(BandEdge::lower, omega, os.str());
  }
  if (omega >= b.upper) {
    std::ostringstream os;
    os << "omega=" << omega << " at or above upper band edge " << b.upper;
    throw BandError(BandEdge::upper, omega, os.str());
  }
}

}  // namespace detail

// k(omega) in (0, pi) for a region with unit mass.
inline double wavenumber(double omega, double ks) {
  detail::check_band(omega, ks);
  const double a = omega * omega - ks;
  return 2.0 * std::asin(std::sqrt(a) / 2.0);
}

inline DispersionPoint dispersion(double omega, double ks) {
  detail::check_band(omega, ks);
  const double a = omega * omega - ks;
  const double b = 4.0 + ks - omega * omega;
  const double ab = a * b;
  const double sab = std::sqrt(ab);
  const double ws4 = 4.0 * ks + ks * ks;
  const double n4 = omega * omega * omega * omega - ws4;
  DispersionPoint p{};
  p.omega = omega;
  p.k = 2.0 * std::asin(std::sqrt(a) / 2.0);
  p.dk = 2.0 * omega / sab;
  p.d2k = 2.0 * n4 / (ab * sab);
  p.d3k = (8.0 * omega * omega * omega * ab - 6.0 * omega * n4 * (b - a)) / (ab * ab * sab);
  return p;
}

// c-hat(omega) = 2|w| / (sqrt(w^2-Ks) sqrt(4+Ks-w^2)), zero outside the band.
inline SpectralAmplitude spectral_amplitude(double omega, double ks) {
  const double w = std::fabs(omega);
  const double inf = std::numeric_limits<double>::infinity();
  if (ks == 0.0) {
    if (w < 2.0) return {2.0 / std::sqrt(4.0 - w * w), false};
    if (w == 2.0) return {inf, true};
    return {0.0, false};
  }
  const Band b = propagative_band(ks);
  if (w == b.lower || w == b.upper) return {inf, true};
  if (!b.contains(w)) return {0.0, false};
  return {2.0 * w / (std::sqrt(w * w - ks) * std::sqrt(4.0 + ks - w * w)), false};
}

inline FrontParams front_params(double ks) {
  if (!(ks >= 0.0)) throw DomainError("pinning must be >= 0");
  if (ks == 0.0) return {0.0, 1.0};
  const double ws2 = std::sqrt(4.0 * ks + ks * ks);
  return {std::sqrt(ws2), std::sqrt(2.0) / std::sqrt(2.0 + ks - ws2)};
}

inline StationaryFrequencies stationary_frequencies(double alpha, double ks) {
  const FrontParams fp = front_params(ks);
  if (!(alpha > fp.alpha_s)) {
    std::ostringstream os;
    os << "alpha=" << alpha << " does not exceed alpha_s=" << fp.alpha_s;
    throw NoStationaryPoint(os.str());
  }
  const double a2 = alpha * alpha;
  if (ks == 0.0) return {std::nullopt, 2.0 * std::sqrt(a2 - 1.0) / alpha};
  const double disc = std::fmax(a2 * a2 - (2.0 + ks) * a2 + 1.0, 0.0);
  const double wp2 = (2.0 / a2) * ((1.0 + ks / 2.0) * a2 - 1.0 + std::sqrt(disc));
  // product of the two roots is omega_s^4; avoids cancellation in the minus root
  const double wm2 = (4.0 * ks + ks * ks) / wp2;
  return {std::sqrt(wm2), std::sqrt(wp2)};
}

}  // namespace randlat
