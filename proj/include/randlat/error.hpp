#pragma once

#include <stdexcept>
#include <string>

namespace randlat {

enum class BandEdge { lower, upper };

// Frequency outside the open propagative band.
class BandError : public std::domain_error {
public:
  BandError(BandEdge edge, double omega, const std::string& what)
      : std::domain_error(what), edge_(edge), omega_(omega) {}
  BandEdge edge() const noexcept { return edge_; }
  double omega() const noexcept { return omega_; }

private:
  BandEdge edge_;
  double omega_;
};

class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class NoStationaryPoint : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class CausalityError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class SolverSingular : public std::runtime_error {
public:
  SolverSingular(double cond, const std::string& what)
      : std::runtime_error(what), cond_(cond) {}
  // crude estimate: ratio of largest to smallest pivot magnitude
  double condition() const noexcept { return cond_; }

private:
  double cond_;
};

// Two independent computations of the same quantity disagreed.
class ConsistencyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Thrown by run_campaign; carries the realization that failed.
class CampaignError : public std::runtime_error {
public:
  CampaignError(long index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  long index() const noexcept { return index_; }

private:
  long index_;
};

}  // namespace randlat
