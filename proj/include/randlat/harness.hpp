#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "randlat/asymptotics.hpp"
#include "randlat/csv.hpp"
#include "randlat/ensemble.hpp"
#include "randlat/scattering.hpp"
#include "randlat/timedomain.hpp"
#include "randlat/transmission.hpp"

namespace randlat::harness {

using json = nlohmann::json;

inline constexpr const char* version = "0.1.0";
inline constexpr const char* output_env = "RANDLAT_OUTPUT_DIR";

// Config does not match the schema; path names the offending field.
class SchemaError : public std::runtime_error {
public:
  SchemaError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

inline const std::vector<std::string>& scenarios() {
  static const std::vector<std::string> s{"td-trajectories", "td-mean-field", "td-mean-front", "fd-transmittance",
                                          "fd-moments",      "fd-nonmatched", "density"};
  return s;
}

struct TimeDomainParams {
  int source_site = 0;
  double t_max = 100.0;
  double dt = 0.01;
  int first_site = -20;
  int last_site = 100;
  int stride = 10;
  int field_nodes = 8192;
};

struct RunConfig {
  std::string scenario;
  LatticeConfig lattice;
  Distribution distribution = Distribution::uniform;
  CorrelationModel correlation = Uncorrelated{};
  std::uint64_t master_seed = 1;
  long n_real = 0;
  unsigned threads = 0;
  std::map<std::string, std::vector<double>> grids;  // resolved, strictly increasing
  TimeDomainParams td;
  std::string output;

  DisorderSpec disorder() const {
    DisorderSpec d;
    d.sigma = lattice.disorder_sigma;
    d.distribution = distribution;
    d.correlation = correlation;
    d.length = lattice.section_length;
    d.master_seed = master_seed;
    d.left_offset = lattice.left_offset;
    d.right_offset = lattice.right_offset;
    return d;
  }
  const std::vector<double>& grid(const std::string& name) const { return grids.at(name); }
};

namespace detail {

inline const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw SchemaError(path + "." + key, "required field missing");
  return j.at(key);
}

inline double as_real(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "expected a finite number");
  return v;
}

inline long long as_int(const json& j, const std::string& path) {
  if (j.is_number_integer() || j.is_number_unsigned()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v == std::floor(v) && std::fabs(v) < 9e15) return static_cast<long long>(v);
  }
  throw SchemaError(path, "expected an integer");
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

inline void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw SchemaError(path + "." + it.key(), "unknown field");
  }
}

inline Band common_band(const LatticeConfig& c) {
  const Band a = propagative_band(c.pinning), b = propagative_band(c.pinning, c.left_offset),
             r = propagative_band(c.pinning, c.right_offset);
  return {std::max({a.lower, b.lower, r.lower}), std::min({a.upper, b.upper, r.upper})};
}

// array | {start, stop, count} | {band_fraction: [a, b], count} (omega only)
inline std::vector<double> parse_grid(const json& j, const std::string& path, const LatticeConfig& lat,
                                      bool allow_band) {
  std::vector<double> v;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_real(j[i], path + "[" + std::to_string(i) + "]"));
  } else if (j.is_object() && j.contains("band_fraction")) {
    if (!allow_band) throw SchemaError(path + ".band_fraction", "only the omega grid accepts band_fraction");
    only_keys(j, path, {"band_fraction", "count"});
    const auto& f = j.at("band_fraction");
    if (!f.is_array() || f.size() != 2) throw SchemaError(path + ".band_fraction", "expected [lo, hi]");
    const double a = as_real(f[0], path + ".band_fraction[0]"), b = as_real(f[1], path + ".band_fraction[1]");
    if (!(0.0 < a && a < b && b < 1.0)) throw SchemaError(path + ".band_fraction", "need 0 < lo < hi < 1");
    const long long n = as_int(need(j, "count", path), path + ".count");
    if (n < 1) throw SchemaError(path + ".count", "must be >= 1");
    const Band band = common_band(lat);
    if (!(band.lower < band.upper)) throw SchemaError(path, "the half-space bands do not overlap");
    for (long long i = 0; i < n; ++i) {
      const double f0 = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
      v.push_back(band.lower + f0 * (band.upper - band.lower));
    }
  } else if (j.is_object()) {
    only_keys(j, path, {"start", "stop", "count"});
    const double a = as_real(need(j, "start", path), path + ".start");
    const double b = as_real(need(j, "stop", path), path + ".stop");
    const long long n = as_int(need(j, "count", path), path + ".count");
    if (n < 1) throw SchemaError(path + ".count", "must be >= 1");
    if (n == 1 && a != b) throw SchemaError(path, "count 1 needs start == stop");
    for (long long i = 0; i < n; ++i)
      v.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  } else {
    throw SchemaError(path, "expected an array or a range object");
  }
  if (v.empty()) throw SchemaError(path, "grid is empty");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw SchemaError(path, "grid must be strictly increasing");
  return v;
}

inline CorrelationModel parse_correlation(const json& j, const std::string& path) {
  const std::string model = as_string(need(j, "model", path), path + ".model");
  if (model == "none") {
    only_keys(j, path, {"model"});
    return Uncorrelated{};
  }
  if (model == "geometric") {
    only_keys(j, path, {"model", "rho"});
    return GeometricCorrelation{as_real(need(j, "rho", path), path + ".rho")};
  }
  if (model == "tabulated") {
    only_keys(j, path, {"model", "gamma"});
    const auto& g = need(j, "gamma", path);
    if (!g.is_array()) throw SchemaError(path + ".gamma", "expected an array");
    TabulatedCorrelation t;
    for (std::size_t i = 0; i < g.size(); ++i) t.gamma.push_back(as_real(g[i], path + ".gamma[" + std::to_string(i) + "]"));
    return t;
  }
  throw SchemaError(path + ".model", "expected none, geometric or tabulated");
}

inline json correlation_json(const CorrelationModel& m) {
  if (auto g = std::get_if<GeometricCorrelation>(&m)) return {{"model", "geometric"}, {"rho", g->rho}};
  if (auto t = std::get_if<TabulatedCorrelation>(&m)) return {{"model", "tabulated"}, {"gamma", t->gamma}};
  return {{"model", "none"}};
}

template <class F>
void domain_check(const std::string& path, F&& f) {
  try {
    f();
  } catch (const DomainError& e) {
    throw SchemaError(path, e.what());
  } catch (const BandError& e) {
    throw SchemaError(path, e.what());
  } catch (const NoStationaryPoint& e) {
    throw SchemaError(path, e.what());
  }
}

inline bool is_int(double v) { return v == std::floor(v) && std::fabs(v) < 1e9; }

}  // namespace detail

// Parse and check every precondition before any compute.
inline RunConfig parse_config(const json& j) {
  using namespace detail;
  only_keys(j, "$", {"scenario", "lattice", "disorder", "n_real", "threads", "grids", "timedomain", "output"});
  RunConfig c;
  c.scenario = as_string(need(j, "scenario", "$"), "$.scenario");
  if (std::find(scenarios().begin(), scenarios().end(), c.scenario) == scenarios().end())
    throw SchemaError("$.scenario", "unknown scenario '" + c.scenario + "'");

  const auto& lat = need(j, "lattice", "$");
  only_keys(lat, "$.lattice", {"pinning", "section_length", "disorder_sigma", "left_offset", "right_offset"});
  c.lattice.pinning = lat.contains("pinning") ? as_real(lat["pinning"], "$.lattice.pinning") : 0.0;
  const long long len = as_int(need(lat, "section_length", "$.lattice"), "$.lattice.section_length");
  if (len < 1 || len > 100000) throw SchemaError("$.lattice.section_length", "must be in 1..100000");
  c.lattice.section_length = static_cast<int>(len);
  c.lattice.disorder_sigma =
      lat.contains("disorder_sigma") ? as_real(lat["disorder_sigma"], "$.lattice.disorder_sigma") : 0.0;
  c.lattice.left_offset = lat.contains("left_offset") ? as_real(lat["left_offset"], "$.lattice.left_offset") : 0.0;
  c.lattice.right_offset = lat.contains("right_offset") ? as_real(lat["right_offset"], "$.lattice.right_offset") : 0.0;
  domain_check("$.lattice", [&] { c.lattice.validate(); });

  if (j.contains("disorder")) {
    const auto& d = j["disorder"];
    only_keys(d, "$.disorder", {"distribution", "correlation", "master_seed"});
    if (d.contains("distribution")) {
      const std::string s = as_string(d["distribution"], "$.disorder.distribution");
      if (s == "uniform") c.distribution = Distribution::uniform;
      else if (s == "two_point") c.distribution = Distribution::two_point;
      else if (s == "truncated_gaussian") c.distribution = Distribution::truncated_gaussian;
      else throw SchemaError("$.disorder.distribution", "expected uniform, two_point or truncated_gaussian");
    }
    if (d.contains("correlation")) c.correlation = parse_correlation(d["correlation"], "$.disorder.correlation");
    if (d.contains("master_seed")) {
      const auto& s = d["master_seed"];
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
        throw SchemaError("$.disorder.master_seed", "expected a nonnegative 64-bit integer");
      c.master_seed = s.get<std::uint64_t>();
    }
  }
  domain_check("$.disorder", [&] { c.disorder().validate(); });

  const bool td = c.scenario.rfind("td-", 0) == 0;
  const bool theory_only_ok = c.scenario == "fd-moments" || c.scenario == "fd-nonmatched" || c.scenario == "density";
  c.n_real = j.contains("n_real") ? as_int(j["n_real"], "$.n_real") : 0;
  if (c.scenario == "td-trajectories" || c.scenario == "fd-transmittance") {
    if (c.n_real < 1) throw SchemaError("$.n_real", "must be >= 1");
  } else if (c.scenario == "density") {
    if (c.n_real != 0) throw SchemaError("$.n_real", "the density scenario takes no realizations");
  } else if (!(c.n_real >= 2 || (theory_only_ok && c.n_real == 0))) {
    throw SchemaError("$.n_real", theory_only_ok ? "must be 0 (theory only) or >= 2" : "must be >= 2");
  }
  if (j.contains("threads")) {
    const long long t = as_int(j["threads"], "$.threads");
    if (t < 0 || t > 1024) throw SchemaError("$.threads", "must be in 0..1024");
    c.threads = static_cast<unsigned>(t);
  }

  std::vector<std::string> wanted;
  if (c.scenario == "td-mean-field") wanted = {"x", "alpha"};
  if (c.scenario == "td-mean-front") wanted = {"x", "beta"};
  if (c.scenario.rfind("fd-", 0) == 0) wanted = {"omega"};
  if (c.scenario == "density") wanted = {"tau", "gamma_l"};
  const json grids = j.contains("grids") ? j["grids"] : json::object();
  only_keys(grids, "$.grids", {"omega", "x", "alpha", "beta", "tau", "gamma_l"});
  for (auto it = grids.begin(); it != grids.end(); ++it)
    c.grids[it.key()] = parse_grid(it.value(), "$.grids." + it.key(), c.lattice, it.key() == "omega");
  for (const auto& w : wanted)
    if (!c.grids.count(w)) throw SchemaError("$.grids." + w, "required for scenario " + c.scenario);

  if (j.contains("timedomain")) {
    const auto& t = j["timedomain"];
    only_keys(t, "$.timedomain", {"source_site", "t_max", "dt", "first_site", "last_site", "stride", "field_nodes"});
    auto geti = [&](const char* k, int& dst) {
      if (t.contains(k)) {
        const long long v = as_int(t[k], std::string("$.timedomain.") + k);
        if (std::llabs(v) > 10000000) throw SchemaError(std::string("$.timedomain.") + k, "out of range");
        dst = static_cast<int>(v);
      }
    };
    geti("source_site", c.td.source_site);
    geti("first_site", c.td.first_site);
    geti("last_site", c.td.last_site);
    geti("stride", c.td.stride);
    geti("field_nodes", c.td.field_nodes);
    if (t.contains("t_max")) c.td.t_max = as_real(t["t_max"], "$.timedomain.t_max");
    if (t.contains("dt")) c.td.dt = as_real(t["dt"], "$.timedomain.dt");
  }
  if (td) {
    const auto& p = c.td;
    if (!c.lattice.matched()) throw SchemaError("$.lattice", "time-domain scenarios need matched half-spaces");
    if (c.scenario == "td-trajectories") {
      if (!(p.t_max > 0.0)) throw SchemaError("$.timedomain.t_max", "must be > 0");
      if (!(p.dt > 0.0 && p.dt <= p.t_max)) throw SchemaError("$.timedomain.dt", "must be in (0, t_max]");
      if (!(p.dt * std::sqrt(c.lattice.pinning + 4.0) < 2.0))
        throw SchemaError("$.timedomain.dt", "violates the Verlet stability limit");
      if (p.t_max / p.dt > 5e7) throw SchemaError("$.timedomain.dt", "too many steps");
      if (p.first_site > p.last_site) throw SchemaError("$.timedomain.last_site", "must be >= first_site");
      if (p.stride < 1) throw SchemaError("$.timedomain.stride", "must be >= 1");
    } else {
      if (p.source_site > 0) throw SchemaError("$.timedomain.source_site", "must be <= 0 for transmitted fields");
      if (p.field_nodes < 64 || p.field_nodes > 1 << 20) throw SchemaError("$.timedomain.field_nodes", "must be in 64..2^20");
      const auto& xs = c.grid("x");
      for (std::size_t i = 0; i < xs.size(); ++i)
        if (!is_int(xs[i]) || xs[i] <= c.lattice.section_length)
          throw SchemaError("$.grids.x[" + std::to_string(i) + "]", "sites must be integers beyond the section");
      if (c.scenario == "td-mean-field")
        for (std::size_t i = 0; i < c.grid("alpha").size(); ++i)
          if (!(c.grid("alpha")[i] > 0.0)) throw SchemaError("$.grids.alpha[" + std::to_string(i) + "]", "must be > 0");
      if (c.scenario == "td-mean-front")
        for (double x : xs)
          for (std::size_t i = 0; i < c.grid("beta").size(); ++i)
            if (!(front_params(c.lattice.pinning).alpha_s * x + c.grid("beta")[i] * std::cbrt(x) > 0.0))
              throw SchemaError("$.grids.beta[" + std::to_string(i) + "]", "gives a negative time");
    }
  }
  if (c.scenario.rfind("fd-", 0) == 0) {
    const auto& w = c.grid("omega");
    for (std::size_t i = 0; i < w.size(); ++i)
      domain_check("$.grids.omega[" + std::to_string(i) + "]", [&] {
        randlat::detail::check_band(w[i], c.lattice.pinning);
        if (!propagative_band(c.lattice.pinning, c.lattice.left_offset).contains(w[i]))
          throw DomainError("no incoming wave: outside the left half-space band");
      });
  }
  if (c.scenario == "density") {
    for (std::size_t i = 0; i < c.grid("tau").size(); ++i) {
      const double t = c.grid("tau")[i];
      if (!(t > 0.0 && t <= 1.0)) throw SchemaError("$.grids.tau[" + std::to_string(i) + "]", "must be in (0, 1]");
    }
    for (std::size_t i = 0; i < c.grid("gamma_l").size(); ++i)
      if (!(c.grid("gamma_l")[i] > 0.0)) throw SchemaError("$.grids.gamma_l[" + std::to_string(i) + "]", "must be > 0");
  }
  if (j.contains("output")) c.output = as_string(j["output"], "$.output");
  return c;
}

// Canonical form: every default filled in and every grid expanded.
inline json to_json(const RunConfig& c) {
  json g = json::object();
  for (const auto& [k, v] : c.grids) g[k] = v;
  return json{{"scenario", c.scenario},
              {"lattice",
               {{"pinning", c.lattice.pinning},
                {"section_length", c.lattice.section_length},
                {"disorder_sigma", c.lattice.disorder_sigma},
                {"left_offset", c.lattice.left_offset},
                {"right_offset", c.lattice.right_offset}}},
              {"disorder",
               {{"distribution", to_string(c.distribution)},
                {"correlation", detail::correlation_json(c.correlation)},
                {"master_seed", c.master_seed}}},
              {"n_real", c.n_real},
              {"grids", g},
              {"timedomain",
               {{"source_site", c.td.source_site},
                {"t_max", c.td.t_max},
                {"dt", c.td.dt},
                {"first_site", c.td.first_site},
                {"last_site", c.td.last_site},
                {"stride", c.td.stride},
                {"field_nodes", c.td.field_nodes}}}};
}

// FNV-1a of the canonical config (threads and output location excluded: they never change results).
inline std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- presets ---------------------------------------------------------------

inline std::map<std::string, json> presets() {
  std::map<std::string, json> p;
  const json traj_td = {{"source_site", 0}, {"t_max", 120}, {"dt", 0.01},
                        {"first_site", -40}, {"last_site", 160}, {"stride", 10}};
  p["fig1"] = {{"scenario", "td-trajectories"},
               {"lattice", {{"pinning", 0.0}, {"section_length", 12}, {"disorder_sigma", 0.15}}},
               {"disorder", {{"master_seed", 1}}},
               {"n_real", 5},
               {"timedomain", traj_td}};
  p["fig2"] = {{"scenario", "td-trajectories"},
               {"lattice", {{"pinning", 1.1}, {"section_length", 12}, {"disorder_sigma", 0.15}}},
               {"disorder", {{"master_seed", 2}}},
               {"n_real", 5},
               {"timedomain", traj_td}};
  p["fig3"] = {{"scenario", "fd-transmittance"},
               {"lattice", {{"pinning", 0.0}, {"section_length", 40}, {"disorder_sigma", 0.05}}},
               {"disorder", {{"master_seed", 3}}},
               {"n_real", 200},
               {"grids", {{"omega", {{"band_fraction", {0.005, 0.995}}, {"count", 200}}}}}};
  p["fig4"] = {{"scenario", "td-mean-field"},
               {"lattice", {{"pinning", 0.0}, {"section_length", 16}, {"disorder_sigma", 0.15}}},
               {"disorder", {{"master_seed", 4}}},
               {"n_real", 500},
               {"grids", {{"x", {400}}, {"alpha", {{"start", 0.9}, {"stop", 2.5}, {"count", 801}}}}},
               {"timedomain", {{"source_site", 0}}}};
  p["fig5"] = {{"scenario", "fd-moments"},
               {"lattice", {{"pinning", 0.02}, {"section_length", 40}, {"disorder_sigma", 0.05}}},
               {"disorder", {{"master_seed", 5}}},
               {"n_real", 2000},
               {"grids", {{"omega", {{"band_fraction", {0.01, 0.99}}, {"count", 100}}}}}};
  p["fig6"] = {{"scenario", "fd-nonmatched"},
               {"lattice", {{"pinning", 0.02}, {"section_length", 40}, {"disorder_sigma", 0.05}, {"left_offset", 0.1}}},
               {"disorder", {{"master_seed", 6}}},
               {"n_real", 151},
               {"grids", {{"omega", {{"band_fraction", {0.01, 0.99}}, {"count", 100}}}}}};
  return p;
}

inline std::string describe_preset(const json& j) {
  const auto& l = j["lattice"];
  std::ostringstream os;
  os << j["scenario"].get<std::string>() << "  Ks=" << l.value("pinning", 0.0) << " L=" << l["section_length"]
     << " sigma=" << l.value("disorder_sigma", 0.0);
  if (l.value("left_offset", 0.0) != 0.0) os << " Delta0=" << l["left_offset"];
  if (l.value("right_offset", 0.0) != 0.0) os << " Delta1=" << l["right_offset"];
  os << " n_real=" << j.value("n_real", 0);
  return os.str();
}

// key.sub=value; value parsed as JSON, falling back to a bare string
inline void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw SchemaError(assignment, "expected key=value");
  const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &j;
  std::string path = "$";
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw SchemaError(path, "empty key component in '" + key + "'");
    path += "." + part;
    if (!node->is_object()) throw SchemaError(path, "parent is not an object");
    if (dot == std::string::npos) {
      if (node->contains(part) && (*node)[part].is_object())
        throw SchemaError(path, "only scalar fields can be overridden");
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part)) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

// --- running ---------------------------------------------------------------

struct RunReport {
  std::string directory;
  std::vector<std::string> files;
  std::vector<std::string> notes;
};

namespace detail {

class Writer {
public:
  explicit Writer(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw csv::IoError("cannot create " + dir_ + ": " + ec.message());
  }
  template <class F>
  void file(const std::string& name, F&& body) {
    const auto path = (std::filesystem::path(dir_) / name).string();
    auto f = csv::open(path);
    body(f);
    f.flush();
    if (!f) throw csv::IoError("write failed: " + path);
    files.push_back(name);
  }
  const std::string& dir() const { return dir_; }
  std::vector<std::string> files;

private:
  std::string dir_;
};

inline std::string site_tag(double x) { return std::to_string(static_cast<long long>(x)); }

inline EnsembleSummary slice(const EnsembleSummary& s, std::size_t from, std::size_t n, const std::vector<double>& coord) {
  EnsembleSummary out;
  out.n_real = s.n_real;
  out.coord = coord;
  out.mean.assign(s.mean.begin() + from, s.mean.begin() + from + n);
  out.std.assign(s.std.begin() + from, s.std.begin() + from + n);
  out.stderr_.assign(s.stderr_.begin() + from, s.stderr_.begin() + from + n);
  return out;
}

inline void run_trajectories(const RunConfig& c, Writer& w) {
  const auto spec = c.disorder();
  const auto& p = c.td;
  const int radius = std::max({std::abs(p.source_site) + static_cast<int>(std::ceil(p.t_max)) + 11,
                               c.lattice.section_length + 1, std::abs(p.first_site) + 1, std::abs(p.last_site) + 1});
  w.file("profiles.csv", [&](std::ostream& os) {
    os << "realization,site,delta\n";
    for (long r = 0; r < c.n_real; ++r) {
      const auto prof = draw_profile(spec, r);
      for (int x = 1; x <= prof.length(); ++x)
        csv::write_row(os, {csv::num(static_cast<long long>(r)), csv::num(x), csv::num(prof.deltas[x - 1])});
    }
  });
  for (long r = 0; r < c.n_real; ++r) {
    TrajectoryRecord rec;
    try {
      rec = simulate(c.lattice, draw_profile(spec, r), impulse(p.source_site), p.t_max, p.dt, radius,
                     RecordSpec{p.first_site, p.last_site, p.stride, false});
    } catch (const CampaignError&) {
      throw;
    } catch (const std::exception& e) {
      throw CampaignError(r, "realization " + std::to_string(r) + ": " + e.what());
    }
    w.file("trajectory_r" + std::to_string(r) + ".csv", [&](std::ostream& os) { rec.write_csv(os); });
  }
}

inline void write_samples(Writer& w, const std::string& name, const std::vector<double>& coord,
                          const std::vector<std::vector<double>>& samples, std::size_t from) {
  w.file(name, [&](std::ostream& os) {
    os << "coord";
    for (std::size_t r = 0; r < samples.size(); ++r) os << ",r" << r;
    os << '\n';
    for (std::size_t i = 0; i < coord.size(); ++i) {
      os << csv::num(coord[i]);
      for (const auto& s : samples) os << ',' << csv::num(s[from + i]);
      os << '\n';
    }
  });
}

inline void run_td_ensemble(const RunConfig& c, Writer& w, RunReport& rep) {
  const bool front = c.scenario == "td-mean-front";
  const double ks = c.lattice.pinning, sigma = c.lattice.disorder_sigma;
  const int L = c.lattice.section_length;
  const auto& xs = c.grid("x");
  const auto& par = c.grid(front ? "beta" : "alpha");
  const double alpha_s = front_params(ks).alpha_s;
  auto time_at = [&](double x, double p) { return front ? alpha_s * x + p * std::cbrt(x) : p * x; };
  std::vector<double> flat;
  for (double x : xs)
    for (double p : par) flat.push_back(time_at(x, p));
  const int x0 = c.td.source_site, nodes = c.td.field_nodes;
  auto solver = [&](const MassProfile& prof, long) {
    TransmittedField f(ks, prof, x0, nodes);
    std::vector<double> out;
    out.reserve(flat.size());
    for (double x : xs) {
      const auto sw = f.weights(static_cast<int>(x));
      for (double p : par) out.push_back(f.at(sw, time_at(x, p)));
    }
    return out;
  };
  const auto samples = run_samples(c.disorder(), solver, c.n_real, c.threads);
  const auto all = summarize(flat, samples);
  rep.notes.push_back("field synthesized from the frequency-domain transmission coefficient; bound states omitted");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::size_t from = i * par.size();
    std::vector<double> t(flat.begin() + from, flat.begin() + from + par.size());
    const std::string tag = site_tag(xs[i]);
    const std::string what = front ? "front" : "field";
    w.file("mean_" + what + "_x" + tag + ".csv", [&](std::ostream& os) { slice(all, from, par.size(), t).write_csv(os); });
    write_samples(w, "samples_" + what + "_x" + tag + ".csv", t, samples, from);
    // leading-order theory, offset by the source position (the field depends on x - x0)
    w.file("theory_" + what + "_x" + tag + ".csv", [&](std::ostream& os) {
      os << (front ? "coord,beta,theory\n" : "coord,alpha,theory,near_caustic\n");
      const double xe = xs[i] - x0;
      for (std::size_t k = 0; k < par.size(); ++k) {
        if (front) {
          const double beta = (t[k] - alpha_s * xe) / std::cbrt(xe);
          csv::write_row(os, {csv::num(t[k]), csv::num(par[k]), csv::num(mean_front(xe, beta, sigma, L, ks))});
        } else {
          const double alpha = t[k] / xe;
          try {
            const auto v = mean_bulk(xe, alpha, ks, sigma, L);
            csv::write_row(os, {csv::num(t[k]), csv::num(par[k]), csv::num(v.value), v.near_caustic ? "1" : "0"});
          } catch (const NoStationaryPoint&) {
            // outside the light cone: the leading-order field vanishes
            csv::write_row(os, {csv::num(t[k]), csv::num(par[k]), "0", "0"});
          }
        }
      }
    });
  }
}

// Per-realization scattering rows plus the |T|^2 (and |T|^4) samples.
struct FdSamples {
  std::vector<std::vector<double>> raw;  // per realization: 6 values per omega
};

inline FdSamples run_fd(const RunConfig& c) {
  const auto& ws = c.grid("omega");
  const double ks = c.lattice.pinning;
  auto solver = [&](const MassProfile& prof, long) {
    std::vector<double> out;
    out.reserve(6 * ws.size());
    for (double w : ws) {
      HarmonicSetup s(w, ks, prof);
      const auto r = solve(s);
      out.insert(out.end(), {r.T.real(), r.T.imag(), r.R.real(), r.R.imag(), std::norm(r.T), r.flux_deficit});
    }
    return out;
  };
  return {run_samples(c.disorder(), solver, c.n_real, c.threads)};
}

inline void write_realizations(const RunConfig& c, Writer& w, const FdSamples& s) {
  const auto& ws = c.grid("omega");
  w.file("realizations.csv", [&](std::ostream& os) {
    os << "omega,re_T,im_T,re_R,im_R,trans2,flux_deficit,seed,realization\n";
    for (std::size_t r = 0; r < s.raw.size(); ++r)
      for (std::size_t i = 0; i < ws.size(); ++i) {
        const double* v = &s.raw[r][6 * i];
        csv::write_row(os, {csv::num(ws[i]), csv::num(v[0]), csv::num(v[1]), csv::num(v[2]), csv::num(v[3]),
                            csv::num(v[4]), csv::num(v[5]), csv::num(static_cast<unsigned long long>(c.master_seed)),
                            csv::num(static_cast<long long>(r))});
      }
  });
}

inline std::vector<std::vector<double>> power_samples(const RunConfig& c, const FdSamples& s, int power) {
  std::vector<std::vector<double>> out;
  for (const auto& r : s.raw) {
    std::vector<double> v;
    for (std::size_t i = 0; i < c.grid("omega").size(); ++i) v.push_back(std::pow(r[6 * i + 4], power));
    out.push_back(std::move(v));
  }
  return out;
}

inline double gamma_l(const RunConfig& c, double w) {
  return gamma_correlated(w, c.lattice.disorder_sigma, c.lattice.pinning, c.correlation) * c.lattice.section_length;
}

inline void run_fd_scenario(const RunConfig& c, Writer& w, RunReport& rep) {
  const auto& ws = c.grid("omega");
  std::optional<FdSamples> s;
  if (c.n_real >= 1) s = run_fd(c);
  if (s && c.scenario != "fd-moments") write_realizations(c, w, *s);
  if (s && c.n_real >= 2) {
    w.file("transmittance_summary.csv", [&](std::ostream& os) { summarize(ws, power_samples(c, *s, 1)).write_csv(os); });
    if (c.scenario == "fd-moments")
      w.file("transmittance_sq_summary.csv",
             [&](std::ostream& os) { summarize(ws, power_samples(c, *s, 2)).write_csv(os); });
  }
  const auto& lat = c.lattice;
  if (lat.matched()) {
    w.file(c.scenario == "fd-moments" ? "moments_theory.csv" : "transmittance_theory.csv", [&](std::ostream& os) {
      os << "omega,gammaL,mean,second,std\n";
      for (double om : ws) {
        const double g = gamma_l(c, om);
        const auto m = moments_matched(2, g);
        csv::write_row(os, {csv::num(om), csv::num(g), csv::num(m.m[0]), csv::num(m.m[1]), csv::num(m.std_dev())});
      }
    });
    return;
  }
  if (lat.left_offset != 0.0 && lat.right_offset != 0.0) {
    rep.notes.push_back("no closed-form theory when both half-spaces are offset; Monte Carlo only");
    return;
  }
  const bool left = lat.left_offset != 0.0;
  w.file("nonmatched_theory.csv", [&](std::ostream& os) {
    os << "omega,gammaL,mean,second,std\n";
    for (double om : ws) {
      NonmatchedQuery q{om, lat.pinning, lat.disorder_sigma, lat.section_length, left ? lat.left_offset : lat.right_offset,
                        c.correlation};
      if (!left && !propagative_band(lat.pinning, lat.right_offset).contains(om)) {
        // total reflection: nothing is transmitted
        csv::write_row(os, {csv::num(om), csv::num(gamma_l(c, om)), "0", "0", "0"});
        continue;
      }
      const double m1 = left ? moments_nonmatched_left(1, q) : moments_nonmatched_right(1, q);
      const double m2 = left ? moments_nonmatched_left(2, q) : moments_nonmatched_right(2, q);
      csv::write_row(os, {csv::num(om), csv::num(gamma_l(c, om)), csv::num(m1), csv::num(m2),
                          csv::num(std::sqrt(std::max(0.0, m2 - m1 * m1)))});
    }
  });
}

inline void run_density(const RunConfig& c, Writer& w) {
  w.file("density.csv", [&](std::ostream& os) {
    os << "gammaL,tau,density\n";
    for (double g : c.grid("gamma_l"))
      for (double t : c.grid("tau")) csv::write_row(os, {csv::num(g), csv::num(t), csv::num(density(t, 1.0, g))});
  });
}

}  // namespace detail

inline std::string default_output(const std::string& name) {
  const char* env = std::getenv(output_env);
  const std::filesystem::path base = env && *env ? env : "randlat_out";
  return (base / name).string();
}

// Runs a parsed config and writes CSVs plus manifest.json into c.output.
// Throws CampaignError / randlat errors (solver), csv::IoError (I/O).
inline RunReport run(const RunConfig& c) {
  RunReport rep;
  const std::string out = c.output.empty() ? default_output(c.scenario) : c.output;
  detail::Writer w(out);
  rep.directory = out;
  if (c.scenario == "td-trajectories") detail::run_trajectories(c, w);
  else if (c.scenario == "td-mean-field" || c.scenario == "td-mean-front") detail::run_td_ensemble(c, w, rep);
  else if (c.scenario == "density") detail::run_density(c, w);
  else detail::run_fd_scenario(c, w, rep);
  rep.files = w.files;
  const json manifest = {{"config", to_json(c)},
                         {"config_hash", config_hash(c)},
                         {"master_seed", c.master_seed},
                         {"versions", {{"randlat", version}, {"compiler", __VERSION__}, {"cxx", __cplusplus}}},
                         {"files", rep.files},
                         {"notes", rep.notes}};
  w.file("manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
  rep.files = w.files;
  return rep;
}

}  // namespace randlat::harness
