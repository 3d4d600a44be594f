#include "uar/chirp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "uar/errors.hpp"

namespace uar {

namespace {

void require(bool ok, ErrorKind kind, const char* what) {
  if (!ok) fail(kind, what);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double taper_gain(const ChirpParams& p, double t) {
  if (p.taper <= 0.0) return 1.0;
  const double edge = p.taper * p.tau;
  if (t < edge) return 0.5 * (1.0 - std::cos(std::numbers::pi * t / edge));
  if (t > p.tau - edge) return 0.5 * (1.0 - std::cos(std::numbers::pi * (p.tau - t) / edge));
  return 1.0;
}

}  // namespace

void ChirpParams::validate() const {
  require(std::isfinite(f0) && std::isfinite(f1) && std::isfinite(fs) && std::isfinite(tau) &&
              std::isfinite(cycle) && std::isfinite(phi0) && std::isfinite(taper),
          ErrorKind::Parameter, "chirp parameters must be finite");
  require(fs > 0.0, ErrorKind::Parameter, "fs must be positive");
  require(f0 > 0.0, ErrorKind::Parameter, "f0 must be positive");
  require(f0 < f1, ErrorKind::Parameter, "f0 must be below f1");
  require(f1 <= fs / 2.0, ErrorKind::Parameter, "f1 must not exceed fs/2");
  require(tau > 0.0, ErrorKind::Parameter, "tau must be positive");
  require(cycle > tau, ErrorKind::Parameter, "cycle must exceed tau");
  require(std::isfinite(beta()) && beta() > 0.0, ErrorKind::Parameter, "beta must be finite and positive");
  require(taper >= 0.0 && taper <= 0.5, ErrorKind::Parameter, "taper must lie in [0, 0.5]");
  require(round_samples(tau * fs) >= 1, ErrorKind::Parameter, "tau*fs must round to at least one sample");
}

void SensingGeometry::validate() const {
  require(std::isfinite(d_min) && std::isfinite(d_max) && std::isfinite(c), ErrorKind::Parameter,
          "geometry must be finite");
  require(d_min > 0.0, ErrorKind::Parameter, "d_min must be positive");
  require(d_min < d_max, ErrorKind::Parameter, "d_min must be below d_max");
  require(c > 0.0, ErrorKind::Parameter, "c must be positive");
}

std::size_t round_samples(double x) {
  if (!(x >= 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

double chirp_value(const ChirpParams& p, double t) {
  if (t < 0.0 || t >= p.tau) return 0.0;
  const double phase = 2.0 * std::numbers::pi * (0.5 * p.beta() * t * t + p.f0 * t) + p.phi0;
  return taper_gain(p, t) * std::sin(phase);
}

std::vector<double> design_chirp(const ChirpParams& params) {
  params.validate();
  const std::size_t n = round_samples(params.tau * params.fs);
  std::vector<double> out(n);
  // n - 1 <= tau*fs - 0.5, so every sample time lies inside [0, tau).
  for (std::size_t i = 0; i < n; ++i) out[i] = chirp_value(params, static_cast<double>(i) / params.fs);
  return out;
}

TimingReport validate_timing(const SensingGeometry& geometry, const ChirpParams& params) {
  geometry.validate();
  params.validate();
  TimingReport r;
  r.effective_cycle = static_cast<double>(round_samples(params.cycle * params.fs)) / params.fs;

  auto& a = r.chirp_length;
  a.name = "chirp_length";
  a.relation = "tau <= 2*d_min/c";
  a.value = params.tau;
  a.bound = 2.0 * geometry.d_min / geometry.c;
  a.margin = a.bound - a.value;
  a.pass = a.margin >= 0.0;

  auto& b = r.cycle_time;
  b.name = "cycle_time";
  b.relation = "T >= 2*d_max/c";
  b.value = r.effective_cycle;
  b.bound = 2.0 * geometry.d_max / geometry.c;
  b.margin = b.value - b.bound;
  b.pass = b.margin >= 0.0;
  return r;
}

CycleIndexing cycle_indexing(const SensingGeometry& geometry, const ChirpParams& params) {
  params.validate();
  if (!(geometry.c > 0.0) || !(geometry.d_min > 0.0))
    fail(ErrorKind::Geometry, "geometry needs positive c and d_min");
  CycleIndexing ix;
  ix.n_tau = round_samples(params.tau * params.fs);
  ix.n_cycle = round_samples(params.cycle * params.fs);
  ix.n_min = round_samples(2.0 * params.fs * geometry.d_min / geometry.c);
  ix.n_max = round_samples(2.0 * params.fs * geometry.d_max / geometry.c);
  if (!(ix.n_tau < ix.n_min))
    fail(ErrorKind::Geometry, "reflection gate starts inside the direct chirp (n_min <= n_tau)");
  if (!(ix.n_min < ix.n_max)) fail(ErrorKind::Geometry, "empty reflection gate (n_max <= n_min)");
  if (!(ix.n_max < ix.n_cycle))
    fail(ErrorKind::Geometry, "reflection gate extends past the chirp period (n_max >= n_cycle)");
  return ix;
}

std::vector<double> build_excitation(const ChirpParams& params, std::size_t n_cycles) {
  if (n_cycles == 0) fail(ErrorKind::Parameter, "n_cycles must be at least 1");
  const auto chirp = design_chirp(params);
  const std::size_t period = round_samples(params.cycle * params.fs);
  std::vector<double> out(n_cycles * period, 0.0);
  for (std::size_t k = 0; k < n_cycles; ++k)
    std::copy(chirp.begin(), chirp.end(), out.begin() + static_cast<std::ptrdiff_t>(k * period));
  return out;
}

std::string format_timing_report(const TimingReport& report) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  for (const auto* c : {&report.chirp_length, &report.cycle_time}) {
    os << c->name << ": " << c->relation << "  value=" << c->value * 1e3 << " ms bound=" << c->bound * 1e3
       << " ms margin=" << c->margin * 1e3 << " ms " << (c->pass ? "PASS" : "FAIL") << '\n';
  }
  os << "effective_cycle: " << report.effective_cycle * 1e3 << " ms\n";
  return os.str();
}

std::string to_config_text(const SensingConfig& config) {
  const auto& c = config.chirp;
  const auto& g = config.geometry;
  std::ostringstream os;
  os << "# chirp excitation\n"
     << "f0_hz = " << format_double(c.f0) << '\n'
     << "f1_hz = " << format_double(c.f1) << '\n'
     << "tau_s = " << format_double(c.tau) << '\n'
     << "cycle_s = " << format_double(c.cycle) << '\n'
     << "fs_hz = " << format_double(c.fs) << '\n'
     << "phi0_rad = " << format_double(c.phi0) << '\n'
     << "taper = " << format_double(c.taper) << '\n'
     << "# sensing geometry\n"
     << "d_min_m = " << format_double(g.d_min) << '\n'
     << "d_max_m = " << format_double(g.d_max) << '\n'
     << "c_mps = " << format_double(g.c) << '\n';
  return os.str();
}

SensingConfig parse_config_text(const std::string& text) {
  SensingConfig cfg;
  const std::map<std::string, double*> slots = {
      {"f0_hz", &cfg.chirp.f0},         {"f1_hz", &cfg.chirp.f1},     {"tau_s", &cfg.chirp.tau},
      {"cycle_s", &cfg.chirp.cycle},    {"fs_hz", &cfg.chirp.fs},     {"phi0_rad", &cfg.chirp.phi0},
      {"taper", &cfg.chirp.taper},      {"d_min_m", &cfg.geometry.d_min}, {"d_max_m", &cfg.geometry.d_max},
      {"c_mps", &cfg.geometry.c},
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::Parameter, "config line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = slots.find(key);
    if (it == slots.end()) fail(ErrorKind::Parameter, "config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
      fail(ErrorKind::Parameter, "config line " + std::to_string(lineno) + ": bad number '" + value + "'");
    *it->second = v;
  }
  cfg.chirp.validate();
  cfg.geometry.validate();
  return cfg;
}

SensingConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void save_config(const SensingConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write config " + path.string());
  out << to_config_text(config);
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace uar
