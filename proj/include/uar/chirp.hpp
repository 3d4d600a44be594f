#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace uar {

/// Linear chirp excitation. Defaults are the 20-40 kHz, 1.5 ms pulse
/// repeated every 11.8 ms at 96 kHz.
struct ChirpParams {
  double f0 = 20'000.0;     // lower bound frequency, Hz
  double f1 = 40'000.0;     // upper bound frequency, Hz
  double tau = 1.5e-3;      // chirp length, s
  double cycle = 11.8e-3;   // repetition period, s
  double fs = 96'000.0;     // sample rate, Hz
  double phi0 = 0.0;        // initial phase, rad
  double taper = 0.0;       // raised-cosine edge fraction per side, [0, 0.5]; 0 = rectangular

  double beta() const { return (f1 - f0) / tau; }

  // Throws ErrorKind::Parameter naming the first violated invariant.
  void validate() const;

  bool operator==(const ChirpParams&) const = default;
};

struct SensingGeometry {
  double d_min = 0.30;  // m
  double d_max = 2.0;   // m
  double c = 343.0;     // m/s

  void validate() const;

  bool operator==(const SensingGeometry&) const = default;
};

/// Sample-domain view of one chirp period. The reflection gate
/// [n_min, n_max] lies after the direct chirp and inside the period.
struct CycleIndexing {
  std::size_t n_tau = 0;
  std::size_t n_cycle = 0;
  std::size_t n_min = 0;
  std::size_t n_max = 0;

  std::size_t gate_width() const { return n_max - n_min + 1; }

  bool operator==(const CycleIndexing&) const = default;
};

struct TimingCheck {
  std::string name;      // "chirp_length" or "cycle_time"
  std::string relation;  // human-readable inequality
  double value = 0.0;    // s
  double bound = 0.0;    // s
  double margin = 0.0;   // s, positive when satisfied
  bool pass = false;
};

struct TimingReport {
  TimingCheck chirp_length;  // tau <= 2 d_min / c
  TimingCheck cycle_time;    // T_eff >= 2 d_max / c
  double effective_cycle = 0.0;  // n_cycle / fs, s
  bool pass() const { return chirp_length.pass && cycle_time.pass; }
};

/// Round half-up to the nearest integer sample.
std::size_t round_samples(double x);

/// Continuous-time chirp value at t seconds (taper included); zero outside [0, tau).
double chirp_value(const ChirpParams& params, double t);

/// round(tau * fs) samples of the chirp.
std::vector<double> design_chirp(const ChirpParams& params);

TimingReport validate_timing(const SensingGeometry& geometry, const ChirpParams& params);

/// Throws ErrorKind::Geometry when the rounded indices break the gate ordering.
CycleIndexing cycle_indexing(const SensingGeometry& geometry, const ChirpParams& params);

/// n_cycles periods, each a chirp followed by silence.
std::vector<double> build_excitation(const ChirpParams& params, std::size_t n_cycles);

std::string format_timing_report(const TimingReport& report);

// key=value config persistence. Unknown keys are rejected; missing keys keep defaults.
struct SensingConfig {
  ChirpParams chirp;
  SensingGeometry geometry;
  bool operator==(const SensingConfig&) const = default;
};

std::string to_config_text(const SensingConfig& config);
SensingConfig parse_config_text(const std::string& text);
SensingConfig load_config(const std::filesystem::path& path);
void save_config(const SensingConfig& config, const std::filesystem::path& path);

}  // namespace uar
