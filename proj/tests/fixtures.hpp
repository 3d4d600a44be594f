#pragma once

// Small scene builders shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "uar/dsp.hpp"
#include "uar/scene.hpp"

namespace fixtures {

inline uar::ScattererTrajectory point(const char* name, uar::Vec3 at, double reflectivity) {
  uar::ScattererTrajectory s;
  s.name = name;
  s.anchor = at;
  s.reflectivity = reflectivity;
  return s;
}

inline uar::Scene single(uar::ScattererTrajectory s) {
  uar::Scene scene;
  scene.scatterers.push_back(std::move(s));
  return scene;
}

inline uar::SimConfig quiet(std::size_t cycles = uar::kDefaultWindowCycles) {
  uar::SimConfig sim;
  sim.snr_db.reset();
  sim.n_cycles = cycles;
  return sim;
}

// Round-trip delay in samples for a scatterer at p seen by a mic at m.
inline double delay_samples(uar::Vec3 p, uar::Vec3 m, double fs = 96000.0, double c = 343.0) {
  return (p.norm() + (p - m).norm()) * fs / c;
}

// Pulse-compressed echo onset: argmax of the matched-filter response of `row` against `templ`.
inline std::size_t echo_onset(std::span<const double> row, std::span<const double> templ) {
  const auto mf = uar::matched_filter(row, templ);
  return static_cast<std::size_t>(std::max_element(mf.correlation.begin(), mf.correlation.end()) -
                                  mf.correlation.begin());
}

inline std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace fixtures
