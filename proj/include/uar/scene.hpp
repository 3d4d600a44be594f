#pragma once

// First-order point-scatterer echo simulator. Stands in for recorded data:
// each action instance is a set of scatterer trajectories in front of a
// co-located speaker/microphone pair, plus static room reflectors.
//
// Coordinates are metres with the speaker at the origin, +z pointing into
// the room and +y up.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uar/action.hpp"
#include "uar/chirp.hpp"
#include "uar/features.hpp"
#include "uar/manifest.hpp"

namespace uar {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool operator==(const Vec3&) const = default;
};

// Motion primitives; a trajectory's position is its anchor plus the sum of its motions.

/// amplitude * sin(2 pi f t + phase)
struct Oscillation {
  Vec3 amplitude;
  double freq_hz = 1.0;
  double phase = 0.0;
  bool operator==(const Oscillation&) const = default;
};

/// Out-and-back: displacement * sin^2(pi s) for s = (t - start) / duration in [0, 1], else 0.
struct Excursion {
  Vec3 displacement;
  double start = 0.0;
  double duration = 1.0;
  bool operator==(const Excursion&) const = default;
};

/// Monotone move that holds: displacement * (1 - cos(pi s)) / 2 with s clamped to [0, 1].
struct Transition {
  Vec3 displacement;
  double start = 0.0;
  double duration = 1.0;
  bool operator==(const Transition&) const = default;
};

using Motion = std::variant<Oscillation, Excursion, Transition>;

struct ScattererTrajectory {
  std::string name;
  Vec3 anchor;
  std::vector<Motion> motions;
  double reflectivity = 0.0;

  Vec3 position(double t) const;
  bool is_static() const { return motions.empty(); }
  bool operator==(const ScattererTrajectory&) const = default;
};

/// Per-subject kinematic parameters. Valid ranges: limb_speed and amplitude in
/// [0.5, 1.5] (multipliers), base_distance in [0.8, 1.4] m.
struct SubjectProfile {
  double limb_speed = 1.0;
  double amplitude = 1.0;
  double base_distance = 1.1;

  void validate() const;
  bool operator==(const SubjectProfile&) const = default;
};

/// Ra: anechoic (no static reflectors); Rb: empty room (2 walls); Rc: furnished (6 clutter reflectors).
enum class RoomProfile { Ra, Rb, Rc };

std::string_view to_string(RoomProfile room);
std::optional<RoomProfile> parse_room(std::string_view name);
std::vector<ScattererTrajectory> room_reflectors(RoomProfile room);

/// Covers 128 cycles of the default 1133-sample period.
inline constexpr double kDefaultSceneDuration = 1.52;

struct Scene {
  std::vector<ScattererTrajectory> scatterers;
  std::vector<ScattererTrajectory> room_reflectors;
  ActionClass label = ActionClass::Standing;
  SubjectProfile subject;
  double duration = kDefaultSceneDuration;

  bool operator==(const Scene&) const = default;
};

struct SimConfig {
  std::optional<double> snr_db = 20.0;  // nullopt disables noise
  std::uint64_t seed = 0;
  double c = 343.0;
  std::size_t channel_count = 1;
  // Microphones 38 mm below and 22.5 mm to either side of the speaker.
  std::vector<Vec3> mic_offsets{{-0.0225, -0.038, 0.0}};
  std::size_t n_cycles = kDefaultWindowCycles;
  std::size_t lead_in = 300;  // silent samples before the first chirp

  static SimConfig two_channel();
  void validate() const;
};

/// Deterministic scene for (label, profile, seed); the seed only adds small
/// per-instance jitter (mm-scale position, +/-5% reflectivity, tens of ms timing).
Scene make_action_scene(ActionClass label, const SubjectProfile& profile, std::uint64_t seed);

/// Direct wave (unit-gain excitation) plus one delayed, attenuated chirp per
/// scatterer and cycle, plus white Gaussian noise at sim.snr_db relative to the
/// echo power. Positions are frozen at each cycle start.
Recording synthesize_recording(const Scene& scene, const ChirpParams& params, const SensingGeometry& geometry,
                               const SimConfig& sim);

/// Profile for subject `index` (0-based), drawn from the per-subject ranges
/// limb_speed, amplitude in [0.8, 1.2] and base_distance in [0.95, 1.25] m.
SubjectProfile draw_subject_profile(std::uint64_t root_seed, std::size_t index);

struct RoomPlan {
  RoomProfile room = RoomProfile::Rc;
  std::size_t subjects = 4;
};

struct DatasetSpec {
  std::vector<ActionClass> classes{kAllActionClasses.begin(), kAllActionClasses.end()};
  std::vector<RoomPlan> rooms{{RoomProfile::Rc, 4}};
  std::size_t instances_per_class = 10;
  SimConfig sim;
  SensingConfig sensing;
  std::uint64_t seed = 1;
};

/// Writes wav/<id>.wav per instance plus manifest.jsonl and sensing.cfg under out_dir.
DatasetManifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir);

}  // namespace uar
