#include "uar/scene.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "uar/errors.hpp"
#include "uar/util.hpp"
#include "uar/wav.hpp"

namespace uar {

namespace {

constexpr double kPi = std::numbers::pi;

struct Offset {
  Vec3 operator()(const Oscillation& m, double t) const {
    return m.amplitude * std::sin(2.0 * kPi * m.freq_hz * t + m.phase);
  }
  Vec3 operator()(const Excursion& m, double t) const {
    const double s = (t - m.start) / m.duration;
    if (s <= 0.0 || s >= 1.0) return {};
    const double w = std::sin(kPi * s);
    return m.displacement * (w * w);
  }
  Vec3 operator()(const Transition& m, double t) const {
    const double s = std::clamp((t - m.start) / m.duration, 0.0, 1.0);
    return m.displacement * (0.5 * (1.0 - std::cos(kPi * s)));
  }
};

// Standing posture, sensor at roughly 1 m height.
struct Body {
  Vec3 head, chest, abdomen, hand_l, hand_r, knee, foot_l, foot_r;
};

Body standing_body(double d) {
  return {
      {0.0, 0.55, d},       {0.0, 0.25, d - 0.08},  {0.0, 0.0, d - 0.03},   {-0.25, -0.15, d},
      {0.25, -0.15, d},     {0.0, -0.5, d - 0.04},  {-0.12, -0.95, d + 0.02}, {0.12, -0.95, d + 0.02},
  };
}

Body sitting_body(double d) {
  return {
      {0.0, 0.1, d + 0.05},    {0.0, -0.15, d},         {0.0, -0.4, d + 0.02},   {-0.22, -0.45, d - 0.25},
      {0.22, -0.45, d - 0.25}, {0.0, -0.45, d - 0.45},  {-0.1, -0.95, d - 0.45}, {0.1, -0.95, d - 0.45},
  };
}

Body lying_body(double d) {
  return {
      {0.0, -0.45, d + 0.45},  {0.0, -0.5, d + 0.2},   {0.0, -0.52, d},         {-0.2, -0.5, d + 0.05},
      {0.2, -0.5, d + 0.05},   {0.0, -0.5, d - 0.3},   {-0.1, -0.5, d - 0.55},  {0.1, -0.5, d - 0.55},
  };
}

constexpr double kReflectivity[] = {0.015, 0.045, 0.035, 0.012, 0.012, 0.015, 0.012, 0.012};
constexpr const char* kPartNames[] = {"head", "chest", "abdomen", "hand_l", "hand_r", "knee", "foot_l", "foot_r"};

std::vector<ScattererTrajectory> to_scatterers(const Body& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> gain(0.95, 1.05);
  const Vec3 parts[] = {b.head, b.chest, b.abdomen, b.hand_l, b.hand_r, b.knee, b.foot_l, b.foot_r};
  std::vector<ScattererTrajectory> out;
  for (std::size_t i = 0; i < 8; ++i) out.push_back({kPartNames[i], parts[i], {}, kReflectivity[i] * gain(rng)});
  return out;
}

ScattererTrajectory& part(std::vector<ScattererTrajectory>& s, std::string_view name) {
  for (auto& t : s)
    if (t.name == name) return t;
  fail(ErrorKind::Simulation, "no scatterer named " + std::string(name));
}

void check_range(const ScattererTrajectory& s, double duration, double d_min, double d_max) {
  // 1 ms grid is far finer than any motion in the action models.
  for (double t = 0.0; t <= duration; t += 1e-3) {
    const double d = s.position(t).norm();
    if (d < d_min || d > d_max) {
      std::ostringstream os;
      os << "scatterer '" << s.name << "' at distance " << d << " m at t=" << t << " s leaves [" << d_min << ", "
         << d_max << "] m";
      fail(ErrorKind::Simulation, os.str());
    }
  }
}

}  // namespace

Vec3 ScattererTrajectory::position(double t) const {
  Vec3 p = anchor;
  for (const auto& m : motions) p = p + std::visit([t](const auto& mm) { return Offset{}(mm, t); }, m);
  return p;
}

void SubjectProfile::validate() const {
  if (!(limb_speed >= 0.5 && limb_speed <= 1.5)) fail(ErrorKind::Parameter, "limb_speed must lie in [0.5, 1.5]");
  if (!(amplitude >= 0.5 && amplitude <= 1.5)) fail(ErrorKind::Parameter, "amplitude must lie in [0.5, 1.5]");
  if (!(base_distance >= 0.8 && base_distance <= 1.4))
    fail(ErrorKind::Parameter, "base_distance must lie in [0.8, 1.4] m");
}

std::string_view to_string(RoomProfile room) {
  switch (room) {
    case RoomProfile::Ra: return "Ra";
    case RoomProfile::Rb: return "Rb";
    case RoomProfile::Rc: return "Rc";
  }
  return "?";
}

std::optional<RoomProfile> parse_room(std::string_view name) {
  for (const auto r : {RoomProfile::Ra, RoomProfile::Rb, RoomProfile::Rc})
    if (to_string(r) == name) return r;
  return std::nullopt;
}

std::vector<ScattererTrajectory> room_reflectors(RoomProfile room) {
  switch (room) {
    case RoomProfile::Ra:
      return {};
    case RoomProfile::Rb:
      return {
          {"wall_left", {-1.3, 0.1, 1.2}, {}, 0.15},
          {"wall_right", {1.2, -0.2, 1.4}, {}, 0.15},
      };
    case RoomProfile::Rc:
      return {
          {"table", {0.5, -0.3, 0.7}, {}, 0.06},   {"chair", {-0.6, -0.5, 0.9}, {}, 0.05},
          {"shelf", {-1.0, 0.3, 1.4}, {}, 0.08},   {"sofa", {0.9, -0.6, 1.5}, {}, 0.07},
          {"lamp", {0.3, 0.6, 1.6}, {}, 0.03},     {"cabinet", {-0.4, -0.2, 1.8}, {}, 0.06},
      };
  }
  return {};
}

SimConfig SimConfig::two_channel() {
  SimConfig s;
  s.channel_count = 2;
  s.mic_offsets = {{-0.0225, -0.038, 0.0}, {0.0225, -0.038, 0.0}};
  return s;
}

void SimConfig::validate() const {
  if (channel_count < 1 || channel_count > 2) fail(ErrorKind::Parameter, "channel_count must be 1 or 2");
  if (mic_offsets.size() != channel_count) fail(ErrorKind::Parameter, "mic_offsets must match channel_count");
  if (!(c > 0.0)) fail(ErrorKind::Parameter, "speed of sound must be positive");
  if (n_cycles < 1) fail(ErrorKind::Parameter, "n_cycles must be at least 1");
  if (snr_db && !std::isfinite(*snr_db)) fail(ErrorKind::Parameter, "snr_db must be finite");
}

Scene make_action_scene(ActionClass label, const SubjectProfile& profile, std::uint64_t seed) {
  profile.validate();
  std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(to_index(label))}));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  const double a = profile.amplitude;
  const double v = profile.limb_speed;
  const double d = profile.base_distance + 0.5e-3 * unit(rng);
  const double jt = 0.02 * unit(rng);
  const double jphase = 0.2 * unit(rng);

  Scene scene;
  scene.label = label;
  scene.subject = profile;
  scene.duration = kDefaultSceneDuration;

  // Each class has its own stance (step toward or away from the sensor), so the
  // static parts of one class stay phase-coherent for a given subject.
  auto& s = scene.scatterers;
  switch (label) {
    case ActionClass::HandWaving: {
      s = to_scatterers(standing_body(d - 0.05), rng);
      auto& hand = part(s, "hand_r");
      hand.anchor = {0.3, 0.45, d - 0.25};
      hand.motions.push_back(Oscillation{{0.12 * a, 0.05 * a, 0.22 * a}, 2.0 * v, jphase});
      break;
    }
    case ActionClass::Throwing: {
      s = to_scatterers(standing_body(d + 0.06), rng);
      part(s, "chest").anchor.z = d - 0.04;
      auto& hand = part(s, "hand_r");
      hand.anchor = {0.25, 0.5, d + 0.16};
      hand.motions.push_back(Excursion{{-0.15 * a, -0.1 * a, -0.6 * a}, 0.35 + jt, 0.5 / v});
      break;
    }
    case ActionClass::Kicking: {
      s = to_scatterers(standing_body(d + 0.035), rng);
      const double start = 0.4 + jt, dur = 0.6 / v;
      part(s, "foot_r").motions.push_back(Excursion{{0.0, 0.45 * a, -0.5 * a}, start, dur});
      part(s, "knee").motions.push_back(Excursion{{0.0, 0.2 * a, -0.3 * a}, start, dur});
      break;
    }
    case ActionClass::PickingUp: {
      s = to_scatterers(standing_body(d - 0.025), rng);
      const double start = 0.15 + jt, dur = 1.2 / v;
      part(s, "head").motions.push_back(Excursion{{0.0, -0.55 * a, -0.3 * a}, start, dur});
      part(s, "chest").motions.push_back(Excursion{{0.0, -0.4 * a, -0.25 * a}, start, dur});
      part(s, "abdomen").motions.push_back(Excursion{{0.0, -0.15 * a, -0.1 * a}, start, dur});
      part(s, "hand_l").motions.push_back(Excursion{{0.0, -0.7 * a, -0.35 * a}, start, dur});
      part(s, "hand_r").motions.push_back(Excursion{{0.0, -0.7 * a, -0.35 * a}, start, dur});
      break;
    }
    case ActionClass::Walking: {
      const double from = 1.45 + 0.3 * (profile.base_distance - 1.1) + 0.5e-3 * unit(rng);
      s = to_scatterers(standing_body(from), rng);
      const double travel = std::min(0.7 * v, from - 0.55);
      for (auto& t : s) t.motions.push_back(Transition{{0.0, 0.0, -travel}, 0.0, 1.5});
      const double f = 1.8 * v;
      part(s, "foot_l").motions.push_back(Oscillation{{0.0, 0.0, 0.12 * a}, f, jphase});
      part(s, "foot_r").motions.push_back(Oscillation{{0.0, 0.0, 0.12 * a}, f, jphase + kPi});
      part(s, "hand_l").motions.push_back(Oscillation{{0.0, 0.0, 0.08 * a}, f, jphase + kPi});
      part(s, "hand_r").motions.push_back(Oscillation{{0.0, 0.0, 0.08 * a}, f, jphase});
      break;
    }
    case ActionClass::LyingDown: {
      const Body up = standing_body(d);
      const Body down = lying_body(d);
      s = to_scatterers(up, rng);
      const Vec3 targets[] = {down.head, down.chest, down.abdomen, down.hand_l,
                              down.hand_r, down.knee, down.foot_l, down.foot_r};
      for (std::size_t i = 0; i < s.size(); ++i)
        s[i].motions.push_back(Transition{targets[i] - s[i].anchor, 0.2 + jt, 0.9 / v});
      break;
    }
    case ActionClass::Sitting:
      s = to_scatterers(sitting_body(d), rng);
      break;
    case ActionClass::Standing:
      s = to_scatterers(standing_body(d), rng);
      break;
  }

  const SensingGeometry g;
  for (const auto& t : scene.scatterers) check_range(t, scene.duration, g.d_min, g.d_max);
  return scene;
}

Recording synthesize_recording(const Scene& scene, const ChirpParams& params, const SensingGeometry& geometry,
                               const SimConfig& sim) {
  sim.validate();
  if (!validate_timing(geometry, params).pass())
    fail(ErrorKind::Parameter, "chirp timing violates the sensing geometry");
  const auto ix = cycle_indexing(geometry, params);
  if (scene.scatterers.empty() && scene.room_reflectors.empty())
    fail(ErrorKind::Simulation, "scene has no scatterers");
  const double period_s = static_cast<double>(ix.n_cycle) / params.fs;
  if (scene.duration + 1e-12 < static_cast<double>(sim.n_cycles) * period_s)
    fail(ErrorKind::Simulation, "scene duration is shorter than the requested cycles");

  const std::size_t length = sim.lead_in + sim.n_cycles * ix.n_cycle;
  Recording rec;
  rec.id = "sim";
  rec.fs = params.fs;
  rec.params = params;
  rec.geometry = geometry;
  rec.channels.assign(sim.channel_count, std::vector<double>(length, 0.0));

  const auto excitation = build_excitation(params, sim.n_cycles);

  std::vector<const ScattererTrajectory*> all;
  for (const auto& s : scene.scatterers) all.push_back(&s);
  for (const auto& s : scene.room_reflectors) all.push_back(&s);

  for (std::size_t ch = 0; ch < sim.channel_count; ++ch) {
    const Vec3 mic = sim.mic_offsets[ch];
    std::vector<double> echo(length, 0.0);
    for (const auto* s : all) {
      if (s->reflectivity < 0.0) fail(ErrorKind::Simulation, "scatterer '" + s->name + "' has negative reflectivity");
      for (std::size_t cyc = 0; cyc < sim.n_cycles; ++cyc) {
        const double t = static_cast<double>(cyc) * period_s;
        const Vec3 p = s->position(t);
        const double d_spk = p.norm();
        if (d_spk < geometry.d_min || d_spk > geometry.d_max) {
          std::ostringstream os;
          os << "scatterer '" << s->name << "' at " << d_spk << " m leaves the sensing range at t=" << t << " s";
          fail(ErrorKind::Simulation, os.str());
        }
        if (s->reflectivity == 0.0) continue;
        const double d_mic = (p - mic).norm();
        const double delay = (d_spk + d_mic) / sim.c;
        const double gain = s->reflectivity / (d_spk * d_mic);
        const double start = static_cast<double>(sim.lead_in + cyc * ix.n_cycle);
        const double first = std::ceil(start + delay * params.fs);
        const double last = std::floor(start + (delay + params.tau) * params.fs);
        for (double m = first; m <= last && m < static_cast<double>(length); m += 1.0) {
          const double tc = (m - start) / params.fs - delay;
          echo[static_cast<std::size_t>(m)] += gain * chirp_value(params, tc);
        }
      }
    }

    auto& y = rec.channels[ch];
    for (std::size_t i = 0; i < excitation.size(); ++i) y[sim.lead_in + i] = excitation[i];
    double echo_power = 0.0;
    for (std::size_t i = 0; i < length; ++i) {
      y[i] += echo[i];
      echo_power += echo[i] * echo[i];
    }
    echo_power /= static_cast<double>(length);
    if (sim.snr_db && echo_power > 0.0) {
      const double sigma = std::sqrt(echo_power / std::pow(10.0, *sim.snr_db / 10.0));
      std::mt19937_64 rng(derive_seed(sim.seed, {0x6e6f697365ull, ch}));
      std::normal_distribution<double> noise(0.0, sigma);
      for (auto& v : y) v += noise(rng);
    }
  }
  return rec;
}

SubjectProfile draw_subject_profile(std::uint64_t root_seed, std::size_t index) {
  std::mt19937_64 rng(derive_seed(root_seed, {0x7375626aull, index}));
  std::uniform_real_distribution<double> mult(0.8, 1.2);
  std::uniform_real_distribution<double> dist(0.95, 1.25);
  SubjectProfile p;
  p.limb_speed = mult(rng);
  p.amplitude = mult(rng);
  p.base_distance = dist(rng);
  return p;
}

DatasetManifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.classes.empty() || spec.rooms.empty() || spec.instances_per_class < 1)
    fail(ErrorKind::Parameter, "dataset spec needs at least one class, room and instance");
  for (const auto& r : spec.rooms)
    if (r.subjects < 1) fail(ErrorKind::Parameter, "every room needs at least one subject");
  spec.sim.validate();
  spec.sensing.chirp.validate();
  spec.sensing.geometry.validate();
  if (spec.sensing.chirp.fs != std::floor(spec.sensing.chirp.fs) || spec.sensing.chirp.fs > 4.0e9)
    fail(ErrorKind::Parameter, "WAV output needs an integer sample rate");

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "wav", ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + (out_dir / "wav").string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  for (const auto& plan : spec.rooms) {
    const auto room_name = std::string(to_string(plan.room));
    const auto reflectors = room_reflectors(plan.room);
    for (std::size_t subj = 0; subj < plan.subjects; ++subj) {
      const auto profile = draw_subject_profile(spec.seed, subj);
      const std::string subject_id = "S" + std::to_string(subj + 1);
      for (const auto label : spec.classes) {
        for (std::size_t k = 0; k < spec.instances_per_class; ++k) {
          const std::uint64_t seed =
              derive_seed(spec.seed, {static_cast<std::uint64_t>(plan.room), subj,
                                      static_cast<std::uint64_t>(to_index(label)), k});
          auto scene = make_action_scene(label, profile, seed);
          scene.room_reflectors = reflectors;
          SimConfig sim = spec.sim;
          sim.seed = seed;
          const auto rec = synthesize_recording(scene, spec.sensing.chirp, spec.sensing.geometry, sim);

          char idx[8];
          std::snprintf(idx, sizeof(idx), "%03zu", k);
          ManifestRecord r;
          r.id = room_name + "-" + subject_id + "-" + std::string(to_string(label)) + "-" + idx;
          r.label = label;
          r.subject = subject_id;
          r.room = room_name;
          r.seed = seed;
          r.path = std::filesystem::path("wav") / (r.id + ".wav");

          WavData wav;
          wav.sample_rate = static_cast<std::uint32_t>(spec.sensing.chirp.fs);
          wav.channels = rec.channels;
          write_wav_f32(out_dir / r.path, wav);
          manifest.records.push_back(std::move(r));
        }
      }
    }
  }
  save_config(spec.sensing, out_dir / kSensingFile);
  save_manifest(manifest, out_dir / kManifestFile);
  return manifest;
}

}  // namespace uar
