#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "uar/chirp.hpp"
#include "uar/errors.hpp"
#include "uar/features.hpp"
#include "uar/scene.hpp"

using namespace uar;

namespace {

Recording on_axis(double d, std::size_t cycles = 16, std::size_t channels = 1) {
  auto sim = fixtures::quiet(cycles);
  if (channels == 2) {
    const auto two = SimConfig::two_channel();
    sim.channel_count = 2;
    sim.mic_offsets = two.mic_offsets;
  }
  auto scene = fixtures::single(fixtures::point("target", {0, 0, d}, 1.0));
  return synthesize_recording(scene, {}, {}, sim);
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Usage;
}

double row_rms_diff(const Matrix& a, std::size_t r0, std::size_t r1) {
  double s = 0.0, e = 0.0;
  for (std::size_t c = 0; c < a.cols; ++c) {
    s += (a(r0, c) - a(r1, c)) * (a(r0, c) - a(r1, c));
    e += a(r0, c) * a(r0, c);
  }
  return std::sqrt(s / e);
}

}  // namespace

TEST_CASE("direct waves are found at the simulated cycle starts") {
  const auto rec = on_axis(1.0, 64);
  const auto idx = locate_direct_waves(rec, 0);
  REQUIRE(idx.size() == 64);
  for (std::size_t i = 0; i < idx.size(); ++i) CHECK(idx[i] == 300 + i * 1133);
}

TEST_CASE("a truncated final cycle is dropped") {
  auto rec = on_axis(1.0, 16);
  rec.channels[0].resize(rec.channels[0].size() - 500);
  CHECK(locate_direct_waves(rec, 0).size() == 15);
}

TEST_CASE("inverted polarity finds the same cycle starts") {
  auto rec = on_axis(1.0, 8);
  const auto idx = locate_direct_waves(rec, 0);
  for (auto& v : rec.channels[0]) v = -v;
  CHECK(locate_direct_waves(rec, 0) == idx);
}

TEST_CASE("noise and silence raise detection errors") {
  Recording rec;
  rec.id = "noise";
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  rec.channels.assign(1, std::vector<double>(20 * 1133));
  for (auto& v : rec.channels[0]) v = g(rng);
  CHECK(kind_of([&] { locate_direct_waves(rec, 0); }) == ErrorKind::Detection);
  rec.channels[0].assign(20 * 1133, 0.0);
  CHECK(kind_of([&] { locate_direct_waves(rec, 0); }) == ErrorKind::Detection);
  rec.channels[0].resize(1000);
  CHECK(kind_of([&] { locate_direct_waves(rec, 0); }) == ErrorKind::Detection);
  CHECK(kind_of([&] { locate_direct_waves(rec, 1); }) == ErrorKind::Parameter);
}

TEST_CASE("segmentation slices the direct chirp and the reflection gate") {
  const auto rec = on_axis(1.0);
  const auto idx = locate_direct_waves(rec, 0);
  const auto fr = segment_frames(rec, 0, idx);
  CHECK(fr.direct_frames.rows == 16);
  CHECK(fr.direct_frames.cols == 144);
  CHECK(fr.reflect_frames.cols == 953);
  const auto& y = rec.channels[0];
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t c = 0; c < 144; ++c) CHECK(fr.direct_frames(i, c) == y[idx[i] + c]);
    CHECK(fr.reflect_frames(i, 0) == y[idx[i] + 168]);
    CHECK(fr.reflect_frames(i, 952) == y[idx[i] + 1120]);
  }
  const auto templ = design_chirp({});
  for (std::size_t i = 0; i < fr.cycles(); ++i) {
    const auto onset = fixtures::echo_onset(fr.reflect_frames.row(i), templ);
    CHECK(onset + 2 >= 392);
    CHECK(onset <= 394);
  }
}

TEST_CASE("segmentation errors name the cycle") {
  const auto rec = on_axis(1.0, 4);
  const std::vector<std::size_t> late = {300, rec.length() - 100};
  CHECK(kind_of([&] { segment_frames(rec, 0, late); }) == ErrorKind::Segmentation);
  const std::vector<std::size_t> back = {1433, 300};
  CHECK(kind_of([&] { segment_frames(rec, 0, back); }) == ErrorKind::Segmentation);
  CHECK(kind_of([&] { segment_frames(rec, 0, std::vector<std::size_t>{}); }) == ErrorKind::Segmentation);

  Recording zero;
  zero.channels.assign(1, std::vector<double>(4000, 0.0));
  const std::vector<std::size_t> one = {0};
  const auto fr = segment_frames(zero, 0, one);
  CHECK(fr.reflect_frames.rows == 1);
  for (double v : fr.reflect_frames.values) CHECK(v == 0.0);
}

TEST_CASE("F_ref is the reflection gate verbatim and linear") {
  auto rec = on_axis(1.0, 4);
  const auto fr = segment_frames(rec, 0, locate_direct_waves(rec, 0));
  const auto f = extract_f_ref(fr);
  CHECK(f.kind == FeatureKind::Ref);
  CHECK(f.values == fr.reflect_frames);
  for (auto& v : rec.channels[0]) v *= 2.0;
  const auto f2 = extract_f_ref(segment_frames(rec, 0, locate_direct_waves(rec, 0)));
  for (std::size_t i = 0; i < f.values.values.size(); ++i) CHECK(f2.values.values[i] == 2.0 * f.values.values[i]);

  const std::vector<std::size_t> first = {fr.direct_indices[0]};
  const auto single = extract_f_ref(segment_frames(rec, 0, first));
  CHECK(single.values.rows == 1);
  CHECK(single.values.cols == 953);
}

TEST_CASE("F_renv matches the oracle envelope and ignores sign") {
  auto rec = on_axis(1.0, 4);
  const auto fr = segment_frames(rec, 0, locate_direct_waves(rec, 0));
  const auto env = extract_f_renv(fr);
  CHECK(env.kind == FeatureKind::Renv);
  const std::vector<double> row0(fr.reflect_frames.row(0).begin(), fr.reflect_frames.row(0).end());
  const auto ref = oracle::envelope(row0);
  for (std::size_t c = 0; c < 953; c += 7) CHECK(env.values(0, c) == doctest::Approx(ref[c]).epsilon(1e-6).scale(1e-6));
  for (double v : env.values.values) CHECK(v >= 0.0);

  // Leading edge of the envelope sits at the pulse-compressed onset.
  const double top = *std::max_element(env.values.row(0).begin(), env.values.row(0).end());
  std::size_t edge = 0;
  while (env.values(0, edge) < 0.5 * top) ++edge;
  const auto onset = fixtures::echo_onset(fr.reflect_frames.row(0), design_chirp({}));
  CHECK(edge + 2 >= onset);
  CHECK(edge <= onset + 2);

  for (auto& v : rec.channels[0]) v = -v;
  const auto neg = extract_f_renv(segment_frames(rec, 0, locate_direct_waves(rec, 0)));
  for (std::size_t i = 0; i < neg.values.values.size(); ++i)
    CHECK(std::abs(neg.values.values[i] - env.values.values[i]) < 1e-6);

  EchoFrameSeries zero;
  zero.direct_frames = Matrix(2, 144);
  zero.reflect_frames = Matrix(2, 953);
  for (double v : extract_f_renv(zero).values.values) CHECK(v == 0.0);
}

namespace {

EchoFrameSeries shifted_copy(std::size_t shift, double scale, std::size_t rows = 2) {
  const auto chirp = design_chirp({});
  EchoFrameSeries fr;
  fr.recording_id = "synthetic";
  fr.direct_frames = Matrix(rows, 144);
  fr.reflect_frames = Matrix(rows, 953);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < 144; ++i) {
      fr.direct_frames(r, i) = chirp[i];
      if (shift + i < 953) fr.reflect_frames(r, shift + i) = scale * chirp[i];
    }
  return fr;
}

}  // namespace

TEST_CASE("F_ir and F_ienv recover a shifted scaled copy") {
  const auto fr = shifted_copy(392, 0.3);
  const auto ir = extract_f_ir(fr);
  const auto ienv = extract_f_ienv(fr);
  CHECK(ir.kind == FeatureKind::Ir);
  CHECK(ienv.kind == FeatureKind::Ienv);
  REQUIRE(ir.values.cols == 953);
  for (std::size_t r = 0; r < 2; ++r) {
    const auto peak = fixtures::argmax(ir.values.row(r));
    CHECK(peak == 392);
    CHECK(ir.values(r, peak) == doctest::Approx(0.3).epsilon(0.10));
    CHECK(fixtures::argmax(ienv.values.row(r)) == 392);
  }
  for (double v : ienv.values.values) CHECK(v >= 0.0);
}

TEST_CASE("F_ir ignores a gain common to both paths") {
  auto rec = on_axis(0.9, 4);
  const auto a = extract_f_ir(segment_frames(rec, 0, locate_direct_waves(rec, 0)));
  for (auto& v : rec.channels[0]) v *= 0.5;
  const auto b = extract_f_ir(segment_frames(rec, 0, locate_direct_waves(rec, 0)));
  const auto ea = extract_f_ienv(segment_frames(rec, 0, locate_direct_waves(rec, 0)));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.values.values.size(); ++i) {
    num += (a.values.values[i] - b.values.values[i]) * (a.values.values[i] - b.values.values[i]);
    den += a.values.values[i] * a.values.values[i];
  }
  CHECK(std::sqrt(num / den) < 0.01);
  CHECK(ea.values.rows == a.values.rows);
}

TEST_CASE("F_ir of silent reflections is zero and a silent direct wave is degenerate") {
  auto fr = shifted_copy(100, 0.0);
  for (double v : extract_f_ir(fr).values.values) CHECK(std::abs(v) < 1e-9);
  for (double v : extract_f_ienv(fr).values.values) CHECK(std::abs(v) < 1e-9);
  auto dead = shifted_copy(100, 0.5, 3);
  for (std::size_t i = 0; i < 144; ++i) dead.direct_frames(1, i) = 0.0;
  try {
    extract_f_ir(dead);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
    CHECK(std::string(e.what()).find("cycle 1") != std::string::npos);
  }
}

TEST_CASE("extract_all shapes and channel concatenation") {
  const auto rec = on_axis(1.2, 8, 2);
  const auto all = extract_all(rec, kAllFeatureKinds);
  REQUIRE(all.size() == 4);
  for (const auto& f : all) {
    CHECK(f.values.rows == 8);
    CHECK(f.values.cols == 2 * 953);
    CHECK(f.provenance.channels == std::vector<std::size_t>{0, 1});
    CHECK(f.provenance.config_hash == extraction_config_hash(rec.params, rec.geometry, f.kind));
  }
  CHECK(extract_all(rec, std::span<const FeatureKind>{}).empty());
  const FeatureKind renv[] = {FeatureKind::Renv};
  const auto one = extract_all(on_axis(1.2, 8, 1), renv);
  REQUIRE(one.size() == 1);
  CHECK(one[0].values.cols == 953);
}

TEST_CASE("static scenes give stationary envelope rows") {
  Scene scene;
  scene.room_reflectors = room_reflectors(RoomProfile::Rc);
  scene.scatterers.push_back(fixtures::point("torso", {0.05, 0.1, 1.1}, 0.04));
  const auto rec = synthesize_recording(scene, {}, {}, fixtures::quiet(32));
  const FeatureKind renv[] = {FeatureKind::Renv};
  const auto f = extract_all(rec, renv).front();
  for (std::size_t r = 1; r < f.values.rows; ++r) CHECK(row_rms_diff(f.values, 0, r) < 0.01);
}

TEST_CASE("windows split without overlap") {
  FeatureMatrix m;
  m.kind = FeatureKind::Ienv;
  m.label = ActionClass::Kicking;
  m.values = Matrix(300, 3);
  for (std::size_t i = 0; i < m.values.values.size(); ++i) m.values.values[i] = double(i);
  const auto w = split_windows(m, 128);
  REQUIRE(w.size() == 2);
  CHECK(w[1].values(0, 0) == double(128 * 3));
  CHECK(w[1].label == ActionClass::Kicking);
  CHECK(w[1].kind == FeatureKind::Ienv);
  CHECK(kind_of([&] { split_windows(m, 301); }) == ErrorKind::Segmentation);
  CHECK(kind_of([&] { split_windows(m, 0); }) == ErrorKind::Parameter);
}

TEST_CASE("feature matrices persist as float32 with a header") {
  FeatureMatrix m;
  m.kind = FeatureKind::Renv;
  m.label = ActionClass::Sitting;
  m.provenance = {"rec-1", {0, 1}, "abc"};
  m.values = Matrix(3, 4);
  for (std::size_t i = 0; i < 12; ++i) m.values.values[i] = 0.1 * double(i);
  const auto stem = std::filesystem::temp_directory_path() / "uar_feature_roundtrip";
  save_feature_matrix(m, 96000.0, stem);
  double fs = 0.0;
  const auto back = load_feature_matrix(stem, &fs);
  CHECK(fs == 96000.0);
  CHECK(back.kind == m.kind);
  CHECK(back.label == m.label);
  CHECK(back.provenance == m.provenance);
  for (std::size_t i = 0; i < 12; ++i) CHECK(back.values.values[i] == double(float(m.values.values[i])));
  std::filesystem::resize_file(stem.string() + ".f32", 8);
  CHECK(kind_of([&] { load_feature_matrix(stem); }) == ErrorKind::Io);
  std::filesystem::remove(stem.string() + ".f32");
  std::filesystem::remove(stem.string() + ".hdr");

  m.values.values[0] = std::nan("");
  CHECK(kind_of([&] { save_feature_matrix(m, 96000.0, stem); }) == ErrorKind::Parameter);
}

TEST_CASE("feature kind names") {
  for (const auto k : kAllFeatureKinds) CHECK(parse_feature_kind(to_string(k)) == k);
  CHECK(to_string(FeatureKind::Renv) == "F_renv");
  CHECK_FALSE(parse_feature_kind("F_x"));
}
