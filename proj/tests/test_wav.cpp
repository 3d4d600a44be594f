#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "uar/errors.hpp"
#include "uar/wav.hpp"

using namespace uar;

namespace {

void put16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back(v >> 8);
}
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}
void tag(std::vector<std::uint8_t>& b, const char* s) { b.insert(b.end(), s, s + 4); }

std::vector<std::uint8_t> pcm16(const std::vector<std::int16_t>& samples, std::uint16_t nch, bool extensible) {
  std::vector<std::uint8_t> b;
  const std::uint32_t data = static_cast<std::uint32_t>(samples.size() * 2);
  const std::uint32_t fmt = extensible ? 40 : 16;
  tag(b, "RIFF");
  put32(b, 4 + 8 + fmt + 8 + data);
  tag(b, "WAVE");
  tag(b, "fmt ");
  put32(b, fmt);
  put16(b, extensible ? 0xFFFE : 1);
  put16(b, nch);
  put32(b, 48000);
  put32(b, 48000 * 2 * nch);
  put16(b, 2 * nch);
  put16(b, 16);
  if (extensible) {
    put16(b, 22);
    put16(b, 16);
    put32(b, 0);
    put16(b, 1);  // PCM subformat
    for (int i = 0; i < 14; ++i) b.push_back(0);
  }
  tag(b, "LIST");  // an unrelated chunk to skip
  put32(b, 2);
  b.push_back(0);
  b.push_back(0);
  tag(b, "data");
  put32(b, data);
  for (auto s : samples) put16(b, static_cast<std::uint16_t>(s));
  return b;
}

}  // namespace

TEST_CASE("float WAV round trip") {
  WavData w;
  w.sample_rate = 96000;
  w.channels = {{0.0, 0.5, -0.25, 1e-3}, {1.0, -1.0, 0.125, 0.0}};
  const auto bytes = encode_wav_f32(w);
  // RIFF + 18-byte fmt + fact + data headers precede the samples.
  CHECK(bytes.size() == 58 + 4 * 2 * 4);
  const auto back = decode_wav(bytes);
  CHECK(back.sample_rate == 96000);
  REQUIRE(back.channels.size() == 2);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < 4; ++i) CHECK(back.channels[c][i] == double(float(w.channels[c][i])));

  const auto path = std::filesystem::temp_directory_path() / "uar_test_roundtrip.wav";
  write_wav_f32(path, w);
  CHECK(read_wav(path).channels == back.channels);
  std::filesystem::remove(path);
}

TEST_CASE("integer PCM and extensible headers decode") {
  const std::vector<std::int16_t> s = {0, 16384, -32768, 32767, 1, -1};
  for (bool ext : {false, true}) {
    const auto w = decode_wav(pcm16(s, 2, ext));
    CHECK(w.sample_rate == 48000);
    REQUIRE(w.channels.size() == 2);
    REQUIRE(w.frames() == 3);
    CHECK(w.channels[0][0] == 0.0);
    CHECK(w.channels[1][0] == 0.5);
    CHECK(w.channels[0][1] == -1.0);
    CHECK(w.channels[1][1] == doctest::Approx(32767.0 / 32768.0));
  }
}

TEST_CASE("malformed WAV streams raise Io errors") {
  auto kind = [](std::vector<std::uint8_t> b) {
    try {
      decode_wav(b);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Usage;
  };
  CHECK(kind({}) == ErrorKind::Io);
  auto good = pcm16({1, 2}, 1, false);
  auto bad = good;
  std::memcpy(bad.data(), "RIFX", 4);
  CHECK(kind(bad) == ErrorKind::Io);
  auto trunc = good;
  trunc.resize(30);
  CHECK(kind(trunc) == ErrorKind::Io);
  auto eight = good;
  eight[34] = 8;  // bits per sample
  CHECK(kind(eight) == ErrorKind::Io);
  CHECK_THROWS_AS(read_wav("/nonexistent/uar.wav"), Error);
}

TEST_CASE("ragged channels cannot be encoded") {
  WavData w;
  w.sample_rate = 8000;
  w.channels = {{1.0, 2.0}, {1.0}};
  CHECK_THROWS_AS(encode_wav_f32(w), Error);
}
