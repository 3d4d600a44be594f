#include "uar/wav.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "uar/errors.hpp"

namespace uar {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

std::vector<std::uint8_t> encode_wav_f32(const WavData& wav) {
  const std::size_t nch = wav.channels.size();
  if (nch == 0 || nch > 0xFFFF) fail(ErrorKind::Parameter, "WAV needs 1..65535 channels");
  const std::size_t frames = wav.frames();
  for (const auto& ch : wav.channels)
    if (ch.size() != frames) fail(ErrorKind::Parameter, "WAV channels differ in length");
  const std::uint64_t data_bytes = static_cast<std::uint64_t>(frames) * nch * 4;
  if (data_bytes > 0xFFFFFF00ull) fail(ErrorKind::Parameter, "WAV payload exceeds 4 GiB");

  std::vector<std::uint8_t> out;
  out.reserve(58 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, static_cast<std::uint32_t>(4 + (8 + 18) + (8 + 4) + (8 + data_bytes)));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 18);
  put_u16(out, kFormatFloat);
  put_u16(out, static_cast<std::uint16_t>(nch));
  put_u32(out, wav.sample_rate);
  put_u32(out, static_cast<std::uint32_t>(wav.sample_rate * nch * 4));
  put_u16(out, static_cast<std::uint16_t>(nch * 4));
  put_u16(out, 32);
  put_u16(out, 0);  // cbSize
  put_tag(out, "fact");
  put_u32(out, 4);
  put_u32(out, static_cast<std::uint32_t>(frames));
  put_tag(out, "data");
  put_u32(out, static_cast<std::uint32_t>(data_bytes));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < nch; ++c) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(wav.channels[c][i])));
  }
  return out;
}

void write_wav_f32(const std::filesystem::path& path, const WavData& wav) {
  const auto bytes = encode_wav_f32(wav);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

WavData decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    fail(ErrorKind::Io, "not a RIFF/WAVE stream");

  std::uint16_t format = 0, nch = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t len = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      // Tolerate a truncated data chunk; anything else is malformed.
      if (std::memcmp(chunk, "data", 4) != 0) fail(ErrorKind::Io, "truncated WAV chunk");
    }
    const std::size_t avail = std::min(len, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) fail(ErrorKind::Io, "short fmt chunk");
      format = get_u16(chunk + 8);
      nch = get_u16(chunk + 10);
      rate = get_u32(chunk + 12);
      bits = get_u16(chunk + 22);
      if (format == kFormatExtensible) {
        if (avail < 26) fail(ErrorKind::Io, "short extensible fmt chunk");
        format = get_u16(chunk + 8 + 24);  // first two bytes of the subformat GUID
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = avail;
    }
    pos = body + len + (len & 1);
  }
  if (nch == 0 || rate == 0) fail(ErrorKind::Io, "WAV missing fmt chunk");
  if (!data) fail(ErrorKind::Io, "WAV missing data chunk");

  const bool is_float = format == kFormatFloat && (bits == 32 || bits == 64);
  const bool is_pcm = format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
  if (!is_float && !is_pcm)
    fail(ErrorKind::Io, "unsupported WAV encoding (format " + std::to_string(format) + ", " + std::to_string(bits) + " bits)");

  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * nch);
  WavData wav;
  wav.sample_rate = rate;
  wav.channels.assign(nch, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < nch; ++c) {
      const std::uint8_t* p = data + (i * nch + c) * width;
      double v = 0.0;
      if (is_float && bits == 32) {
        v = std::bit_cast<float>(get_u32(p));
      } else if (is_float) {
        const std::uint64_t raw = static_cast<std::uint64_t>(get_u32(p)) | (static_cast<std::uint64_t>(get_u32(p + 4)) << 32);
        v = std::bit_cast<double>(raw);
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(get_u16(p)) / 32768.0;
      } else if (bits == 24) {
        std::int32_t s = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      } else {
        v = static_cast<std::int32_t>(get_u32(p)) / 2147483648.0;
      }
      wav.channels[c][i] = v;
    }
  }
  return wav;
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

}  // namespace uar
