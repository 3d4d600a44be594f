#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace uar {

struct WavData {
  std::uint32_t sample_rate = 0;
  std::vector<std::vector<double>> channels;  // equal lengths

  std::size_t frames() const { return channels.empty() ? 0 : channels.front().size(); }
};

// Writes IEEE float32 PCM (format tag 3). Samples are rounded to float.
std::vector<std::uint8_t> encode_wav_f32(const WavData& wav);
void write_wav_f32(const std::filesystem::path& path, const WavData& wav);

// Reads integer PCM (16/24/32-bit) or IEEE float (32/64-bit), including
// WAVE_FORMAT_EXTENSIBLE wrappers of those. Integer PCM is scaled to [-1, 1).
WavData decode_wav(std::span<const std::uint8_t> bytes);
WavData read_wav(const std::filesystem::path& path);

}  // namespace uar
