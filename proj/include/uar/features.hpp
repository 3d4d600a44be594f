#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uar/action.hpp"
#include "uar/chirp.hpp"

namespace uar {

/// Dense row-major matrix; rows are slow time (cycles), columns fast time.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

struct Recording {
  std::string id;
  std::vector<std::vector<double>> channels;
  double fs = 96'000.0;
  ChirpParams params;
  SensingGeometry geometry;

  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
  // Throws ErrorKind::Parameter on ragged channels or fs != params.fs.
  void validate() const;
};

struct EchoFrameSeries {
  Matrix direct_frames;   // N x n_tau
  Matrix reflect_frames;  // N x (n_max - n_min + 1)
  std::vector<std::size_t> direct_indices;
  std::size_t channel_id = 0;
  std::string recording_id;
  ChirpParams params;
  SensingGeometry geometry;

  std::size_t cycles() const { return direct_indices.size(); }
};

enum class FeatureKind { Ref, Renv, Ir, Ienv };

inline constexpr FeatureKind kAllFeatureKinds[] = {FeatureKind::Ref, FeatureKind::Renv, FeatureKind::Ir,
                                                   FeatureKind::Ienv};

std::string_view to_string(FeatureKind kind);  // "F_ref", "F_renv", "F_ir", "F_ienv"
std::optional<FeatureKind> parse_feature_kind(std::string_view name);

struct Provenance {
  std::string recording_id;
  std::vector<std::size_t> channels;
  std::string config_hash;

  bool operator==(const Provenance&) const = default;
};

struct FeatureMatrix {
  FeatureKind kind = FeatureKind::Ref;
  Matrix values;
  std::optional<ActionClass> label;
  Provenance provenance;
};

/// Default per-instance window, in cycles.
inline constexpr std::size_t kDefaultWindowCycles = 128;

/// Cycle-start indices of the direct chirp on one channel. Consecutive gaps are
/// n_cycle +/- 1; cycles that do not fit completely in the recording are dropped.
std::vector<std::size_t> locate_direct_waves(const Recording& recording, std::size_t channel);

EchoFrameSeries segment_frames(const Recording& recording, std::size_t channel,
                               std::span<const std::size_t> indices);

FeatureMatrix extract_f_ref(const EchoFrameSeries& frames);
FeatureMatrix extract_f_renv(const EchoFrameSeries& frames);
FeatureMatrix extract_f_ir(const EchoFrameSeries& frames);
FeatureMatrix extract_f_ienv(const EchoFrameSeries& frames);
FeatureMatrix extract(const EchoFrameSeries& frames, FeatureKind kind);

/// locate -> segment -> extract on every channel; channels are concatenated
/// along fast time and truncated to the shortest channel's cycle count.
std::vector<FeatureMatrix> extract_all(const Recording& recording, std::span<const FeatureKind> kinds);

/// Non-overlapping windows of `window` rows. Throws ErrorKind::Segmentation when
/// the matrix has fewer rows than one window.
std::vector<FeatureMatrix> split_windows(const FeatureMatrix& matrix, std::size_t window = kDefaultWindowCycles);

std::string extraction_config_hash(const ChirpParams& params, const SensingGeometry& geometry, FeatureKind kind);

/// Little-endian float32 row-major payload at `<stem>.f32` and a key=value header at `<stem>.hdr`.
void save_feature_matrix(const FeatureMatrix& matrix, double fs, const std::filesystem::path& stem);
FeatureMatrix load_feature_matrix(const std::filesystem::path& stem, double* fs = nullptr);

}  // namespace uar
