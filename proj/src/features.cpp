#include "uar/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "uar/dsp.hpp"
#include "uar/errors.hpp"
#include "uar/util.hpp"

namespace uar {

namespace {

// A matched-filter peak must look like the chirp, not just carry energy.
constexpr double kMinDirectCoherence = 0.5;

FeatureMatrix make_feature(const EchoFrameSeries& frames, FeatureKind kind, Matrix values) {
  FeatureMatrix f;
  f.kind = kind;
  f.values = std::move(values);
  f.provenance.recording_id = frames.recording_id;
  f.provenance.channels = {frames.channel_id};
  f.provenance.config_hash = extraction_config_hash(frames.params, frames.geometry, kind);
  return f;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

void Recording::validate() const {
  if (channels.empty()) fail(ErrorKind::Parameter, "recording '" + id + "' has no channels");
  for (const auto& ch : channels)
    if (ch.size() != channels.front().size()) fail(ErrorKind::Parameter, "recording '" + id + "' has ragged channels");
  if (fs != params.fs) fail(ErrorKind::Parameter, "recording '" + id + "' sample rate differs from chirp fs");
  params.validate();
  geometry.validate();
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Ref: return "F_ref";
    case FeatureKind::Renv: return "F_renv";
    case FeatureKind::Ir: return "F_ir";
    case FeatureKind::Ienv: return "F_ienv";
  }
  return "?";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view name) {
  for (const auto k : kAllFeatureKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::vector<std::size_t> locate_direct_waves(const Recording& recording, std::size_t channel) {
  recording.validate();
  if (channel >= recording.channels.size()) fail(ErrorKind::Parameter, "channel out of range");
  const auto ix = cycle_indexing(recording.geometry, recording.params);
  const auto& y = recording.channels[channel];
  if (y.size() < 2 * ix.n_cycle)
    fail(ErrorKind::Detection, "recording '" + recording.id + "' is shorter than two chirp periods");

  const auto templ = design_chirp(recording.params);
  const MatchedFilterOptions opts{0.5, ix.n_cycle - ix.n_tau};
  auto mf = matched_filter(y, templ, opts);
  // Inverted microphone polarity: pick peaks on the negated signal so indices stay on the chirp start.
  const auto [lo, hi] = std::minmax_element(mf.correlation.begin(), mf.correlation.end());
  if (lo != mf.correlation.end() && -*lo > *hi) {
    std::vector<double> flipped(y.size());
    std::transform(y.begin(), y.end(), flipped.begin(), [](double v) { return -v; });
    mf = matched_filter(flipped, templ, opts);
  }

  std::vector<std::size_t> coherent;
  for (const auto p : mf.peaks)
    if (mf.coherence[p] >= kMinDirectCoherence) coherent.push_back(p);

  // Longest run with period-consistent spacing.
  std::size_t best_begin = 0, best_len = 0;
  for (std::size_t i = 0; i < coherent.size();) {
    std::size_t j = i + 1;
    while (j < coherent.size()) {
      const std::size_t gap = coherent[j] - coherent[j - 1];
      if (gap + 1 < ix.n_cycle || gap > ix.n_cycle + 1) break;
      ++j;
    }
    if (j - i > best_len) {
      best_begin = i;
      best_len = j - i;
    }
    i = j;
  }
  std::vector<std::size_t> out(coherent.begin() + static_cast<std::ptrdiff_t>(best_begin),
                               coherent.begin() + static_cast<std::ptrdiff_t>(best_begin + best_len));
  while (!out.empty() && out.back() + ix.n_cycle > y.size()) out.pop_back();

  if (out.empty()) {
    double max_corr = 0.0, max_coh = 0.0;
    if (!mf.correlation.empty()) {
      max_corr = *std::max_element(mf.correlation.begin(), mf.correlation.end());
      max_coh = *std::max_element(mf.coherence.begin(), mf.coherence.end());
    }
    std::ostringstream os;
    os << "no direct chirp detected in '" << recording.id << "' channel " << channel << " (raw peaks "
       << mf.peaks.size() << ", coherent peaks " << coherent.size() << ", max correlation " << max_corr
       << ", max coherence " << max_coh << ")";
    fail(ErrorKind::Detection, os.str());
  }
  return out;
}

EchoFrameSeries segment_frames(const Recording& recording, std::size_t channel, std::span<const std::size_t> indices) {
  recording.validate();
  if (channel >= recording.channels.size()) fail(ErrorKind::Parameter, "channel out of range");
  if (indices.empty()) fail(ErrorKind::Segmentation, "no cycles to segment");
  const auto ix = cycle_indexing(recording.geometry, recording.params);
  const auto& y = recording.channels[channel];

  EchoFrameSeries fs;
  fs.channel_id = channel;
  fs.recording_id = recording.id;
  fs.params = recording.params;
  fs.geometry = recording.geometry;
  fs.direct_indices.assign(indices.begin(), indices.end());
  fs.direct_frames = Matrix(indices.size(), ix.n_tau);
  fs.reflect_frames = Matrix(indices.size(), ix.gate_width());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t start = indices[i];
    if (i > 0 && start <= indices[i - 1])
      fail(ErrorKind::Segmentation, "cycle " + std::to_string(i) + ": indices not strictly increasing");
    if (start + ix.n_max >= y.size())
      fail(ErrorKind::Segmentation, "cycle " + std::to_string(i) + " at sample " + std::to_string(start) +
                                        ": reflection gate runs past the end of the recording");
    std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(start), ix.n_tau, fs.direct_frames.row(i).begin());
    std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(start + ix.n_min), ix.gate_width(),
                fs.reflect_frames.row(i).begin());
  }
  return fs;
}

FeatureMatrix extract_f_ref(const EchoFrameSeries& frames) {
  return make_feature(frames, FeatureKind::Ref, frames.reflect_frames);
}

FeatureMatrix extract_f_renv(const EchoFrameSeries& frames) {
  const auto& in = frames.reflect_frames;
  Matrix out(in.rows, in.cols);
  for (std::size_t r = 0; r < in.rows; ++r) {
    const auto env = analytic_envelope(in.row(r));
    std::copy(env.begin(), env.end(), out.row(r).begin());
  }
  return make_feature(frames, FeatureKind::Renv, std::move(out));
}

FeatureMatrix extract_f_ir(const EchoFrameSeries& frames) {
  const auto& dir = frames.direct_frames;
  const auto& ref = frames.reflect_frames;
  const std::size_t width = ref.cols;
  const std::size_t n = std::max(width, dir.cols);
  const DeconvolutionOptions opts{frames.params.f0, frames.params.f1, frames.params.fs, 1e-6};

  Matrix out(ref.rows, width);
  std::vector<double> d(n), y(n);
  for (std::size_t r = 0; r < ref.rows; ++r) {
    std::fill(d.begin(), d.end(), 0.0);
    std::fill(y.begin(), y.end(), 0.0);
    std::copy(dir.row(r).begin(), dir.row(r).end(), d.begin());
    std::copy(ref.row(r).begin(), ref.row(r).end(), y.begin());
    std::vector<double> h;
    try {
      h = transfer_impulse_response(d, y, opts);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Degenerate) throw;
      fail(ErrorKind::Degenerate, "cycle " + std::to_string(r) + " of '" + frames.recording_id +
                                      "': direct wave is all zeros");
    }
    // Lags [0, n_max - n_min] cover the same physical range as the reflection gate.
    std::copy_n(h.begin(), width, out.row(r).begin());
  }
  return make_feature(frames, FeatureKind::Ir, std::move(out));
}

FeatureMatrix extract_f_ienv(const EchoFrameSeries& frames) {
  auto ir = extract_f_ir(frames);
  Matrix out(ir.values.rows, ir.values.cols);
  for (std::size_t r = 0; r < out.rows; ++r) {
    const auto env = analytic_envelope(ir.values.row(r));
    std::copy(env.begin(), env.end(), out.row(r).begin());
  }
  return make_feature(frames, FeatureKind::Ienv, std::move(out));
}

FeatureMatrix extract(const EchoFrameSeries& frames, FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Ref: return extract_f_ref(frames);
    case FeatureKind::Renv: return extract_f_renv(frames);
    case FeatureKind::Ir: return extract_f_ir(frames);
    case FeatureKind::Ienv: return extract_f_ienv(frames);
  }
  fail(ErrorKind::Parameter, "unknown feature kind");
}

std::vector<FeatureMatrix> extract_all(const Recording& recording, std::span<const FeatureKind> kinds) {
  std::vector<FeatureMatrix> out;
  if (kinds.empty()) return out;
  recording.validate();

  std::vector<EchoFrameSeries> per_channel;
  std::size_t cycles = SIZE_MAX;
  for (std::size_t ch = 0; ch < recording.channels.size(); ++ch) {
    const auto idx = locate_direct_waves(recording, ch);
    per_channel.push_back(segment_frames(recording, ch, idx));
    cycles = std::min(cycles, per_channel.back().cycles());
  }

  for (const auto kind : kinds) {
    std::vector<FeatureMatrix> parts;
    for (const auto& frames : per_channel) parts.push_back(extract(frames, kind));
    if (parts.size() == 1) {
      out.push_back(std::move(parts.front()));
      continue;
    }
    std::size_t width = 0;
    for (const auto& p : parts) width += p.values.cols;
    FeatureMatrix merged;
    merged.kind = kind;
    merged.values = Matrix(cycles, width);
    merged.provenance.recording_id = recording.id;
    merged.provenance.config_hash = extraction_config_hash(recording.params, recording.geometry, kind);
    std::size_t offset = 0;
    for (std::size_t ch = 0; ch < parts.size(); ++ch) {
      const auto& v = parts[ch].values;
      for (std::size_t r = 0; r < cycles; ++r)
        std::copy(v.row(r).begin(), v.row(r).end(), merged.values.row(r).begin() + static_cast<std::ptrdiff_t>(offset));
      offset += v.cols;
      merged.provenance.channels.push_back(ch);
    }
    out.push_back(std::move(merged));
  }
  return out;
}

std::vector<FeatureMatrix> split_windows(const FeatureMatrix& matrix, std::size_t window) {
  if (window == 0) fail(ErrorKind::Parameter, "window must be at least one cycle");
  const auto& v = matrix.values;
  if (v.rows < window)
    fail(ErrorKind::Segmentation, "recording '" + matrix.provenance.recording_id + "' has " + std::to_string(v.rows) +
                                      " cycles, fewer than the " + std::to_string(window) + "-cycle window");
  std::vector<FeatureMatrix> out;
  for (std::size_t w = 0; w + window <= v.rows; w += window) {
    FeatureMatrix piece;
    piece.kind = matrix.kind;
    piece.label = matrix.label;
    piece.provenance = matrix.provenance;
    piece.values = Matrix(window, v.cols);
    std::copy_n(v.values.begin() + static_cast<std::ptrdiff_t>(w * v.cols), window * v.cols, piece.values.values.begin());
    out.push_back(std::move(piece));
  }
  return out;
}

std::string extraction_config_hash(const ChirpParams& params, const SensingGeometry& geometry, FeatureKind kind) {
  return hex64(fnv1a64(to_config_text({params, geometry}) + "kind=" + std::string(to_string(kind)) + "\n"));
}

void save_feature_matrix(const FeatureMatrix& matrix, double fs, const std::filesystem::path& stem) {
  const auto& v = matrix.values;
  for (const double x : v.values)
    if (!std::isfinite(x)) fail(ErrorKind::Parameter, "feature matrix contains non-finite values");

  auto payload_path = stem;
  payload_path += ".f32";
  auto header_path = stem;
  header_path += ".hdr";

  std::vector<char> bytes(v.values.size() * 4);
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v.values[i]));
    for (int b = 0; b < 4; ++b) bytes[4 * i + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  std::ofstream out(payload_path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + payload_path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed for " + payload_path.string());

  std::ostringstream hdr;
  hdr << "format = f32le-rowmajor\n"
      << "kind = " << to_string(matrix.kind) << '\n'
      << "N = " << v.rows << '\n'
      << "W = " << v.cols << '\n'
      << "label = " << (matrix.label ? std::string(to_string(*matrix.label)) : std::string("none")) << '\n'
      << "fs = " << fs << '\n'
      << "config_hash = " << matrix.provenance.config_hash << '\n'
      << "recording = " << matrix.provenance.recording_id << '\n'
      << "channels = ";
  for (std::size_t i = 0; i < matrix.provenance.channels.size(); ++i)
    hdr << (i ? "," : "") << matrix.provenance.channels[i];
  hdr << '\n';
  std::ofstream h(header_path, std::ios::binary | std::ios::trunc);
  if (!h) fail(ErrorKind::Io, "cannot write " + header_path.string());
  h << hdr.str();
  if (!h) fail(ErrorKind::Io, "write failed for " + header_path.string());
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& stem, double* fs) {
  auto payload_path = stem;
  payload_path += ".f32";
  auto header_path = stem;
  header_path += ".hdr";

  std::ifstream h(header_path);
  if (!h) fail(ErrorKind::Io, "cannot open " + header_path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(h, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorKind::Io, header_path.string() + ": missing '" + key + "'");
    return it->second;
  };
  if (get("format") != "f32le-rowmajor") fail(ErrorKind::Io, header_path.string() + ": unsupported format");

  FeatureMatrix m;
  const auto kind = parse_feature_kind(get("kind"));
  if (!kind) fail(ErrorKind::Io, header_path.string() + ": unknown kind");
  m.kind = *kind;
  std::size_t rows = 0, cols = 0;
  try {
    rows = std::stoull(get("N"));
    cols = std::stoull(get("W"));
    if (fs) *fs = std::stod(get("fs"));
  } catch (const std::logic_error&) {
    fail(ErrorKind::Io, header_path.string() + ": malformed number");
  }
  if (const auto& label = get("label"); label != "none") {
    m.label = parse_action(label);
    if (!m.label) fail(ErrorKind::Io, header_path.string() + ": unknown label '" + label + "'");
  }
  m.provenance.config_hash = get("config_hash");
  m.provenance.recording_id = get("recording");
  std::istringstream chs(get("channels"));
  for (std::string tok; std::getline(chs, tok, ',');)
    if (!tok.empty()) m.provenance.channels.push_back(std::stoull(tok));

  std::ifstream in(payload_path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + payload_path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != rows * cols * 4) fail(ErrorKind::Io, payload_path.string() + ": payload size does not match N x W");
  m.values = Matrix(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(bytes[4 * i]) | (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                               (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                               (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
    m.values.values[i] = std::bit_cast<float>(bits);
  }
  return m;
}

}  // namespace uar
