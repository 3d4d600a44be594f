#include "uar/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "uar/errors.hpp"
#include "uar/wav.hpp"

namespace uar {

using ordered_json = nlohmann::ordered_json;

std::string to_manifest_line(const ManifestRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["label"] = std::string(to_string(r.label));
  j["subject"] = r.subject;
  j["room"] = r.room;
  j["seed"] = r.seed;
  j["path"] = r.path.generic_string();
  return j.dump();
}

ManifestRecord parse_manifest_line(std::string_view line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, std::string("malformed manifest line: ") + e.what());
  }
  ManifestRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    const auto label = j.at("label").get<std::string>();
    const auto parsed = parse_action(label);
    if (!parsed) fail(ErrorKind::Io, "manifest record '" + r.id + "': unknown label '" + label + "'");
    r.label = *parsed;
    r.subject = j.at("subject").get<std::string>();
    r.room = j.at("room").get<std::string>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.path = j.at("path").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Io, std::string("manifest record missing field: ") + e.what());
  }
  if (r.id.empty()) fail(ErrorKind::Io, "manifest record with empty id");
  return r;
}

DatasetManifest load_manifest(const std::filesystem::path& path, bool check_files) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open manifest " + path.string());
  DatasetManifest m;
  m.base_dir = path.parent_path();
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto rec = parse_manifest_line(line);
    if (!seen.insert(rec.id).second) fail(ErrorKind::Io, "duplicate manifest id '" + rec.id + "'");
    if (check_files && !std::filesystem::exists(m.resolve(rec)))
      fail(ErrorKind::Io, "manifest record '" + rec.id + "': missing file " + m.resolve(rec).string());
    m.records.push_back(std::move(rec));
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& r : manifest.records) os << to_manifest_line(r) << '\n';
  // Write-then-rename keeps readers from ever seeing a half-written manifest.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write manifest " + tmp.string());
    out << os.str();
    if (!out) fail(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot move manifest into place: " + ec.message());
}

SensingConfig load_dataset_sensing(const DatasetManifest& manifest) {
  const auto cfg = manifest.base_dir / kSensingFile;
  return std::filesystem::exists(cfg) ? load_config(cfg) : SensingConfig{};
}

Recording load_recording(const DatasetManifest& manifest, const ManifestRecord& record, const SensingConfig& sensing) {
  auto wav = read_wav(manifest.resolve(record));
  Recording rec;
  rec.id = record.id;
  rec.fs = wav.sample_rate;
  rec.params = sensing.chirp;
  rec.geometry = sensing.geometry;
  rec.channels = std::move(wav.channels);
  if (rec.fs != rec.params.fs)
    fail(ErrorKind::Io, "recording '" + record.id + "' sample rate " + std::to_string(wav.sample_rate) +
                            " Hz does not match the configured fs");
  return rec;
}

}  // namespace uar
