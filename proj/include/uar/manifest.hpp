#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "uar/action.hpp"
#include "uar/chirp.hpp"
#include "uar/features.hpp"

namespace uar {

struct ManifestRecord {
  std::string id;
  ActionClass label = ActionClass::Standing;
  std::string subject;
  std::string room;
  std::filesystem::path path;  // relative to the manifest directory
  std::uint64_t seed = 0;

  bool operator==(const ManifestRecord&) const = default;
};

struct DatasetManifest {
  std::filesystem::path base_dir;
  std::vector<ManifestRecord> records;

  std::filesystem::path resolve(const ManifestRecord& r) const { return r.path.is_absolute() ? r.path : base_dir / r.path; }
};

inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kSensingFile = "sensing.cfg";

/// One JSON object per line: {"id","label","subject","room","seed","path"}.
std::string to_manifest_line(const ManifestRecord& record);
ManifestRecord parse_manifest_line(std::string_view line);

/// Throws ErrorKind::Io on duplicate ids or (when check_files) missing WAVs.
DatasetManifest load_manifest(const std::filesystem::path& path, bool check_files = true);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// sensing.cfg next to the manifest when present, defaults otherwise.
SensingConfig load_dataset_sensing(const DatasetManifest& manifest);

Recording load_recording(const DatasetManifest& manifest, const ManifestRecord& record, const SensingConfig& sensing);

}  // namespace uar
