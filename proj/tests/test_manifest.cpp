#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "uar/errors.hpp"
#include "uar/manifest.hpp"

using namespace uar;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Usage;
}

}  // namespace

TEST_CASE("manifest lines round trip") {
  ManifestRecord r{"Rc-S1-walking-003", ActionClass::Walking, "S1", "Rc", "wav/x.wav", 0xdeadbeefcafeull};
  CHECK(parse_manifest_line(to_manifest_line(r)) == r);
  CHECK(to_manifest_line(r).find('\n') == std::string::npos);
}

TEST_CASE("malformed manifest lines are Io errors") {
  CHECK(kind_of([] { parse_manifest_line("{not json"); }) == ErrorKind::Io);
  CHECK(kind_of([] { parse_manifest_line(R"({"id":"a","label":"dancing","subject":"S1","room":"Ra","path":"p"})"); }) ==
        ErrorKind::Io);
  CHECK(kind_of([] { parse_manifest_line(R"({"id":"a","label":"sitting","room":"Ra","path":"p"})"); }) ==
        ErrorKind::Io);
  CHECK(kind_of([] { parse_manifest_line(R"({"id":"","label":"sitting","subject":"S1","room":"Ra","path":"p"})"); }) ==
        ErrorKind::Io);
}

TEST_CASE("manifest files reject duplicates and missing recordings") {
  const auto dir = std::filesystem::temp_directory_path() / "uar_test_manifest";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  DatasetManifest m;
  m.base_dir = dir;
  m.records.push_back({"a", ActionClass::Sitting, "S1", "Ra", "a.wav", 1});
  m.records.push_back({"b", ActionClass::Standing, "S2", "Ra", "b.wav", 2});
  save_manifest(m, dir / kManifestFile);
  CHECK(load_manifest(dir / kManifestFile, false).records == m.records);
  CHECK(kind_of([&] { load_manifest(dir / kManifestFile, true); }) == ErrorKind::Io);

  m.records.push_back(m.records.front());
  save_manifest(m, dir / kManifestFile);
  CHECK(kind_of([&] { load_manifest(dir / kManifestFile, false); }) == ErrorKind::Io);
  CHECK(kind_of([&] { load_manifest(dir / "missing.jsonl", false); }) == ErrorKind::Io);
  CHECK(load_dataset_sensing(m) == SensingConfig{});
  std::filesystem::remove_all(dir);
}
