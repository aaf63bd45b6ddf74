#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rfsc {

/// One dataset entry. Movement rows fill speed/distance and leave
/// workflow empty with set_id 0; workflow rows carry the workflow name
/// and capture-set id instead.
struct ManifestRow {
  std::string path;  // relative to the manifest's directory unless absolute
  std::string label;
  std::string kind;  // "movement" or "workflow"
  double speed_mm_s = 0.0;
  double distance_mm = 0.0;
  std::string workflow;
  int set_id = 0;
  std::uint64_t seed = 0;
};

struct Manifest {
  std::vector<ManifestRow> rows;
  std::filesystem::path directory;
  std::uint64_t digest = 0;  // FNV-1a of the csv bytes, pins train/test splits

  std::filesystem::path resolve(const ManifestRow& row) const;
};

inline constexpr const char* kManifestHeader =
    "path,label,kind,speed_mm_s,distance_mm,workflow,set_id,seed";

Manifest read_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRow>& rows);

}  // namespace rfsc
