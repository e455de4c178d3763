#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fmad/regions.hpp"

namespace fmad {

// Row of a manifest CSV with header `path,label,attack_type,landmarks`.
// Relative paths are resolved against the manifest's directory on load.
struct ManifestRecord {
  std::filesystem::path image_path;
  int label = 0;  // 1 bona fide, 0 morph
  std::string attack_type;
  std::filesystem::path landmark_path;  // empty when absent
};

struct Manifest {
  std::vector<ManifestRecord> records;
};

int parse_label(std::string_view text);
std::string_view label_name(int label);

// Throws FormatError on malformed rows, IoError on missing files.
Manifest read_manifest(const std::filesystem::path& path, bool check_files = true);

// Paths are written relative to the manifest directory when possible.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

// 106 (x, y) pairs separated by whitespace and/or commas.
LandmarkSet read_landmarks(const std::filesystem::path& path);
LandmarkSet parse_landmarks(std::string_view text);
void write_landmarks(const std::filesystem::path& path, const LandmarkSet& landmarks);

}  // namespace fmad
