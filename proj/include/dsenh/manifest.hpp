#ifndef DSENH_MANIFEST_HPP
#define DSENH_MANIFEST_HPP

#include <string>
#include <vector>

#include "dsenh/common.hpp"

namespace dsenh {

enum class ClipRole { Clean, Noise };
enum class NoiseType { Constant, Dynamic, None };
enum class Split { Train, Val, Test };

const char* split_name(Split s);
Split split_from_name(const std::string& s);

struct ManifestEntry {
  ClipRole role = ClipRole::Clean;
  Split split = Split::Train;
  NoiseType noise_type = NoiseType::None;
  std::string id;
  std::string path;
};

// Line-delimited clip index: `role split noise_type id path`, UTF-8, with
// '#' comments and blank lines ignored. noise_type is '-' for clean rows.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> select(ClipRole role, Split split) const;

  // Structural checks: fields valid, no noise source id in more than one
  // split. File existence is checked when clips are loaded.
  void validate() const;
};

DatasetManifest parse_manifest(const std::string& text);
DatasetManifest load_manifest(const std::string& path);

}  // namespace dsenh

#endif
