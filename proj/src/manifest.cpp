#include "dsenh/manifest.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dsenh {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split split_from_name(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw FormatError("manifest: unknown split '" + s + "'");
}

namespace {

ClipRole role_from_name(const std::string& s) {
  if (s == "clean") return ClipRole::Clean;
  if (s == "noise") return ClipRole::Noise;
  throw FormatError("manifest: unknown role '" + s + "'");
}

NoiseType noise_type_from_name(const std::string& s) {
  if (s == "constant") return NoiseType::Constant;
  if (s == "dynamic") return NoiseType::Dynamic;
  if (s == "-") return NoiseType::None;
  throw FormatError("manifest: unknown noise type '" + s + "'");
}

}  // namespace

std::vector<ManifestEntry> DatasetManifest::select(ClipRole role,
                                                   Split split) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.role == role && e.split == split) out.push_back(e);
  }
  return out;
}

void DatasetManifest::validate() const {
  std::map<std::string, Split> noise_split;
  for (const auto& e : entries) {
    require(!e.id.empty(), "manifest: empty id");
    require(!e.path.empty(), "manifest: empty path for id " + e.id);
    if (e.role == ClipRole::Noise) {
      require(e.noise_type != NoiseType::None,
              "manifest: noise entry '" + e.id + "' needs a noise type");
      auto it = noise_split.find(e.id);
      if (it == noise_split.end()) {
        noise_split.emplace(e.id, e.split);
      } else {
        require(it->second == e.split,
                "manifest: noise id '" + e.id + "' appears in multiple splits");
      }
    }
  }
}

DatasetManifest parse_manifest(const std::string& text) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string role, split, ntype, id;
    if (!(ls >> role)) continue;  // blank
    std::string path;
    if (!(ls >> split >> ntype >> id) || !std::getline(ls, path)) {
      throw FormatError("manifest: malformed line " + std::to_string(lineno));
    }
    const size_t first = path.find_first_not_of(" \t");
    if (first == std::string::npos) {
      throw FormatError("manifest: missing path on line " +
                        std::to_string(lineno));
    }
    path = path.substr(first);
    while (!path.empty() && (path.back() == ' ' || path.back() == '\t' ||
                             path.back() == '\r')) {
      path.pop_back();
    }
    ManifestEntry e;
    e.role = role_from_name(role);
    e.split = split_from_name(split);
    e.noise_type = noise_type_from_name(ntype);
    e.id = id;
    e.path = path;
    m.entries.push_back(std::move(e));
  }
  m.validate();
  return m;
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("manifest: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

}  // namespace dsenh
