#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "crispbench/cli.hpp"
#include "crispbench/parallel.hpp"

namespace crispbench::cli {

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string require_string(const Json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ManifestError("line " + std::to_string(line) + ": \"" + key + "\" must be a string");
  }
  return j[key].get<std::string>();
}

}  // namespace

DatasetManifest parse_manifest(std::istream& in, const fs::path& base_dir) {
  DatasetManifest manifest;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ManifestError("line " + std::to_string(line) + ": " + e.what());
    }
    if (!j.is_object()) {
      throw ManifestError("line " + std::to_string(line) + ": expected a JSON object");
    }
    if (!j.contains("id")) {
      if (j.contains("dataset")) manifest.dataset = require_string(j, "dataset", line);
      if (j.contains("dims")) {
        manifest.dims_policy = require_string(j, "dims", line);
        if (manifest.dims_policy != "strict") {
          throw ManifestError("line " + std::to_string(line) +
                              ": only the \"strict\" dims policy is supported");
        }
      }
      continue;
    }
    ManifestEntry entry;
    entry.id = require_string(j, "id", line);
    if (!ids.insert(entry.id).second) {
      throw ManifestError("line " + std::to_string(line) + ": duplicate id " + entry.id);
    }
    entry.pred = resolve(base_dir, require_string(j, "pred", line));
    if (!j.contains("gt") || !j["gt"].is_array() || j["gt"].empty()) {
      throw ManifestError("line " + std::to_string(line) +
                          ": \"gt\" must be a non-empty array of paths");
    }
    for (const auto& g : j["gt"]) {
      if (!g.is_string()) {
        throw ManifestError("line " + std::to_string(line) + ": gt paths must be strings");
      }
      entry.gt.push_back(resolve(base_dir, g.get<std::string>()));
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

void write_manifest(std::ostream& out, const DatasetManifest& manifest) {
  if (!manifest.dataset.empty()) {
    Json meta;
    meta["dataset"] = manifest.dataset;
    meta["dims"] = manifest.dims_policy;
    out << meta.dump() << '\n';
  }
  for (const auto& e : manifest.entries) {
    Json j;
    j["id"] = e.id;
    j["pred"] = e.pred.string();
    Json gt = Json::array();
    for (const auto& g : e.gt) gt.push_back(g.string());
    j["gt"] = std::move(gt);
    out << j.dump() << '\n';
  }
}

std::vector<fs::path> DatasetManifest::missing_files() const {
  std::vector<fs::path> missing;
  for (const auto& e : entries) {
    if (!fs::exists(e.pred)) missing.push_back(e.pred);
    for (const auto& g : e.gt) {
      if (!fs::exists(g)) missing.push_back(g);
    }
  }
  return missing;
}

int resolve_jobs(std::optional<int> flag) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("CRISPBENCH_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return default_jobs();
}

}  // namespace crispbench::cli
