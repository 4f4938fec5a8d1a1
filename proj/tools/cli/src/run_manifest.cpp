#include "ringloc_cli/run_manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ringloc/error.hpp"

namespace ringloc::cli {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string required_string(const nlohmann::json& j, const char* key, std::size_t index) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw ParseError("manifest frame " + std::to_string(index) + ": missing string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

}  // namespace

void RunManifest::validate() const {
  std::set<std::string> seen;
  for (const auto& f : frames) {
    if (f.id.empty()) throw InvalidArgument("manifest: empty frame id");
    if (!seen.insert(f.id).second) throw InvalidArgument("manifest: duplicate frame id " + f.id);
    for (const auto* p : {&f.gray, &f.depth}) {
      if (!fs::exists(*p)) throw IoError("manifest: " + p->string() + " not found");
    }
    if (f.roi && !fs::exists(*f.roi)) throw IoError("manifest: " + f.roi->string() + " not found");
  }
  if (!(depth_scale > 0.0)) throw InvalidArgument("manifest: depth_scale must be > 0");
}

RunManifest parse_run_manifest(std::string_view document, const fs::path& base_dir) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  if (!root.is_object() || !root.contains("frames") || !root["frames"].is_array()) {
    throw ParseError("manifest: expected an object with a \"frames\" array");
  }
  RunManifest m;
  try {
    if (root.contains("depth_scale")) m.depth_scale = root["depth_scale"].get<double>();
    if (root.contains("output_dir")) m.output_dir = resolve(base_dir, root["output_dir"].get<std::string>());
    if (root.contains("intrinsics")) {
      const auto& k = root["intrinsics"];
      CameraIntrinsics intr;
      intr.fx = k.at("fx").get<double>();
      intr.fy = k.at("fy").get<double>();
      intr.cx = k.at("cx").get<double>();
      intr.cy = k.at("cy").get<double>();
      intr.width = k.value("width", 0);
      intr.height = k.value("height", 0);
      m.intrinsics = intr;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }

  const auto& frames = root["frames"];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (!f.is_object()) throw ParseError("manifest frame " + std::to_string(i) + " is not an object");
    ManifestFrame frame;
    frame.id = required_string(f, "id", i);
    frame.gray = resolve(base_dir, required_string(f, "gray", i));
    frame.depth = resolve(base_dir, required_string(f, "depth", i));
    if (f.contains("roi") && !f["roi"].is_null()) frame.roi = resolve(base_dir, required_string(f, "roi", i));
    if (f.contains("value") && f["value"].is_number()) frame.value = f["value"].get<double>();
    m.frames.push_back(std::move(frame));
  }
  return m;
}

RunManifest load_run_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_manifest(ss.str(), path.parent_path());
}

}  // namespace ringloc::cli
