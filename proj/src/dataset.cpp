#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>

#include "pothole/pipeline.hpp"

namespace pothole {
namespace fs = std::filesystem;

namespace {

bool is_raster(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm" || ext == ".pnm" || ext == ".jpg" || ext == ".jpeg";
}

/// stem -> path for every raster directly inside `dir`.
std::map<std::string, fs::path> rasters_in(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_raster(e.path())) out.emplace(e.path().stem().string(), e.path());
  }
  return out;
}

std::optional<fs::path> first_dir(const fs::path& base, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (fs::is_directory(base / n)) return base / n;
  }
  return std::nullopt;
}

struct GroupDirs {
  std::optional<fs::path> primary;  // disparity or transformed
  std::optional<fs::path> transformed;
  std::optional<fs::path> rgb;
  std::optional<fs::path> label;
};

void pair_group(const std::string& prefix, const GroupDirs& dirs, bool primary_is_transformed,
                DatasetListing& out) {
  const auto primary = rasters_in(*dirs.primary);
  const auto labels = dirs.label ? rasters_in(*dirs.label) : std::map<std::string, fs::path>{};
  const auto tdisp = dirs.transformed ? rasters_in(*dirs.transformed) : std::map<std::string, fs::path>{};
  const auto rgb = dirs.rgb ? rasters_in(*dirs.rgb) : std::map<std::string, fs::path>{};
  for (const auto& [stem, path] : primary) {
    const auto lab = labels.find(stem);
    if (lab == labels.end()) {
      out.warnings.push_back("no label for " + path.string() + "; sample skipped");
      continue;
    }
    DatasetSample s;
    s.id = prefix.empty() ? stem : prefix + "/" + stem;
    s.label = lab->second;
    if (primary_is_transformed) {
      s.transformed = path;
    } else {
      s.disparity = path;
      if (auto t = tdisp.find(stem); t != tdisp.end()) s.transformed = t->second;
    }
    if (auto r = rgb.find(stem); r != rgb.end()) s.rgb = r->second;
    out.samples.push_back(std::move(s));
  }
  for (const auto& [stem, path] : labels) {
    if (!primary.contains(stem)) out.warnings.push_back("label without input: " + path.string());
  }
}

void load_grouped(const fs::path& root, bool transformed_only, DatasetListing& out) {
  auto dirs_of = [&](const fs::path& base) -> std::optional<GroupDirs> {
    GroupDirs d;
    d.label = first_dir(base, {"label", "labels", "gt"});
    d.rgb = first_dir(base, {"rgb", "image", "images"});
    d.transformed = first_dir(base, {"tdisp", "transformed_disparity", "tdisparity"});
    d.primary = transformed_only ? d.transformed : first_dir(base, {"disp", "disparity"});
    if (!d.primary) return std::nullopt;
    if (!d.label) {
      out.warnings.push_back("no label directory under " + base.string());
      return std::nullopt;
    }
    return d;
  };
  if (auto d = dirs_of(root)) {
    pair_group("", *d, transformed_only, out);
    return;
  }
  std::vector<fs::path> groups;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) groups.push_back(e.path());
  }
  std::sort(groups.begin(), groups.end());
  for (const auto& g : groups) {
    if (auto d = dirs_of(g)) pair_group(g.filename().string(), *d, transformed_only, out);
  }
}

constexpr std::array<const char*, 6> kSuffixes = {"_gt", "_label", "_mask", "_pred", "_disp", "_tdisp"};

void load_flat(const fs::path& root, DatasetListing& out) {
  std::map<std::string, std::map<std::string, fs::path>> by_id;  // id -> role -> path
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_regular_file() || !is_raster(e.path())) continue;
    const std::string stem = e.path().stem().string();
    for (const char* role : {"_disp", "_tdisp", "_rgb", "_gt", "_label"}) {
      const std::string suffix(role);
      if (stem.size() > suffix.size() && stem.ends_with(suffix)) {
        by_id[stem.substr(0, stem.size() - suffix.size())][suffix] = e.path();
        break;
      }
    }
  }
  for (const auto& [id, roles] : by_id) {
    auto get = [&](const char* r) -> std::optional<fs::path> {
      const auto it = roles.find(r);
      return it == roles.end() ? std::nullopt : std::optional<fs::path>(it->second);
    };
    auto label = get("_gt");
    if (!label) label = get("_label");
    const auto disp = get("_disp");
    const auto tdisp = get("_tdisp");
    if (!disp && !tdisp) {
      if (label) out.warnings.push_back("label without input: " + label->string());
      continue;
    }
    if (!label) {
      out.warnings.push_back("no label for " + (disp ? *disp : *tdisp).string() + "; sample skipped");
      continue;
    }
    out.samples.push_back(DatasetSample{id, disp, tdisp, get("_rgb"), *label});
  }
}

}  // namespace

DatasetLayout parse_layout(std::string_view text) {
  if (text == "stereo-potholes") return DatasetLayout::stereo_potholes;
  if (text == "pothole600") return DatasetLayout::pothole600;
  if (text == "flat-pairs") return DatasetLayout::flat_pairs;
  throw Error(Errc::unknown_layout, "unknown dataset layout: " + std::string(text));
}

DatasetListing load_dataset(const fs::path& root, DatasetLayout layout) {
  if (!fs::is_directory(root)) throw Error(Errc::io, "dataset root is not a directory: " + root.string());
  DatasetListing out;
  switch (layout) {
    case DatasetLayout::stereo_potholes: load_grouped(root, false, out); break;
    case DatasetLayout::pothole600: load_grouped(root, true, out); break;
    case DatasetLayout::flat_pairs: load_flat(root, out); break;
  }
  std::sort(out.samples.begin(), out.samples.end(),
            [](const DatasetSample& a, const DatasetSample& b) { return a.id < b.id; });
  return out;
}

std::string sample_key(const fs::path& file) {
  std::string stem = file.stem().string();
  for (const char* s : kSuffixes) {
    const std::string suffix(s);
    if (stem.size() > suffix.size() && stem.ends_with(suffix)) return stem.substr(0, stem.size() - suffix.size());
  }
  return stem;
}

}  // namespace pothole
