#pragma once

// Internal helpers shared by the experiment and plot translation units:
// manifest access and bulk trace loading. Not part of the public surface.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "resample_es/config.hpp"
#include "resample_es/strategy.hpp"

namespace resample_es::detail {

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kManifestFormat = "resample-es-manifest/1";

nlohmann::json load_manifest(const std::filesystem::path& dir);

void write_manifest(const std::filesystem::path& dir,
                    const nlohmann::json& manifest);

nlohmann::json file_entry(const std::string& name, const std::string& kind,
                          std::string_view content);

// Traces listed in the manifest, grouped by resampling count and ordered
// by run index, with problem and strategy fields restored from the
// embedded config. Hash mismatches and missing files raise TraceError.
struct TraceSet {
  ExperimentConfig config{};
  std::map<int, std::vector<RunTrace>> by_y{};
};

TraceSet load_traces(const std::filesystem::path& dir,
                     const nlohmann::json& manifest);

}  // namespace resample_es::detail
