#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ule {

inline constexpr const char* TOOL_VERSION = "0.1.0";

// FNV-1a 64-bit over the file bytes, rendered as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

// One manifest per artifact-producing command, written beside the output.
// Carries wall-clock timing, so manifests are excluded from byte-identity
// comparisons between reruns.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;  // effective configuration
    std::map<std::string, std::string> input_digests;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    double duration_seconds = 0.0;

    void write(const std::filesystem::path& beside_output) const;
};

}  // namespace ule
