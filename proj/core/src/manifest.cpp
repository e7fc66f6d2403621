#include "ule/manifest.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ule/error.hpp"

namespace ule {

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot digest missing file: " + path.string());
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buffer[1 << 16];
    while (in) {
        in.read(buffer, sizeof buffer);
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(hash));
    return out;
}

void RunManifest::write(const std::filesystem::path& beside_output) const {
    nlohmann::json j;
    j["command"] = command;
    j["tool_version"] = TOOL_VERSION;
    j["config"] = config;
    j["inputs"] = input_digests;
    j["outputs"] = outputs;
    j["seed"] = seed;
    j["duration_seconds"] = duration_seconds;
    const std::filesystem::path path = beside_output.string() + ".manifest.json";
    std::ofstream out(path);
    if (!out) throw InputError("cannot write manifest: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace ule
