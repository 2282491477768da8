#include "ion/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "ion/types.hpp"

namespace ion {

std::uint64_t fnv1a_bytes(const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("fnv1a_file: cannot open " + path);
    std::uint64_t h = 14695981039346656037ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

void write_manifest(const std::string& out_dir, const std::string& config_json,
                    const std::vector<std::string>& outputs,
                    double wall_seconds) {
    nlohmann::json j;
    j["tool"] = "ion";
    j["version"] = "1.0.0";
    j["config_hash"] = fnv1a_bytes(config_json.data(), config_json.size());
    j["wall_seconds"] = wall_seconds;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& path : outputs) {
        std::ifstream in(path, std::ios::binary | std::ios::ate);
        std::uint64_t size = in ? std::uint64_t(in.tellg()) : 0;
        files.push_back({{"path", path}, {"fnv1a", fnv1a_file(path)}, {"bytes", size}});
    }
    j["outputs"] = files;
    std::ofstream out(out_dir + "/manifest.json", std::ios::binary);
    if (!out) throw Error("write_manifest: cannot write to " + out_dir);
    out << j.dump(2) << "\n";
}

} // namespace ion
