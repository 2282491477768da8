#ifndef ION_MANIFEST_HPP
#define ION_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace ion {

std::uint64_t fnv1a_bytes(const void* data, std::size_t n);
std::uint64_t fnv1a_file(const std::string& path);

struct ManifestEntry {
    std::string path;
    std::uint64_t hash = 0;
    std::uint64_t bytes = 0;
};

// Writes manifest.json into out_dir: config hash, tool version, wall time,
// and one entry (path, content hash, size) per output file.
void write_manifest(const std::string& out_dir, const std::string& config_json,
                    const std::vector<std::string>& outputs,
                    double wall_seconds);

} // namespace ion

#endif
