#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace codetopics {

inline constexpr const char* kToolVersion = "0.1.0";

// Inventory of one command invocation. Timestamps live only here, never in
// the artifacts themselves, so identical inputs give byte-identical outputs.
struct RunManifest {
    std::string command;
    std::string config_hash;
    std::string tool_version = kToolVersion;
    std::string created_utc;
    std::uint64_t base_seed = 0;
    int repeats = 0;
    std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256

    void add_output(const std::string& path);
    void save(const std::string& path) const;

    static std::string now_utc();
};

}  // namespace codetopics
