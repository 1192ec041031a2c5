#include "codetopics/manifest.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "codetopics/errors.hpp"
#include "codetopics/sha256.hpp"

namespace codetopics {

std::string RunManifest::now_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void RunManifest::add_output(const std::string& path) {
    outputs.emplace_back(std::filesystem::path(path).filename().string(),
                         sha256_file(path));
}

void RunManifest::save(const std::string& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["tool_version"] = tool_version;
    j["created_utc"] = created_utc;
    j["base_seed"] = base_seed;
    j["repeats"] = repeats;
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [name, hash] : outputs) files[name] = hash;
    j["outputs"] = files;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace codetopics
