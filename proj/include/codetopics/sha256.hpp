#pragma once

#include <cstdint>
#include <string>

namespace codetopics {

// FIPS 180-4 SHA-256; returns the lowercase hex digest.
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

}  // namespace codetopics
