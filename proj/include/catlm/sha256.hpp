#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace catlm {

// Streaming SHA-256 (FIPS 180-4). Used for manifest content hashes.
class Sha256 {
public:
    Sha256();
    void update(const void* data, size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::string hex_digest();  // finalizes; the object must not be reused

private:
    void process_block(const unsigned char* block);

    uint32_t state_[8];
    unsigned char buffer_[64];
    size_t buffer_len_ = 0;
    uint64_t total_bits_ = 0;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace catlm
