#pragma once

#include <cstddef>
#include <string>

namespace pcfeat::cli {

/// Lowercase hex SHA-256 digest of a byte buffer.
std::string sha256_hex(const void* data, std::size_t len);

/// Digest of a file's bytes, streamed in chunks.
std::string sha256_file(const std::string& path);

}  // namespace pcfeat::cli
