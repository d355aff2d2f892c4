#ifndef MLSA_SHA256_HPP
#define MLSA_SHA256_HPP

#include <string>
#include <string_view>

namespace mlsa {

/// Hex-encoded SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// Hex-encoded SHA-256 of a file's contents. Throws on unreadable file.
std::string sha256_file_hex(const std::string& path);

} // namespace mlsa

#endif
