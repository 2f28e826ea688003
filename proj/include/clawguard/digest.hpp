#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace clawguard {

using Digest256 = std::array<std::uint8_t, 32>;

Digest256 sha256(const std::uint8_t* data, std::size_t len);
Digest256 sha256(std::string_view data);

// HMAC-SHA256 per RFC 2104. Keys of any length.
Digest256 hmac_sha256(std::string_view key, std::string_view message);
Digest256 hmac_sha256(const std::vector<std::uint8_t>& key, std::string_view message);

std::string digest_hex(const Digest256& d);

}  // namespace clawguard
