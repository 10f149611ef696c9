#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace synapseroute {

// Self-contained SHA-256 used for content-addressed cache keys and request
// digests. Verified against the NIST example vectors in the test suite.
std::array<std::uint8_t, 32> sha256(std::string_view data);

// Lowercase hex digest of sha256(data).
std::string sha256_hex(std::string_view data);

}  // namespace synapseroute
