#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hseq {

// SHA-1 over an arbitrary byte string, returned as 40 lowercase hex chars.
// Used for segment/evidence ids and cache keys, where a stable, well-known
// digest matters more than cryptographic strength.
std::string sha1_hex(std::string_view data);

}  // namespace hseq
