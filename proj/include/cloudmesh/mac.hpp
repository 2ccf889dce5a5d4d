#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "cloudmesh/types.hpp"

namespace cloudmesh {

// Substrate MACs carry the tenant id in bits 47..32 and a tenant-local
// 32-bit id in bits 31..0. Tenant-facing virtual MACs are opaque 48-bit
// values with no structure imposed.
using TenantId = std::uint16_t;

constexpr Mac kMacMask = 0xFFFFFFFFFFFFULL;

inline Mac encode_mac(TenantId tenant, std::uint32_t local) {
  return (static_cast<Mac>(tenant) << 32) | static_cast<Mac>(local);
}

inline std::pair<TenantId, std::uint32_t> decode_mac(Mac mac) {
  return {static_cast<TenantId>((mac >> 32) & 0xFFFF),
          static_cast<std::uint32_t>(mac & 0xFFFFFFFF)};
}

inline std::string mac_to_string(Mac mac) {
  char buf[18];
  std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x",
                static_cast<unsigned>((mac >> 40) & 0xFF),
                static_cast<unsigned>((mac >> 32) & 0xFF),
                static_cast<unsigned>((mac >> 24) & 0xFF),
                static_cast<unsigned>((mac >> 16) & 0xFF),
                static_cast<unsigned>((mac >> 8) & 0xFF),
                static_cast<unsigned>(mac & 0xFF));
  return buf;
}

inline Mac mac_from_string(const std::string& s) {
  unsigned b[6];
  if (std::sscanf(s.c_str(), "%x:%x:%x:%x:%x:%x", &b[0], &b[1], &b[2], &b[3],
                  &b[4], &b[5]) != 6)
    throw Error(Errc::MalformedScenario, "bad MAC string: " + s);
  Mac mac = 0;
  for (unsigned v : b) {
    if (v > 0xFF) throw Error(Errc::MalformedScenario, "bad MAC octet: " + s);
    mac = (mac << 8) | v;
  }
  return mac;
}

}  // namespace cloudmesh
