#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "ipcloak/ip.hpp"
#include "ipcloak/packet.hpp"

namespace ipcloak {

enum class DropReason {
    UnmappedDst,
    UnmappedSrc,
    Expired,
    ForeignPrefix,
    AddrValidation,
    Fragment,
    UnsupportedExtension,
    NonUdp,
    Malformed,
};

const char* drop_reason_name(DropReason r);

// Pre-resolved server addresses, bijective by construction: loading rejects a
// duplicate on either side.
struct ServerMap {
    std::unordered_map<uint32_t, Ipv6Address> ip4_to_6;
    std::unordered_map<Ipv6Address, uint32_t, Ipv6AddressHash> ip6_to_4;

    size_t size() const { return ip4_to_6.size(); }
};

// Throws std::invalid_argument naming the offending record on duplicates.
ServerMap load_server_map(const std::vector<std::pair<uint32_t, Ipv6Address>>& records);

// One record per line, "<ipv4-dotted>,<ipv6-textual>"; '#' lines and blank
// lines are skipped. Throws with the line number on parse errors.
ServerMap load_server_map_file(const std::string& path);

using TranslateResult = std::variant<PacketView, DropReason>;

// Stateless header rewrites. TTL/hop-limit is copied, never decremented, so
// a 6to4-of-4to6 round trip is the identity on every preserved field.
// Fragments cannot be represented on the IPv6 side and are refused; the
// return path emits identification 0 with DF set, refusing re-fragmentation.
// Non-UDP transports are carried as opaque bytes.
TranslateResult translate_4to6(const PacketView& pkt, const Ipv6Address& new_src6,
                               const Ipv6Address& new_dst6);
TranslateResult translate_6to4(const PacketView& pkt, uint32_t new_src4,
                               uint32_t new_dst4);

} // namespace ipcloak
