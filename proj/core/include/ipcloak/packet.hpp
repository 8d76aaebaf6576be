#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ipcloak/ip.hpp"

namespace ipcloak {

enum class NetForm { V4, V6 };

// Structured view of one datagram. ttl, dscp_ecn and protocol double as
// hop_limit, traffic_class and next_header when the view is in IPv6 form;
// translation between the forms copies them straight across. For UDP the
// payload holds the bytes after the UDP header; for anything else it holds
// the raw transport bytes. Checksums and length fields are recomputed on
// serialization, never stored.
struct PacketView {
    NetForm net = NetForm::V4;

    uint32_t src4 = 0;
    uint32_t dst4 = 0;
    uint16_t ident = 0;
    bool dont_fragment = false;
    bool more_fragments = false;
    uint16_t frag_offset = 0; // 8-byte units

    Ipv6Address src6{};
    Ipv6Address dst6{};
    bool has_ext_headers = false;

    uint8_t ttl = 0;
    uint8_t dscp_ecn = 0;
    uint8_t protocol = 0;

    bool is_udp = false;
    uint16_t sport = 0;
    uint16_t dport = 0;
    std::vector<uint8_t> payload;

    bool is_fragment() const { return more_fragments || frag_offset != 0; }
};

// Ethernet II framing. Parsing rejects frames whose length fields are
// inconsistent with the captured bytes (trailing link padding is tolerated).
// IPv4 options are skipped; fragments parse with their transport left raw;
// an IPv6 extension-header chain is flagged, not walked.
std::optional<PacketView> parse_frame(std::span<const uint8_t> frame);

// Emits a complete frame with fixed locally administered MACs, IHL = 5,
// freshly computed lengths and checksums. A UDP checksum that computes to
// zero is transmitted as 0xffff in both forms.
std::vector<uint8_t> serialize_frame(const PacketView& pkt);

} // namespace ipcloak
