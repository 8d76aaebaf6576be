#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ipcloak/ip.hpp"
#include "ipcloak/packet.hpp"
#include "ipcloak/rng.hpp"

namespace ipcloak {

enum class TrafficProto { Dns, Ntp, Wireguard };

struct TrafficSpec {
    TrafficProto proto = TrafficProto::Dns;
    uint64_t count = 0;
};

// "dns:1000", "ntp:50", "wireguard:200"
std::optional<TrafficSpec> parse_traffic_spec(std::string_view text);

// Minimal protocol-shaped datagrams, not protocol-valid sessions:
// dns  -> UDP/53, well-formed single-question query
// ntp  -> UDP/123, 48-byte client packet (version 4, mode 3)
// wireguard -> UDP/51820, transport-data packets (type 4) whose receiver
//              index carries a synthetic peer id; each peer keeps a fixed
//              source address and port drawn from the internal prefix
// Destinations cycle through the server list; sources are drawn from the
// internal prefix.
std::vector<PacketView> generate_traffic(const TrafficSpec& spec,
                                         const Ipv4Prefix& internal_prefix,
                                         const std::vector<uint32_t>& servers,
                                         EntropySource& ent);

// The receiver-peer view a WireGuard server keeps: latest source address
// per peer, so a per-packet address change never severs the mapping.
class PeerTable {
public:
    void observe(uint32_t peer, const Ipv6Address& src);
    std::optional<Ipv6Address> latest(uint32_t peer) const;
    size_t size() const { return latest_.size(); }

    // Peer id of a wireguard-shaped view (UDP/51820, type-4 payload),
    // read from the receiver index; nullopt for anything else.
    static std::optional<uint32_t> wireguard_peer(const PacketView& pkt);

    // Feeds every wireguard-shaped packet of a stream through observe,
    // keyed by the packet's own peer annotation.
    void observe_stream(const std::vector<PacketView>& stream);

private:
    std::unordered_map<uint32_t, Ipv6Address> latest_;
};

} // namespace ipcloak
