#include "ipcloak/traffic.hpp"

#include <charconv>
#include <stdexcept>

namespace ipcloak {

std::optional<TrafficSpec> parse_traffic_spec(std::string_view text) {
    size_t colon = text.find(':');
    if (colon == std::string_view::npos)
        return std::nullopt;
    std::string_view proto = text.substr(0, colon);
    std::string_view count_s = text.substr(colon + 1);

    TrafficSpec spec;
    if (proto == "dns")
        spec.proto = TrafficProto::Dns;
    else if (proto == "ntp")
        spec.proto = TrafficProto::Ntp;
    else if (proto == "wireguard")
        spec.proto = TrafficProto::Wireguard;
    else
        return std::nullopt;

    auto [ptr, ec] =
        std::from_chars(count_s.data(), count_s.data() + count_s.size(), spec.count);
    if (ec != std::errc{} || ptr != count_s.data() + count_s.size())
        return std::nullopt;
    return spec;
}

namespace {

uint32_t random_host(const Ipv4Prefix& prefix, EntropySource& ent) {
    unsigned span = 32 - prefix.len;
    if (span == 0)
        return prefix.addr;
    uint32_t net = prefix.addr & (span >= 32 ? 0 : ~((uint32_t{1} << span) - 1));
    uint64_t hosts = uint64_t{1} << span;
    // skip the network and broadcast addresses when the prefix has room
    uint32_t host = hosts > 2 ? uint32_t(ent.below(hosts - 2) + 1)
                              : uint32_t(ent.below(hosts));
    return net | host;
}

std::vector<uint8_t> dns_query_payload(EntropySource& ent) {
    std::vector<uint8_t> p;
    uint16_t id = uint16_t(ent.bits(16));
    p.push_back(uint8_t(id >> 8));
    p.push_back(uint8_t(id & 0xff));
    p.push_back(0x01); // RD
    p.push_back(0x00);
    p.push_back(0x00); // QDCOUNT = 1
    p.push_back(0x01);
    for (int i = 0; i < 6; ++i)
        p.push_back(0x00); // AN/NS/AR counts

    static const char* hexd = "0123456789abcdef";
    std::string label = "q";
    for (int i = 0; i < 8; ++i)
        label += hexd[ent.below(16)];
    p.push_back(uint8_t(label.size()));
    p.insert(p.end(), label.begin(), label.end());
    p.push_back(7);
    for (char c : std::string_view("example"))
        p.push_back(uint8_t(c));
    p.push_back(3);
    for (char c : std::string_view("com"))
        p.push_back(uint8_t(c));
    p.push_back(0x00);
    p.push_back(0x00); // QTYPE = A
    p.push_back(0x01);
    p.push_back(0x00); // QCLASS = IN
    p.push_back(0x01);
    return p;
}

std::vector<uint8_t> ntp_client_payload(EntropySource& ent) {
    std::vector<uint8_t> p(48, 0);
    p[0] = 0x23; // LI 0, version 4, mode 3 (client)
    p[1] = 0;    // stratum
    p[2] = 6;    // poll
    p[3] = 0xec; // precision
    for (size_t i = 40; i < 48; ++i)
        p[i] = uint8_t(ent.bits(8)); // transmit timestamp
    return p;
}

std::vector<uint8_t> wireguard_transport_payload(uint32_t receiver, uint64_t counter,
                                                 EntropySource& ent) {
    std::vector<uint8_t> p;
    p.reserve(48);
    p.push_back(0x04); // transport data
    p.push_back(0x00);
    p.push_back(0x00);
    p.push_back(0x00);
    for (int i = 0; i < 4; ++i)
        p.push_back(uint8_t(receiver >> (8 * i)));
    for (int i = 0; i < 8; ++i)
        p.push_back(uint8_t(counter >> (8 * i)));
    for (int i = 0; i < 32; ++i)
        p.push_back(uint8_t(ent.bits(8)));
    return p;
}

} // namespace

std::vector<PacketView> generate_traffic(const TrafficSpec& spec,
                                         const Ipv4Prefix& internal_prefix,
                                         const std::vector<uint32_t>& servers,
                                         EntropySource& ent) {
    if (servers.empty())
        throw std::invalid_argument("traffic generation needs at least one server");

    std::vector<PacketView> out;
    out.reserve(size_t(spec.count));

    // wireguard peers keep a stable source endpoint
    size_t peer_count = spec.count < 8 ? size_t(spec.count) : 8;
    std::vector<uint32_t> peer_src;
    std::vector<uint64_t> peer_counter(peer_count, 0);
    for (size_t i = 0; i < peer_count; ++i)
        peer_src.push_back(random_host(internal_prefix, ent));

    for (uint64_t i = 0; i < spec.count; ++i) {
        PacketView pkt;
        pkt.net = NetForm::V4;
        pkt.dst4 = servers[size_t(i % servers.size())];
        pkt.ttl = 64;
        pkt.dont_fragment = true;
        pkt.ident = uint16_t(ent.bits(16));
        pkt.protocol = 17;
        pkt.is_udp = true;

        switch (spec.proto) {
        case TrafficProto::Dns:
            pkt.src4 = random_host(internal_prefix, ent);
            pkt.sport = uint16_t(49152 + ent.below(16384));
            pkt.dport = 53;
            pkt.payload = dns_query_payload(ent);
            break;
        case TrafficProto::Ntp:
            pkt.src4 = random_host(internal_prefix, ent);
            pkt.sport = uint16_t(49152 + ent.below(16384));
            pkt.dport = 123;
            pkt.payload = ntp_client_payload(ent);
            break;
        case TrafficProto::Wireguard: {
            size_t peer = size_t(i % peer_count);
            pkt.src4 = peer_src[peer];
            pkt.sport = uint16_t(49152 + peer);
            pkt.dport = 51820;
            pkt.payload = wireguard_transport_payload(uint32_t(0x1000 + peer),
                                                      peer_counter[peer]++, ent);
            break;
        }
        }
        out.push_back(std::move(pkt));
    }
    return out;
}

void PeerTable::observe(uint32_t peer, const Ipv6Address& src) {
    latest_[peer] = src;
}

std::optional<Ipv6Address> PeerTable::latest(uint32_t peer) const {
    auto it = latest_.find(peer);
    if (it == latest_.end())
        return std::nullopt;
    return it->second;
}

std::optional<uint32_t> PeerTable::wireguard_peer(const PacketView& pkt) {
    if (!pkt.is_udp || pkt.dport != 51820 || pkt.payload.size() < 16)
        return std::nullopt;
    if (pkt.payload[0] != 0x04 || pkt.payload[1] != 0 || pkt.payload[2] != 0 ||
        pkt.payload[3] != 0)
        return std::nullopt;
    uint32_t receiver = 0;
    for (int i = 3; i >= 0; --i)
        receiver = receiver << 8 | pkt.payload[size_t(4 + i)];
    return receiver;
}

void PeerTable::observe_stream(const std::vector<PacketView>& stream) {
    for (const auto& pkt : stream) {
        if (pkt.net != NetForm::V6)
            continue;
        if (auto peer = wireguard_peer(pkt))
            observe(*peer, pkt.src6);
    }
}

} // namespace ipcloak
