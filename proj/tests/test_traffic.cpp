#include <stdexcept>
#include <doctest.h>

#include <set>
#include <unordered_set>

#include "ipcloak/pipeline.hpp"
#include "ipcloak/traffic.hpp"

using namespace ipcloak;

namespace {

const Ipv4Prefix kInternal = *Ipv4Prefix::parse("10.0.0.0/8");

std::vector<uint32_t> resolver_fleet() {
    return {*parse_ipv4("8.8.8.8"), *parse_ipv4("1.1.1.1"), *parse_ipv4("9.9.9.9")};
}

} // namespace

TEST_CASE("traffic specs parse and reject garbage") {
    auto dns = parse_traffic_spec("dns:1000");
    REQUIRE(dns);
    CHECK(dns->proto == TrafficProto::Dns);
    CHECK(dns->count == 1000);

    auto wg = parse_traffic_spec("wireguard:25");
    REQUIRE(wg);
    CHECK(wg->proto == TrafficProto::Wireguard);

    CHECK(parse_traffic_spec("ntp:0")->count == 0);
    CHECK_FALSE(parse_traffic_spec("dns"));
    CHECK_FALSE(parse_traffic_spec("quic:10"));
    CHECK_FALSE(parse_traffic_spec("dns:ten"));
    CHECK_FALSE(parse_traffic_spec("dns:10x"));
    CHECK_FALSE(parse_traffic_spec(":5"));
}

TEST_CASE("generated queries stay inside the internal range and cycle servers") {
    SeededEntropy ent(900);
    auto servers = resolver_fleet();
    auto stream = generate_traffic({TrafficProto::Dns, 60}, kInternal, servers, ent);
    REQUIRE(stream.size() == 60);
    for (size_t i = 0; i < stream.size(); ++i) {
        const auto& p = stream[i];
        CHECK(p.net == NetForm::V4);
        CHECK(kInternal.contains(p.src4));
        CHECK(p.dst4 == servers[i % servers.size()]);
        CHECK(p.is_udp);
        CHECK(p.dport == 53);
        CHECK(p.sport >= 49152);
        CHECK_FALSE(p.is_fragment());
    }

    CHECK_THROWS_AS(generate_traffic({TrafficProto::Dns, 5}, kInternal, {}, ent),
                    std::invalid_argument);
}

TEST_CASE("dns-shaped payloads carry one question for a fresh name") {
    SeededEntropy ent(901);
    auto stream =
        generate_traffic({TrafficProto::Dns, 40}, kInternal, resolver_fleet(), ent);
    std::set<std::vector<uint8_t>> names;
    for (const auto& p : stream) {
        REQUIRE(p.payload.size() == 39); // header + qname + qtype + qclass
        CHECK(p.payload[2] == 0x01); // recursion desired, a plain query
        CHECK(p.payload[3] == 0x00);
        CHECK(p.payload[5] == 0x01); // one question
        CHECK(p.payload[7] == 0x00); // no answers
        // qname starts with a 9-octet label "q" + 8 hex chars
        CHECK(p.payload[12] == 9);
        CHECK(p.payload[13] == 'q');
        std::vector<uint8_t> name(p.payload.begin() + 13, p.payload.begin() + 22);
        names.insert(name);
        // then "example" then "com" then the root
        CHECK(p.payload[22] == 7);
        CHECK(p.payload[30] == 3);
        CHECK(p.payload[34] == 0);
        // A/IN question
        CHECK(p.payload[36] == 0x01);
        CHECK(p.payload[38] == 0x01);
    }
    CHECK(names.size() > 35); // ids are random, repeats are rare
}

TEST_CASE("ntp-shaped payloads are 48-byte version-4 client packets") {
    SeededEntropy ent(902);
    auto stream =
        generate_traffic({TrafficProto::Ntp, 25}, kInternal, resolver_fleet(), ent);
    for (const auto& p : stream) {
        CHECK(p.dport == 123);
        REQUIRE(p.payload.size() == 48);
        CHECK(p.payload[0] == 0x23);
        // transmit timestamps differ between polls
    }
    CHECK(stream[0].payload != stream[1].payload);
}

TEST_CASE("wireguard-shaped flows keep stable per-peer endpoints") {
    SeededEntropy ent(903);
    auto stream = generate_traffic({TrafficProto::Wireguard, 64}, kInternal,
                                   resolver_fleet(), ent);
    std::unordered_set<uint32_t> sources;
    std::set<uint16_t> sports;
    for (size_t i = 0; i < stream.size(); ++i) {
        const auto& p = stream[i];
        CHECK(p.dport == 51820);
        REQUIRE(p.payload.size() == 48);
        CHECK(p.payload[0] == 0x04);

        auto peer = PeerTable::wireguard_peer(p);
        REQUIRE(peer);
        CHECK(*peer == 0x1000 + (i % 8));
        sources.insert(p.src4);
        sports.insert(p.sport);
    }
    // eight peers, each with one fixed source address and port
    CHECK(sources.size() == 8);
    CHECK(sports == std::set<uint16_t>{49152, 49153, 49154, 49155, 49156, 49157,
                                       49158, 49159});

    // counters advance per peer
    auto ctr = [](const PacketView& p) {
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i)
            v = v << 8 | p.payload[size_t(8 + i)];
        return v;
    };
    CHECK(ctr(stream[0]) == 0);
    CHECK(ctr(stream[8]) == 1);
    CHECK(ctr(stream[16]) == 2);
    CHECK(ctr(stream[1]) == 0);
}

TEST_CASE("peer annotation rejects non-wireguard shapes") {
    SeededEntropy ent(904);
    auto dns =
        generate_traffic({TrafficProto::Dns, 1}, kInternal, resolver_fleet(), ent);
    CHECK_FALSE(PeerTable::wireguard_peer(dns[0]));

    auto wg = generate_traffic({TrafficProto::Wireguard, 1}, kInternal,
                               resolver_fleet(), ent);
    PacketView p = wg[0];
    p.payload[1] = 1; // reserved bytes must be zero
    CHECK_FALSE(PeerTable::wireguard_peer(p));
    p = wg[0];
    p.payload.resize(10);
    CHECK_FALSE(PeerTable::wireguard_peer(p));
    p = wg[0];
    p.dport = 53;
    CHECK_FALSE(PeerTable::wireguard_peer(p));
}

TEST_CASE("the receiver keeps only the latest source per peer") {
    PeerTable table;
    CHECK_FALSE(table.latest(7));

    auto a = *Ipv6Address::parse("2001:db8::a");
    auto b = *Ipv6Address::parse("2001:db8::b");
    auto c = *Ipv6Address::parse("2001:db8::c");
    table.observe(7, a);
    table.observe(9, c);
    table.observe(7, b);
    CHECK(table.size() == 2);
    CHECK(*table.latest(7) == b);
    CHECK(*table.latest(9) == c);
}

TEST_CASE("a roaming peer keeps its session through per-packet addresses") {
    // wireguard flows through the translator: every packet leaves under a
    // fresh source address, yet the server's latest-wins table still maps
    // the peer to a routable return address, even across a key rotation
    SeededEntropy ent(905);
    PipelineConfig cfg;
    cfg.cipher = std::make_shared<const CipherParams>(make_cipher_params(56, ent));
    cfg.layout = make_layout(*Ipv6Prefix::parse("2001:db8::/48"), 24);
    cfg.internal_prefix = kInternal;
    RotationWindow window(56, ent);
    auto vpn6 = *Ipv6Address::parse("2001:db8:ff::1194");
    uint32_t vpn4 = *parse_ipv4("198.51.100.19");
    ServerMap map = load_server_map({{vpn4, vpn6}});

    auto stream =
        generate_traffic({TrafficProto::Wireguard, 48}, kInternal, {vpn4}, ent);

    PeerTable table;
    std::vector<PacketView> translated;
    std::unordered_set<Ipv6Address, Ipv6AddressHash> wire_sources;
    for (size_t i = 0; i < stream.size(); ++i) {
        if (i == 24)
            window.rotate(ent); // mid-stream rekey
        PipelineAction act = process_outbound(stream[i], window, map, cfg, ent);
        REQUIRE(act.kind == PipelineAction::Kind::ForwardV6);
        wire_sources.insert(act.packet.src6);
        translated.push_back(act.packet);
    }
    CHECK(wire_sources.size() == 48);

    table.observe_stream(translated);
    CHECK(table.size() == 8);

    // the server answers each peer at its latest address; every reply
    // still reaches the peer's stable internal endpoint
    for (uint32_t peer = 0; peer < 8; ++peer) {
        auto addr = table.latest(0x1000 + peer);
        REQUIRE(addr);
        PacketView reply;
        reply.net = NetForm::V6;
        reply.src6 = vpn6;
        reply.dst6 = *addr;
        reply.ttl = 60;
        reply.protocol = 17;
        reply.is_udp = true;
        reply.sport = 51820;
        // the server echoes to the port it saw; find it from the stream
        const PacketView* last = nullptr;
        for (const auto& t : translated)
            if (PeerTable::wireguard_peer(t) == 0x1000 + peer && t.src6 == *addr)
                last = &t;
        REQUIRE(last);
        reply.dport = last->sport;
        reply.payload = {4, 0, 0, 0};

        PipelineAction back = process_inbound(reply, window, map, cfg);
        REQUIRE(back.kind == PipelineAction::Kind::ForwardV4);
        CHECK(back.packet.dst4 == stream[peer].src4);
        CHECK(back.packet.dport == uint16_t(49152 + peer));
        CHECK(back.packet.src4 == vpn4);
    }
}
