#include <stdexcept>
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "ipcloak/rng.hpp"
#include "ipcloak/translator.hpp"
#include "support/checksum_oracle.hpp"

using namespace ipcloak;

namespace {

Ipv6Address v6(const char* text) {
    auto a = Ipv6Address::parse(text);
    REQUIRE(a);
    return *a;
}

PacketView client_query() {
    PacketView p;
    p.net = NetForm::V4;
    p.src4 = *parse_ipv4("10.0.0.7");
    p.dst4 = *parse_ipv4("8.8.8.8");
    p.ident = 0x4242;
    p.dont_fragment = true;
    p.ttl = 57;
    p.dscp_ecn = 0x20;
    p.protocol = 17;
    p.is_udp = true;
    p.sport = 49999;
    p.dport = 53;
    p.payload = {0xde, 0xad, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0};
    return p;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents) {
        path = "translator_map_test.tmp";
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("server map rejects duplicates and names the record") {
    std::vector<std::pair<uint32_t, Ipv6Address>> recs = {
        {*parse_ipv4("8.8.8.8"), v6("2001:db8:ff::53")},
        {*parse_ipv4("8.8.8.8"), v6("2001:db8:ff::54")},
    };
    CHECK_THROWS_WITH_AS(load_server_map(recs),
                         "duplicate IPv4 in server map: 8.8.8.8",
                         std::invalid_argument);

    recs[1] = {*parse_ipv4("9.9.9.9"), v6("2001:db8:ff::53")};
    CHECK_THROWS_WITH_AS(load_server_map(recs),
                         "duplicate IPv6 in server map: 2001:db8:ff::53",
                         std::invalid_argument);

    recs[1] = {*parse_ipv4("9.9.9.9"), v6("2001:db8:ff::54")};
    ServerMap map = load_server_map(recs);
    CHECK(map.size() == 2);
    CHECK(map.ip4_to_6.at(*parse_ipv4("9.9.9.9")) == v6("2001:db8:ff::54"));
    CHECK(map.ip6_to_4.at(v6("2001:db8:ff::53")) == *parse_ipv4("8.8.8.8"));
}

TEST_CASE("a large synthetic map stays bijective") {
    SeededEntropy ent(600);
    std::vector<std::pair<uint32_t, Ipv6Address>> recs;
    for (uint32_t i = 0; i < 374; ++i) {
        uint32_t v4 = 0x08000000 + i * 7919;
        Ipv6Address a = v6("2001:db8:ff::");
        a.bytes[13] = uint8_t(i >> 8);
        a.bytes[14] = uint8_t(i);
        a.bytes[15] = uint8_t(ent.bits(8));
        recs.emplace_back(v4, a);
    }
    ServerMap map = load_server_map(recs);
    CHECK(map.size() == 374);
    for (const auto& [v4, a] : recs) {
        CHECK(map.ip4_to_6.at(v4) == a);
        CHECK(map.ip6_to_4.at(a) == v4);
    }
}

TEST_CASE("map files accept comments and report bad lines by number") {
    TempFile good("# resolver fleet\n"
                  "8.8.8.8,2001:db8:ff::53\n"
                  "\n"
                  "  1.1.1.1 , 2001:db8:ff::54\n");
    // whitespace around the comma is part of the address text and rejected
    CHECK_THROWS_WITH_AS(load_server_map_file(good.path),
                         "translator_map_test.tmp:4: bad address in record",
                         std::runtime_error);

    TempFile clean("8.8.8.8,2001:db8:ff::53\n1.1.1.1,2001:db8:ff::54\n");
    ServerMap map = load_server_map_file(clean.path);
    CHECK(map.size() == 2);

    TempFile nocomma("8.8.8.8 2001:db8:ff::53\n");
    CHECK_THROWS_WITH_AS(load_server_map_file(nocomma.path),
                         "translator_map_test.tmp:1: expected <ipv4>,<ipv6>",
                         std::runtime_error);

    CHECK_THROWS_AS(load_server_map_file("no_such_file.map"), std::runtime_error);
}

TEST_CASE("4to6 carries every shared field straight across") {
    PacketView p = client_query();
    auto res = translate_4to6(p, v6("2001:db8::aaaa"), v6("2001:db8:ff::53"));
    auto* out = std::get_if<PacketView>(&res);
    REQUIRE(out);
    CHECK(out->net == NetForm::V6);
    CHECK(out->src6 == v6("2001:db8::aaaa"));
    CHECK(out->dst6 == v6("2001:db8:ff::53"));
    CHECK(out->ttl == 57);          // copied, not decremented
    CHECK(out->dscp_ecn == 0x20);
    CHECK(out->protocol == 17);
    CHECK(out->sport == 49999);
    CHECK(out->dport == 53);
    CHECK(out->payload == p.payload);
}

TEST_CASE("6to4 resets fragmentation state to atomic") {
    PacketView p = client_query();
    auto fwd = std::get<PacketView>(
        translate_4to6(p, v6("2001:db8::aaaa"), v6("2001:db8:ff::53")));
    auto res = translate_6to4(fwd, *parse_ipv4("8.8.8.8"), *parse_ipv4("10.0.0.7"));
    auto* back = std::get_if<PacketView>(&res);
    REQUIRE(back);
    CHECK(back->ident == 0);
    CHECK(back->dont_fragment);
    CHECK_FALSE(back->is_fragment());
}

TEST_CASE("round trip is the identity on preserved fields") {
    SeededEntropy ent(601);
    for (int i = 0; i < 200; ++i) {
        PacketView p = client_query();
        p.ttl = uint8_t(1 + ent.below(255));
        p.dscp_ecn = uint8_t(ent.bits(8));
        p.sport = uint16_t(ent.bits(16));
        p.payload.resize(ent.below(200));
        for (auto& b : p.payload)
            b = uint8_t(ent.bits(8));

        auto mid = std::get<PacketView>(
            translate_4to6(p, v6("2001:db8::1"), v6("2001:db8:ff::53")));
        auto back = std::get<PacketView>(
            translate_6to4(mid, p.src4, p.dst4));

        CHECK(back.src4 == p.src4);
        CHECK(back.dst4 == p.dst4);
        CHECK(back.ttl == p.ttl);
        CHECK(back.dscp_ecn == p.dscp_ecn);
        CHECK(back.protocol == p.protocol);
        CHECK(back.sport == p.sport);
        CHECK(back.dport == p.dport);
        CHECK(back.payload == p.payload);
    }
}

TEST_CASE("a hop-limit of one still crosses without decrement") {
    PacketView p = client_query();
    p.ttl = 1;
    auto out = std::get<PacketView>(
        translate_4to6(p, v6("2001:db8::1"), v6("2001:db8:ff::53")));
    CHECK(out.ttl == 1);
}

TEST_CASE("fragments are refused in the 4to6 direction") {
    PacketView p = client_query();
    p.more_fragments = true;
    auto res = translate_4to6(p, v6("2001:db8::1"), v6("2001:db8:ff::53"));
    REQUIRE(std::holds_alternative<DropReason>(res));
    CHECK(std::get<DropReason>(res) == DropReason::Fragment);

    p.more_fragments = false;
    p.frag_offset = 100;
    res = translate_4to6(p, v6("2001:db8::1"), v6("2001:db8:ff::53"));
    CHECK(std::get<DropReason>(res) == DropReason::Fragment);
}

TEST_CASE("extension chains are refused in the 6to4 direction") {
    PacketView p = client_query();
    auto fwd = std::get<PacketView>(
        translate_4to6(p, v6("2001:db8::1"), v6("2001:db8:ff::53")));
    fwd.has_ext_headers = true;
    auto res = translate_6to4(fwd, p.dst4, p.src4);
    REQUIRE(std::holds_alternative<DropReason>(res));
    CHECK(std::get<DropReason>(res) == DropReason::UnsupportedExtension);
}

TEST_CASE("the wrong family in either direction is malformed") {
    PacketView p = client_query();
    auto res6 = translate_6to4(p, 1, 2);
    CHECK(std::get<DropReason>(res6) == DropReason::Malformed);

    auto fwd = std::get<PacketView>(
        translate_4to6(p, v6("2001:db8::1"), v6("2001:db8:ff::53")));
    auto res4 = translate_4to6(fwd, v6("::1"), v6("::2"));
    CHECK(std::get<DropReason>(res4) == DropReason::Malformed);
}

TEST_CASE("non-UDP transports cross as opaque bytes") {
    PacketView p = client_query();
    p.protocol = 6;
    p.is_udp = false;
    p.payload = {0x00, 0x50, 0xc3, 0x50, 1, 2, 3, 4};
    auto out = std::get<PacketView>(
        translate_4to6(p, v6("2001:db8::1"), v6("2001:db8:ff::53")));
    CHECK(out.protocol == 6);
    CHECK_FALSE(out.is_udp);
    CHECK(out.payload == p.payload);
}

TEST_CASE("translation keeps no state between packets") {
    PacketView a = client_query();
    PacketView b = client_query();
    b.sport = 50001;
    b.payload = {1};

    auto ra1 = std::get<PacketView>(
        translate_4to6(a, v6("2001:db8::1"), v6("2001:db8:ff::53")));
    std::get<PacketView>(translate_4to6(b, v6("2001:db8::2"), v6("2001:db8:ff::53")));
    auto ra2 = std::get<PacketView>(
        translate_4to6(a, v6("2001:db8::1"), v6("2001:db8:ff::53")));

    CHECK(ra1.sport == ra2.sport);
    CHECK(ra1.payload == ra2.payload);
    CHECK(ra1.src6 == ra2.src6);
}

TEST_CASE("translated packets serialize with valid checksums") {
    PacketView p = client_query();
    auto mid = std::get<PacketView>(
        translate_4to6(p, v6("2001:db8::1"), v6("2001:db8:ff::53")));
    auto check6 = oracle::verify_frame(serialize_frame(mid));
    CHECK(check6.parsed);
    CHECK(check6.has_udp);
    CHECK(check6.udp_ok);

    auto back = std::get<PacketView>(translate_6to4(mid, p.dst4, p.src4));
    auto check4 = oracle::verify_frame(serialize_frame(back));
    CHECK(check4.parsed);
    CHECK(check4.ipv4_header_ok);
    CHECK(check4.udp_ok);
}
