#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ipcloak {

using u128 = unsigned __int128;

// 128-bit address stored in network byte order; bit views are big-endian,
// so bytes[0] holds bits 127..120.
struct Ipv6Address {
    std::array<uint8_t, 16> bytes{};

    static Ipv6Address from_bits(u128 v);
    u128 to_bits() const;

    static std::optional<Ipv6Address> parse(std::string_view text);
    std::string str() const;

    friend bool operator==(const Ipv6Address&, const Ipv6Address&) = default;
};

struct Ipv6AddressHash {
    size_t operator()(const Ipv6Address& a) const noexcept;
};

// dotted quad <-> host-order u32
std::optional<uint32_t> parse_ipv4(std::string_view text);
std::string ipv4_str(uint32_t addr);

struct Ipv4Prefix {
    uint32_t addr = 0;
    unsigned len = 0;

    bool contains(uint32_t a) const;
    static std::optional<Ipv4Prefix> parse(std::string_view text);
    std::string str() const;
};

struct Ipv6Prefix {
    Ipv6Address addr{};
    unsigned len = 0;

    bool contains(const Ipv6Address& a) const;
    static std::optional<Ipv6Prefix> parse(std::string_view text);
    std::string str() const;
};

} // namespace ipcloak
