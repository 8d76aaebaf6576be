#include "ipcloak/ip.hpp"

#include <arpa/inet.h>

#include <charconv>
#include <cstring>

namespace ipcloak {

Ipv6Address Ipv6Address::from_bits(u128 v) {
    Ipv6Address a;
    for (int i = 15; i >= 0; --i) {
        a.bytes[size_t(i)] = uint8_t(v & 0xff);
        v >>= 8;
    }
    return a;
}

u128 Ipv6Address::to_bits() const {
    u128 v = 0;
    for (uint8_t b : bytes)
        v = (v << 8) | b;
    return v;
}

std::optional<Ipv6Address> Ipv6Address::parse(std::string_view text) {
    std::string buf(text);
    Ipv6Address a;
    if (inet_pton(AF_INET6, buf.c_str(), a.bytes.data()) != 1)
        return std::nullopt;
    return a;
}

std::string Ipv6Address::str() const {
    char buf[INET6_ADDRSTRLEN];
    if (!inet_ntop(AF_INET6, bytes.data(), buf, sizeof(buf)))
        return {};
    return buf;
}

size_t Ipv6AddressHash::operator()(const Ipv6Address& a) const noexcept {
    uint64_t hi, lo;
    std::memcpy(&hi, a.bytes.data(), 8);
    std::memcpy(&lo, a.bytes.data() + 8, 8);
    uint64_t h = hi * 0x9e3779b97f4a7c15ULL;
    h ^= lo + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return size_t(h);
}

std::optional<uint32_t> parse_ipv4(std::string_view text) {
    std::string buf(text);
    in_addr a{};
    if (inet_pton(AF_INET, buf.c_str(), &a) != 1)
        return std::nullopt;
    return ntohl(a.s_addr);
}

std::string ipv4_str(uint32_t addr) {
    in_addr a{};
    a.s_addr = htonl(addr);
    char buf[INET_ADDRSTRLEN];
    if (!inet_ntop(AF_INET, &a, buf, sizeof(buf)))
        return {};
    return buf;
}

namespace {

std::optional<unsigned> parse_prefix_len(std::string_view text, unsigned max) {
    unsigned len = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), len);
    if (ec != std::errc{} || ptr != text.data() + text.size() || len > max)
        return std::nullopt;
    return len;
}

} // namespace

bool Ipv4Prefix::contains(uint32_t a) const {
    if (len == 0)
        return true;
    uint32_t mask = len >= 32 ? 0xffffffffu : ~((uint32_t{1} << (32 - len)) - 1);
    return (a & mask) == (addr & mask);
}

std::optional<Ipv4Prefix> Ipv4Prefix::parse(std::string_view text) {
    size_t slash = text.find('/');
    if (slash == std::string_view::npos)
        return std::nullopt;
    auto a = parse_ipv4(text.substr(0, slash));
    auto l = parse_prefix_len(text.substr(slash + 1), 32);
    if (!a || !l)
        return std::nullopt;
    return Ipv4Prefix{*a, *l};
}

std::string Ipv4Prefix::str() const {
    return ipv4_str(addr) + "/" + std::to_string(len);
}

bool Ipv6Prefix::contains(const Ipv6Address& a) const {
    if (len == 0)
        return true;
    u128 mask = len >= 128 ? ~u128{0} : ~((u128{1} << (128 - len)) - 1);
    return (a.to_bits() & mask) == (addr.to_bits() & mask);
}

std::optional<Ipv6Prefix> Ipv6Prefix::parse(std::string_view text) {
    size_t slash = text.find('/');
    if (slash == std::string_view::npos)
        return std::nullopt;
    auto a = Ipv6Address::parse(text.substr(0, slash));
    auto l = parse_prefix_len(text.substr(slash + 1), 128);
    if (!a || !l)
        return std::nullopt;
    return Ipv6Prefix{*a, *l};
}

std::string Ipv6Prefix::str() const {
    return addr.str() + "/" + std::to_string(len);
}

} // namespace ipcloak
