#include "ipcloak/addrcodec.hpp"

#include <stdexcept>

namespace ipcloak {

namespace {

u128 high_mask(unsigned top_bits) {
    if (top_bits == 0)
        return 0;
    if (top_bits >= 128)
        return ~u128{0};
    return ~((u128{1} << (128 - top_bits)) - 1);
}

} // namespace

EncodingLayout make_layout(const Ipv6Prefix& prefix, unsigned pad_bits) {
    if (pad_bits > 32 || pad_bits % 8 != 0)
        throw std::invalid_argument("padding width must be 0, 8, 16, 24 or 32 bits");
    unsigned cipher = 32 + pad_bits;
    if (prefix.len == 0 || prefix.len > 96)
        throw std::invalid_argument("prefix length must be in [1, 96]");
    if (prefix.len + cipher + 2 > 128)
        throw std::invalid_argument(
            "layout leaves no metadata room for the version field");

    EncodingLayout lay;
    lay.prefix = Ipv6Address::from_bits(prefix.addr.to_bits() & high_mask(prefix.len));
    lay.prefix_len = prefix.len;
    lay.pad_bits = pad_bits;
    lay.meta_bits = 128 - prefix.len - cipher;
    return lay;
}

Ipv6Address encode_address(const EncodingLayout& lay, unsigned version,
                           uint64_t ciphertext) {
    unsigned cipher = lay.cipher_bits();
    unsigned version_shift = cipher + lay.meta_bits - 2;
    u128 bits = lay.prefix.to_bits();
    bits |= u128(version & 3) << version_shift;
    bits |= u128(ciphertext) & ((u128{1} << cipher) - 1);
    return Ipv6Address::from_bits(bits);
}

std::optional<DecodedAddress> decode_address(const EncodingLayout& lay,
                                             const Ipv6Address& addr) {
    u128 bits = addr.to_bits();
    u128 pmask = high_mask(lay.prefix_len);
    if ((bits & pmask) != lay.prefix.to_bits())
        return std::nullopt;

    unsigned cipher = lay.cipher_bits();
    unsigned version_shift = cipher + lay.meta_bits - 2;
    DecodedAddress out;
    out.version = unsigned(bits >> version_shift) & 3;
    out.ciphertext = uint64_t(bits & ((u128{1} << cipher) - 1));
    if (lay.meta_bits > 2) {
        u128 reserved = (bits >> cipher) & ((u128{1} << (lay.meta_bits - 2)) - 1);
        out.reserved_nonzero = reserved != 0;
    }
    return out;
}

V6SubnetLayout make_v6_subnet_layout(const Ipv6Address& base, unsigned pad_bits) {
    if (pad_bits > 30)
        throw std::invalid_argument("subnet-ID variant supports at most 30 pad bits");
    V6SubnetLayout lay;
    lay.base = Ipv6Address::from_bits(base.to_bits() & high_mask(96));
    lay.pad_bits = pad_bits;
    return lay;
}

Ipv6Address encode_v6_subnet(const V6SubnetLayout& lay, unsigned version,
                             uint64_t ciphertext) {
    u128 bits = lay.base.to_bits() & high_mask(64);
    bits |= u128(version & 3) << 62;
    if (lay.pad_bits > 0) {
        uint64_t overflow = (ciphertext >> 32) & ((uint64_t{1} << lay.pad_bits) - 1);
        bits |= u128(overflow) << (62 - lay.pad_bits);
    }
    bits |= u128(uint32_t(ciphertext));
    return Ipv6Address::from_bits(bits);
}

std::optional<DecodedSubnet> decode_v6_subnet(const V6SubnetLayout& lay,
                                              const Ipv6Address& addr) {
    u128 bits = addr.to_bits();
    if ((bits & high_mask(64)) != (lay.base.to_bits() & high_mask(64)))
        return std::nullopt;

    DecodedSubnet out;
    out.version = unsigned(bits >> 62) & 3;
    uint64_t low32 = uint64_t(bits & 0xffffffffu);
    uint64_t overflow = 0;
    if (lay.pad_bits > 0)
        overflow = uint64_t(bits >> (62 - lay.pad_bits)) &
                   ((uint64_t{1} << lay.pad_bits) - 1);
    out.ciphertext = (overflow << 32) | low32;
    return out;
}

Ipv6Address restore_v6_subnet(const V6SubnetLayout& lay, uint32_t host) {
    return Ipv6Address::from_bits(lay.base.to_bits() | u128(host));
}

} // namespace ipcloak
