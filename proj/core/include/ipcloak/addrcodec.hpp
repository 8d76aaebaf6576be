#pragma once

#include <cstdint>
#include <optional>

#include "ipcloak/ip.hpp"

namespace ipcloak {

// Source-address layout used on the wire:
//
//   | prefix (d bits) | metadata (meta_bits) | ciphertext (32 + pad_bits) |
//
// The two-bit key version sits in the top 2 bits of the metadata region;
// the remaining metadata bits are reserved and must encode as zero. The
// split is fixed at configuration time, so packet-time paths never touch
// the arithmetic.
struct EncodingLayout {
    Ipv6Address prefix{};
    unsigned prefix_len = 0; // d
    unsigned pad_bits = 0;   // l; ciphertext width is 32 + l
    unsigned meta_bits = 0;  // 128 - d - (32 + l)

    unsigned cipher_bits() const { return 32 + pad_bits; }
};

// Validates the split; throws std::invalid_argument when the metadata
// region is narrower than the version field (e.g. a /64 prefix with 32-bit
// padding leaves no room).
EncodingLayout make_layout(const Ipv6Prefix& prefix, unsigned pad_bits);

Ipv6Address encode_address(const EncodingLayout& lay, unsigned version,
                           uint64_t ciphertext);

struct DecodedAddress {
    unsigned version = 0;
    uint64_t ciphertext = 0;
    bool reserved_nonzero = false; // diagnostics: reserved metadata bits set
};

// nullopt when the address is not under the configured prefix.
std::optional<DecodedAddress> decode_address(const EncodingLayout& lay,
                                             const Ipv6Address& addr);

// Variant for native IPv6 deployments owning a /96: the low 32 bits of the
// client address are encrypted with up to 30 bits of padding, and the
// subnet-ID region (address bits 63..32) carries the version in its top 2
// bits with the ciphertext overflow right below. Decoding puts the static
// subnet ID back.
struct V6SubnetLayout {
    Ipv6Address base{};     // /96 network; bits 63..32 are the static subnet ID
    unsigned pad_bits = 0;  // <= 30
};

V6SubnetLayout make_v6_subnet_layout(const Ipv6Address& base, unsigned pad_bits);

// ciphertext is 32 + pad_bits wide: its low 32 bits become the interface ID,
// the high pad_bits bits ride in the subnet-ID region.
Ipv6Address encode_v6_subnet(const V6SubnetLayout& lay, unsigned version,
                             uint64_t ciphertext);

struct DecodedSubnet {
    unsigned version = 0;
    uint64_t ciphertext = 0;
};

// nullopt when the top 64 bits do not match the base network.
std::optional<DecodedSubnet> decode_v6_subnet(const V6SubnetLayout& lay,
                                              const Ipv6Address& addr);

// Rebuilds the client address after decryption: base /96 (static subnet ID
// included) plus the plaintext low 32 bits.
Ipv6Address restore_v6_subnet(const V6SubnetLayout& lay, uint32_t host);

} // namespace ipcloak
