#pragma once

#include <memory>

#include "ipcloak/addrcodec.hpp"
#include "ipcloak/cipher.hpp"
#include "ipcloak/keyring.hpp"
#include "ipcloak/packet.hpp"
#include "ipcloak/rng.hpp"
#include "ipcloak/translator.hpp"

namespace ipcloak {

// Everything immutable the packet paths need. The cipher permutations are
// public parameters; all secrecy lives in the rotation window's key sets.
// strict_unmapped extends beyond outbound unmapped destinations: it also
// drops inbound IPv6 that is not under our prefix instead of passing it
// through, for closed-world anonymity runs.
struct PipelineConfig {
    std::shared_ptr<const CipherParams> cipher;
    EncodingLayout layout;
    Ipv4Prefix internal_prefix{};
    bool port_obfuscation = false;
    bool strict_unmapped = false;
    bool drop_non_udp = false;
};

// Throws std::invalid_argument when the cipher width does not match the
// layout or port obfuscation is requested with under-16-bit padding.
void validate_config(const PipelineConfig& cfg);

struct PipelineAction {
    enum class Kind { ForwardV6, ForwardV4, PassThrough, Drop };

    Kind kind = Kind::Drop;
    PacketView packet;
    DropReason reason = DropReason::Malformed;
    bool reserved_meta_seen = false;
};

// Outbound: for a mapped destination, draws one l-bit pad (exactly one
// entropy word per packet), encrypts (src4 << l) | pad under the current
// key set, encodes the ciphertext and version into the IPv6 source address
// and translates the headers. Port obfuscation masks the UDP source port
// with the pad-indexed OTP entry before translation.
PipelineAction process_outbound(const PacketView& pkt, RotationWindow& window,
                                const ServerMap& map, const PipelineConfig& cfg,
                                EntropySource& ent);

// Inbound: decodes the IPv6 destination, looks the version up in the
// window, decrypts, validates the recovered address against the internal
// prefix, unmasks the port and translates back. Addresses outside our
// prefix pass through untouched unless strict_unmapped is set.
PipelineAction process_inbound(const PacketView& pkt, RotationWindow& window,
                               const ServerMap& map, const PipelineConfig& cfg);

} // namespace ipcloak
