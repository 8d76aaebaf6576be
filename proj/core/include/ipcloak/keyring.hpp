#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ipcloak/rng.hpp"

namespace ipcloak {

// One generation of secrets: three whitening keys for the cipher plus a
// 65536-entry one-time-pad table for port obfuscation, tagged with a two-bit
// version carried in every encoded address.
struct KeySet {
    unsigned version = 0;
    unsigned block_bits = 0;
    uint64_t k0 = 0;
    uint64_t k1 = 0;
    uint64_t k2 = 0;
    std::vector<uint16_t> otp;
    double created_at = 0;
};

KeySet generate_keyset(unsigned block_bits, unsigned version, EntropySource& ent);

// Pad entry selected by the top 16 bits of a packet's random padding.
uint16_t otp_for(const KeySet& ks, uint16_t pad_prefix);

// Holds the live key sets. The version tag has four values but only three
// generations stay resident: each rotation publishes a fresh current set and
// clears the slot the tag will wrap into next, so a packet encoded under the
// previous or previous-but-one generation still decodes. Rotation is
// single-writer; readers grab an immutable snapshot and never block.
class RotationWindow {
public:
    RotationWindow(unsigned block_bits, EntropySource& ent);
    RotationWindow(const RotationWindow&) = delete;
    RotationWindow& operator=(const RotationWindow&) = delete;

    unsigned rotate(EntropySource& ent);

    std::shared_ptr<const KeySet> current() const;
    std::shared_ptr<const KeySet> lookup(unsigned version) const;
    unsigned current_version() const;
    uint64_t rotations() const;

    // live generations, oldest first
    std::vector<std::shared_ptr<const KeySet>> retained() const;

    // One line per live generation, oldest first:
    //   version=<v> k0=<hex> k1=<hex> k2=<hex> otp_sha256=<hex>
    // Keys are zero-padded to the block width; the digest covers the pad
    // table serialized big-endian two bytes per entry.
    std::string export_text() const;

private:
    struct State {
        std::array<std::shared_ptr<const KeySet>, 4> slots;
        unsigned current = 0;
        uint64_t rotations = 0;
    };

    unsigned block_bits_;
    std::shared_ptr<const State> state_;
};

} // namespace ipcloak
