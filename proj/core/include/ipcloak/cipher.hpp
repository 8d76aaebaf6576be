#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ipcloak/rng.hpp"

namespace ipcloak {

// One SPN round: bytewise S-box substitution followed by a straight bit
// shuffle across the whole block. Blocks are big-endian (byte 0 of the block
// is the most significant byte); bit index 0 is the least significant bit.
// pbox[j] gives the destination of source bit j.
//
// Alongside the naive two-step evaluation, each permutation carries fused
// per-byte lookup tables: lane i maps input byte i straight to its
// contribution to the shuffled block, so a forward evaluation is bits/8 table
// loads XORed together. The inverse direction fuses the bit gather the same
// way and finishes with the inverse S-box. At 64-bit blocks each direction
// costs 8 * 256 * 8 = 16384 bytes of tables.
struct SpnPermutation {
    unsigned bits = 0;
    std::array<uint8_t, 256> sbox{};
    std::array<uint8_t, 256> inv_sbox{};
    std::vector<uint8_t> pbox;
    std::vector<uint8_t> inv_pbox;
    std::vector<std::array<uint64_t, 256>> fwd_tab;
    std::vector<std::array<uint64_t, 256>> gather_tab;
};

extern const std::array<uint8_t, 256> kAesSbox;

// Validates and finishes a permutation: computes inverses and fused tables.
// Throws std::invalid_argument for unsupported widths, non-bijective boxes
// or out-of-range shuffles. bits must be a multiple of 8 in [16, 64].
SpnPermutation make_spn(unsigned bits, const std::array<uint8_t, 256>& sbox,
                        std::vector<uint8_t> pbox);

// AES S-box plus a freshly shuffled bit permutation.
SpnPermutation random_spn(unsigned bits, EntropySource& ent);

// Reference two-step evaluation, kept as an oracle for the fused path.
uint64_t spn_forward_naive(const SpnPermutation& p, uint64_t x);
uint64_t spn_inverse_naive(const SpnPermutation& p, uint64_t x);

// Fused table evaluation.
uint64_t spn_forward(const SpnPermutation& p, uint64_t x);
uint64_t spn_inverse(const SpnPermutation& p, uint64_t x);

// Fused table footprint of one direction, in bytes.
size_t spn_table_bytes(const SpnPermutation& p);

// Text round-trip:
//   bits: 64
//   sbox: <512 hex chars>
//   pbox: <bits space-separated destinations>
std::string spn_to_text(const SpnPermutation& p);

// Parses and validates; throws std::invalid_argument on malformed input.
SpnPermutation spn_from_text(std::string_view text);

// Two-round Even-Mansour over the SPN pair:
//   E(m) = P2(P1(m ^ k0) ^ k1) ^ k2
// with three independent whitening keys. The permutations are public; all
// secrecy lives in the keys.
struct CipherParams {
    unsigned block_bits = 0;
    SpnPermutation p1;
    SpnPermutation p2;
};

CipherParams make_cipher_params(unsigned block_bits, EntropySource& ent);

uint64_t block_mask(unsigned bits);

uint64_t encrypt(const CipherParams& cp, uint64_t k0, uint64_t k1, uint64_t k2,
                 uint64_t m);
uint64_t decrypt(const CipherParams& cp, uint64_t k0, uint64_t k1, uint64_t k2,
                 uint64_t c);

} // namespace ipcloak
