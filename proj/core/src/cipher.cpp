#include "ipcloak/cipher.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace ipcloak {

const std::array<uint8_t, 256> kAesSbox = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b,
    0xfe, 0xd7, 0xab, 0x76, 0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0,
    0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0, 0xb7, 0xfd, 0x93, 0x26,
    0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2,
    0xeb, 0x27, 0xb2, 0x75, 0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0,
    0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84, 0x53, 0xd1, 0x00, 0xed,
    0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f,
    0x50, 0x3c, 0x9f, 0xa8, 0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5,
    0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2, 0xcd, 0x0c, 0x13, 0xec,
    0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14,
    0xde, 0x5e, 0x0b, 0xdb, 0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c,
    0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79, 0xe7, 0xc8, 0x37, 0x6d,
    0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f,
    0x4b, 0xbd, 0x8b, 0x8a, 0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e,
    0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e, 0xe1, 0xf8, 0x98, 0x11,
    0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f,
    0xb0, 0x54, 0xbb, 0x16};

namespace {

uint64_t permute_bits(const std::vector<uint8_t>& pbox, uint64_t x) {
    uint64_t out = 0;
    for (size_t j = 0; j < pbox.size(); ++j)
        if ((x >> j) & 1)
            out |= uint64_t{1} << pbox[j];
    return out;
}

void check_bits(unsigned bits) {
    if (bits < 16 || bits > 64 || bits % 8 != 0)
        throw std::invalid_argument("block width must be a multiple of 8 in [16, 64]");
}

} // namespace

uint64_t block_mask(unsigned bits) {
    return bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << bits) - 1;
}

SpnPermutation make_spn(unsigned bits, const std::array<uint8_t, 256>& sbox,
                        std::vector<uint8_t> pbox) {
    check_bits(bits);

    std::array<bool, 256> seen_s{};
    for (uint8_t v : sbox) {
        if (seen_s[v])
            throw std::invalid_argument("sbox is not a bijection");
        seen_s[v] = true;
    }

    if (pbox.size() != bits)
        throw std::invalid_argument("pbox size does not match block width");
    std::vector<bool> seen_p(bits, false);
    for (uint8_t d : pbox) {
        if (d >= bits || seen_p[d])
            throw std::invalid_argument("pbox is not a permutation of bit positions");
        seen_p[d] = true;
    }

    SpnPermutation p;
    p.bits = bits;
    p.sbox = sbox;
    p.pbox = std::move(pbox);
    for (unsigned i = 0; i < 256; ++i)
        p.inv_sbox[p.sbox[i]] = uint8_t(i);
    p.inv_pbox.resize(bits);
    for (unsigned j = 0; j < bits; ++j)
        p.inv_pbox[p.pbox[j]] = uint8_t(j);

    unsigned lanes = bits / 8;
    p.fwd_tab.assign(lanes, {});
    p.gather_tab.assign(lanes, {});
    for (unsigned i = 0; i < lanes; ++i) {
        unsigned shift = bits - 8 * (i + 1);
        for (unsigned v = 0; v < 256; ++v) {
            p.fwd_tab[i][v] = permute_bits(p.pbox, uint64_t(p.sbox[v]) << shift);
            p.gather_tab[i][v] = permute_bits(p.inv_pbox, uint64_t(v) << shift);
        }
    }
    return p;
}

SpnPermutation random_spn(unsigned bits, EntropySource& ent) {
    check_bits(bits);
    std::vector<uint8_t> pbox(bits);
    for (unsigned j = 0; j < bits; ++j)
        pbox[j] = uint8_t(j);
    ent.shuffle(pbox);
    return make_spn(bits, kAesSbox, std::move(pbox));
}

uint64_t spn_forward_naive(const SpnPermutation& p, uint64_t x) {
    uint64_t sub = 0;
    for (unsigned i = 0; i < p.bits / 8; ++i) {
        unsigned shift = p.bits - 8 * (i + 1);
        sub |= uint64_t(p.sbox[(x >> shift) & 0xff]) << shift;
    }
    return permute_bits(p.pbox, sub);
}

uint64_t spn_inverse_naive(const SpnPermutation& p, uint64_t x) {
    uint64_t gathered = permute_bits(p.inv_pbox, x);
    uint64_t out = 0;
    for (unsigned i = 0; i < p.bits / 8; ++i) {
        unsigned shift = p.bits - 8 * (i + 1);
        out |= uint64_t(p.inv_sbox[(gathered >> shift) & 0xff]) << shift;
    }
    return out;
}

uint64_t spn_forward(const SpnPermutation& p, uint64_t x) {
    uint64_t out = 0;
    for (unsigned i = 0; i < p.bits / 8; ++i) {
        unsigned shift = p.bits - 8 * (i + 1);
        out ^= p.fwd_tab[i][(x >> shift) & 0xff];
    }
    return out;
}

uint64_t spn_inverse(const SpnPermutation& p, uint64_t x) {
    uint64_t gathered = 0;
    unsigned lanes = p.bits / 8;
    for (unsigned i = 0; i < lanes; ++i) {
        unsigned shift = p.bits - 8 * (i + 1);
        gathered ^= p.gather_tab[i][(x >> shift) & 0xff];
    }
    uint64_t out = 0;
    for (unsigned i = 0; i < lanes; ++i) {
        unsigned shift = p.bits - 8 * (i + 1);
        out |= uint64_t(p.inv_sbox[(gathered >> shift) & 0xff]) << shift;
    }
    return out;
}

size_t spn_table_bytes(const SpnPermutation& p) {
    return p.fwd_tab.size() * 256 * sizeof(uint64_t);
}

std::string spn_to_text(const SpnPermutation& p) {
    static const char* hex = "0123456789abcdef";
    std::string out = "bits: " + std::to_string(p.bits) + "\nsbox: ";
    for (uint8_t v : p.sbox) {
        out += hex[v >> 4];
        out += hex[v & 0xf];
    }
    out += "\npbox:";
    for (uint8_t d : p.pbox) {
        out += ' ';
        out += std::to_string(d);
    }
    out += '\n';
    return out;
}

namespace {

std::string_view expect_field(std::string_view line, std::string_view key) {
    if (line.substr(0, key.size()) != key)
        throw std::invalid_argument("expected '" + std::string(key) + "' field");
    line.remove_prefix(key.size());
    while (!line.empty() && line.front() == ' ')
        line.remove_prefix(1);
    return line;
}

int hex_nibble(char c) {
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

} // namespace

SpnPermutation spn_from_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string bits_line, sbox_line, pbox_line;
    if (!std::getline(in, bits_line) || !std::getline(in, sbox_line) ||
        !std::getline(in, pbox_line))
        throw std::invalid_argument("permutation text needs bits, sbox and pbox lines");

    auto bits_val = expect_field(bits_line, "bits:");
    unsigned bits = 0;
    auto [ptr, ec] = std::from_chars(bits_val.data(), bits_val.data() + bits_val.size(), bits);
    if (ec != std::errc{} || ptr != bits_val.data() + bits_val.size())
        throw std::invalid_argument("bad bits value");

    auto sbox_val = expect_field(sbox_line, "sbox:");
    if (sbox_val.size() != 512)
        throw std::invalid_argument("sbox must be 512 hex characters");
    std::array<uint8_t, 256> sbox{};
    for (unsigned i = 0; i < 256; ++i) {
        int hi = hex_nibble(sbox_val[2 * i]);
        int lo = hex_nibble(sbox_val[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw std::invalid_argument("sbox contains non-hex characters");
        sbox[i] = uint8_t(hi << 4 | lo);
    }

    auto pbox_val = expect_field(pbox_line, "pbox:");
    std::istringstream ps{std::string(pbox_val)};
    std::vector<uint8_t> pbox;
    unsigned d = 0;
    while (ps >> d) {
        if (d > 255)
            throw std::invalid_argument("pbox entry out of range");
        pbox.push_back(uint8_t(d));
    }
    if (!ps.eof())
        throw std::invalid_argument("pbox contains non-numeric tokens");

    return make_spn(bits, sbox, std::move(pbox));
}

CipherParams make_cipher_params(unsigned block_bits, EntropySource& ent) {
    CipherParams cp;
    cp.block_bits = block_bits;
    cp.p1 = random_spn(block_bits, ent);
    cp.p2 = random_spn(block_bits, ent);
    return cp;
}

uint64_t encrypt(const CipherParams& cp, uint64_t k0, uint64_t k1, uint64_t k2,
                 uint64_t m) {
    uint64_t mask = block_mask(cp.block_bits);
    uint64_t x = (m ^ k0) & mask;
    x = spn_forward(cp.p1, x);
    x = (x ^ k1) & mask;
    x = spn_forward(cp.p2, x);
    return (x ^ k2) & mask;
}

uint64_t decrypt(const CipherParams& cp, uint64_t k0, uint64_t k1, uint64_t k2,
                 uint64_t c) {
    uint64_t mask = block_mask(cp.block_bits);
    uint64_t x = (c ^ k2) & mask;
    x = spn_inverse(cp.p2, x);
    x = (x ^ k1) & mask;
    x = spn_inverse(cp.p1, x);
    return (x ^ k0) & mask;
}

} // namespace ipcloak
