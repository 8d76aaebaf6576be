#include "ipcloak/keyring.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <stdexcept>

namespace ipcloak {

namespace {

double now_seconds() {
    auto t = std::chrono::steady_clock::now().time_since_epoch();
    return std::chrono::duration<double>(t).count();
}

std::string hex_u64(uint64_t v, unsigned digits) {
    static const char* hex = "0123456789abcdef";
    std::string out(digits, '0');
    for (unsigned i = 0; i < digits; ++i)
        out[digits - 1 - i] = hex[(v >> (4 * i)) & 0xf];
    return out;
}

std::string otp_digest(const std::vector<uint16_t>& otp) {
    std::vector<uint8_t> buf;
    buf.reserve(otp.size() * 2);
    for (uint16_t v : otp) {
        buf.push_back(uint8_t(v >> 8));
        buf.push_back(uint8_t(v & 0xff));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int mdlen = 0;
    if (!EVP_Digest(buf.data(), buf.size(), md, &mdlen, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(mdlen * 2);
    for (unsigned i = 0; i < mdlen; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

} // namespace

KeySet generate_keyset(unsigned block_bits, unsigned version, EntropySource& ent) {
    if (version > 3)
        throw std::invalid_argument("key set version must fit in two bits");
    KeySet ks;
    ks.version = version;
    ks.block_bits = block_bits;
    ks.k0 = ent.bits(block_bits);
    ks.k1 = ent.bits(block_bits);
    ks.k2 = ent.bits(block_bits);
    ks.otp.resize(65536);
    for (size_t i = 0; i < ks.otp.size(); i += 4) {
        uint64_t w = ent.word();
        ks.otp[i] = uint16_t(w);
        ks.otp[i + 1] = uint16_t(w >> 16);
        ks.otp[i + 2] = uint16_t(w >> 32);
        ks.otp[i + 3] = uint16_t(w >> 48);
    }
    ks.created_at = now_seconds();
    return ks;
}

uint16_t otp_for(const KeySet& ks, uint16_t pad_prefix) {
    return ks.otp[pad_prefix];
}

RotationWindow::RotationWindow(unsigned block_bits, EntropySource& ent)
    : block_bits_(block_bits) {
    auto st = std::make_shared<State>();
    st->slots[0] = std::make_shared<const KeySet>(generate_keyset(block_bits, 0, ent));
    st->current = 0;
    std::atomic_store(&state_, std::shared_ptr<const State>(std::move(st)));
}

unsigned RotationWindow::rotate(EntropySource& ent) {
    auto old = std::atomic_load(&state_);
    auto st = std::make_shared<State>(*old);
    unsigned next = (old->current + 1) & 3;
    st->slots[next] =
        std::make_shared<const KeySet>(generate_keyset(block_bits_, next, ent));
    st->slots[(next + 1) & 3].reset();
    st->current = next;
    st->rotations = old->rotations + 1;
    std::atomic_store(&state_, std::shared_ptr<const State>(std::move(st)));
    return next;
}

std::shared_ptr<const KeySet> RotationWindow::current() const {
    auto st = std::atomic_load(&state_);
    return st->slots[st->current];
}

std::shared_ptr<const KeySet> RotationWindow::lookup(unsigned version) const {
    if (version > 3)
        return nullptr;
    auto st = std::atomic_load(&state_);
    return st->slots[version];
}

unsigned RotationWindow::current_version() const {
    return std::atomic_load(&state_)->current;
}

uint64_t RotationWindow::rotations() const {
    return std::atomic_load(&state_)->rotations;
}

std::vector<std::shared_ptr<const KeySet>> RotationWindow::retained() const {
    auto st = std::atomic_load(&state_);
    std::vector<std::shared_ptr<const KeySet>> out;
    for (unsigned back = 3; back != 0; --back) {
        unsigned v = (st->current + 4 - (back - 1)) & 3;
        if (st->slots[v])
            out.push_back(st->slots[v]);
    }
    return out;
}

std::string RotationWindow::export_text() const {
    std::string out;
    unsigned digits = block_bits_ / 4;
    for (const auto& ks : retained()) {
        out += "version=" + std::to_string(ks->version);
        out += " k0=" + hex_u64(ks->k0, digits);
        out += " k1=" + hex_u64(ks->k1, digits);
        out += " k2=" + hex_u64(ks->k2, digits);
        out += " otp_sha256=" + otp_digest(ks->otp);
        out += '\n';
    }
    return out;
}

} // namespace ipcloak
