#include "ipcloak/rng.hpp"

#include <utility>

namespace ipcloak {

uint64_t EntropySource::bits(unsigned k) {
    uint64_t w = word();
    if (k >= 64)
        return w;
    return w & ((uint64_t{1} << k) - 1);
}

uint64_t EntropySource::below(uint64_t bound) {
    if (bound <= 1)
        return 0;
    uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
        uint64_t v = word() & mask;
        if (v < bound)
            return v;
    }
}

void EntropySource::shuffle(std::span<uint8_t> v) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = below(i);
        std::swap(v[i - 1], v[j]);
    }
}

SystemEntropy::SystemEntropy() {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    eng_ = std::mt19937_64(seq);
}

} // namespace ipcloak
