#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace ipcloak {

// Entropy abstraction shared by key generation, padding draws and the traffic
// generator. Seeded runs must replay bit-for-bit across platforms, so draws
// go through mask-and-reject helpers instead of distribution objects.
class EntropySource {
public:
    virtual ~EntropySource() = default;

    // next 64 raw bits
    virtual uint64_t word() = 0;

    // low k bits of a fresh draw, 1 <= k <= 64
    uint64_t bits(unsigned k);

    // uniform value in [0, bound), bound >= 1
    uint64_t below(uint64_t bound);

    // Fisher-Yates shuffle
    void shuffle(std::span<uint8_t> v);
};

class SeededEntropy final : public EntropySource {
public:
    explicit SeededEntropy(uint64_t seed) : eng_(seed) {}
    uint64_t word() override { return eng_(); }

private:
    std::mt19937_64 eng_;
};

class SystemEntropy final : public EntropySource {
public:
    SystemEntropy();
    uint64_t word() override { return eng_(); }

private:
    std::mt19937_64 eng_;
};

} // namespace ipcloak
