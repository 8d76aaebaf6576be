#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ipcloak/cipher.hpp"
#include "ipcloak/pipeline.hpp"

namespace ipcloak {

// Proven query bound of the two-round construction: floor(2^(2n/3)),
// computed with exact integer arithmetic (binary-search cube root over
// 128-bit intermediates). Supported for n in [1, 64].
uint64_t security_bound(unsigned n);

// Key-recovery trade-off on log2 exponents: data = 2(n-1) - 2 - mem.
// mem_blocks_log2 must lie in [1, n]; out of range throws std::domain_error.
int data_complexity_log2(unsigned n, unsigned mem_blocks_log2);

struct ComplexityPoint {
    unsigned n = 0;
    unsigned mem_blocks_log2 = 0;
    int data_pairs_log2 = 0;
};

// The full trade-off curve for one width, memory exponents 1..n.
std::vector<ComplexityPoint> tradeoff_series(unsigned n);

// CSV with header n,mem_blocks_log2,data_pairs_log2, one row per point.
std::string tradeoff_csv(const std::vector<unsigned>& widths);

// Inverts the trade-off for a given data exponent. Memory is tracked in
// n-bit blocks; the bit figure (blocks + log2(n)) is reported separately
// because the two units differ by a factor of n.
struct RateLimitedPoint {
    unsigned n = 0;
    int data_pairs_log2 = 0;
    int mem_blocks_log2 = 0;
    double mem_bits_log2 = 0;
};

RateLimitedPoint rate_limited_memory(unsigned n, int data_pairs_log2);

// Single-bit-flip diffusion battery. Trials are seeded individually from
// (seed, trial index), so any sharding of the trial range yields identical
// sums; shards only picks the worker count.
struct AvalancheReport {
    unsigned n = 0;
    uint64_t trials = 0;
    uint64_t seed = 0;
    unsigned shards = 1;
    double mean = 0;
    double stdev = 0;
    std::vector<double> per_bit_mean; // indexed by flipped plaintext bit
};

AvalancheReport avalanche_report(const CipherParams& cp, uint64_t k0, uint64_t k1,
                                 uint64_t k2, uint64_t trials, uint64_t seed,
                                 unsigned shards = 0);

// Pipeline-level linkability probe: pushes count identical-source packets
// through process_outbound and counts distinct encoded source addresses.
struct UnlinkabilityReport {
    unsigned pad_bits = 0;
    uint64_t count = 0;
    uint64_t distinct = 0;
    uint64_t collisions = 0;
    uint64_t not_forwarded = 0;
    uint64_t seed = 0;
};

UnlinkabilityReport unlinkability_report(const PipelineConfig& cfg,
                                         RotationWindow& window,
                                         const ServerMap& map, uint32_t src4,
                                         uint32_t dst4, uint64_t count,
                                         uint64_t seed);

// Desk-scale ground truth at 16-bit blocks: checks fused-vs-naive equality,
// bijectivity and two-sided inversion over all 65,536 inputs.
struct ExhaustiveReport {
    bool pass = false;
    uint64_t checked = 0;
    std::optional<uint64_t> offending_input;
    std::string failure;
};

ExhaustiveReport exhaustive_oracle(const CipherParams& cp, uint64_t k0,
                                   uint64_t k1, uint64_t k2);

// JSON report wrappers, shape {battery, params, seed, metrics}.
std::string avalanche_json(const AvalancheReport& r);
std::string unlinkability_json(const UnlinkabilityReport& r);
std::string exhaustive_json(const ExhaustiveReport& r);

} // namespace ipcloak
