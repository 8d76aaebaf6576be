#include "ipcloak/analysis.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace ipcloak {

uint64_t security_bound(unsigned n) {
    if (n < 1 || n > 64)
        throw std::domain_error("security bound supported for widths 1..64");
    unsigned e = 2 * n;
    if (e % 3 == 0)
        return uint64_t{1} << (e / 3);

    // 2^e is not a perfect cube here, so floor(cbrt(2^e)) = floor(cbrt(2^e - 1)),
    // and 2^e - 1 always fits in 128 bits.
    u128 target = e >= 128 ? ~u128{0} : (u128{1} << e) - 1;
    uint64_t lo = 1;
    uint64_t hi = uint64_t{1} << (e / 3 + 1);
    while (lo < hi) {
        uint64_t mid = lo + (hi - lo + 1) / 2;
        if (u128(mid) <= target / mid / mid)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

int data_complexity_log2(unsigned n, unsigned mem_blocks_log2) {
    if (mem_blocks_log2 < 1 || mem_blocks_log2 > n)
        throw std::domain_error("memory exponent must lie in [1, n]");
    return int(2 * (n - 1)) - 2 - int(mem_blocks_log2);
}

std::vector<ComplexityPoint> tradeoff_series(unsigned n) {
    std::vector<ComplexityPoint> out;
    out.reserve(n);
    for (unsigned mem = 1; mem <= n; ++mem)
        out.push_back({n, mem, data_complexity_log2(n, mem)});
    return out;
}

std::string tradeoff_csv(const std::vector<unsigned>& widths) {
    std::string out = "n,mem_blocks_log2,data_pairs_log2\n";
    for (unsigned n : widths)
        for (const auto& p : tradeoff_series(n))
            out += std::to_string(p.n) + "," + std::to_string(p.mem_blocks_log2) +
                   "," + std::to_string(p.data_pairs_log2) + "\n";
    return out;
}

RateLimitedPoint rate_limited_memory(unsigned n, int data_pairs_log2) {
    RateLimitedPoint p;
    p.n = n;
    p.data_pairs_log2 = data_pairs_log2;
    p.mem_blocks_log2 = int(2 * (n - 1)) - 2 - data_pairs_log2;
    p.mem_bits_log2 = double(p.mem_blocks_log2) + std::log2(double(n));
    return p;
}

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t trial) {
    uint64_t z = seed + (trial + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct AvalancheAccum {
    uint64_t sum = 0;
    uint64_t sum_sq = 0;
    std::vector<uint64_t> bit_sum;
    std::vector<uint64_t> bit_count;

    explicit AvalancheAccum(unsigned n) : bit_sum(n, 0), bit_count(n, 0) {}

    void merge(const AvalancheAccum& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
        for (size_t i = 0; i < bit_sum.size(); ++i) {
            bit_sum[i] += o.bit_sum[i];
            bit_count[i] += o.bit_count[i];
        }
    }
};

void avalanche_shard(const CipherParams& cp, uint64_t k0, uint64_t k1, uint64_t k2,
                     uint64_t seed, uint64_t begin, uint64_t end,
                     AvalancheAccum& acc) {
    unsigned n = cp.block_bits;
    uint64_t mask = block_mask(n);
    for (uint64_t t = begin; t < end; ++t) {
        SeededEntropy ent(mix_seed(seed, t));
        uint64_t m = ent.word() & mask;
        unsigned bit = unsigned(ent.below(n));
        uint64_t c0 = encrypt(cp, k0, k1, k2, m);
        uint64_t c1 = encrypt(cp, k0, k1, k2, m ^ (uint64_t{1} << bit));
        auto h = uint64_t(std::popcount(c0 ^ c1));
        acc.sum += h;
        acc.sum_sq += h * h;
        acc.bit_sum[bit] += h;
        acc.bit_count[bit] += 1;
    }
}

} // namespace

AvalancheReport avalanche_report(const CipherParams& cp, uint64_t k0, uint64_t k1,
                                 uint64_t k2, uint64_t trials, uint64_t seed,
                                 unsigned shards) {
    if (trials < 1)
        throw std::invalid_argument("avalanche battery needs at least one trial");
    if (shards == 0) {
        unsigned hw = std::thread::hardware_concurrency();
        shards = hw == 0 ? 1 : std::min(hw, 8u);
    }
    if (shards > trials)
        shards = unsigned(trials);

    unsigned n = cp.block_bits;
    std::vector<AvalancheAccum> parts(shards, AvalancheAccum(n));
    std::vector<std::thread> workers;
    uint64_t chunk = trials / shards;
    uint64_t rem = trials % shards;
    uint64_t begin = 0;
    for (unsigned s = 0; s < shards; ++s) {
        uint64_t end = begin + chunk + (s < rem ? 1 : 0);
        workers.emplace_back(avalanche_shard, std::cref(cp), k0, k1, k2, seed,
                             begin, end, std::ref(parts[s]));
        begin = end;
    }
    for (auto& w : workers)
        w.join();

    AvalancheAccum total(n);
    for (const auto& p : parts)
        total.merge(p);

    AvalancheReport rep;
    rep.n = n;
    rep.trials = trials;
    rep.seed = seed;
    rep.shards = shards;
    rep.mean = double(total.sum) / double(trials);
    double ex2 = double(total.sum_sq) / double(trials);
    rep.stdev = std::sqrt(std::max(0.0, ex2 - rep.mean * rep.mean));
    rep.per_bit_mean.resize(n, 0.0);
    for (unsigned b = 0; b < n; ++b)
        if (total.bit_count[b] > 0)
            rep.per_bit_mean[b] =
                double(total.bit_sum[b]) / double(total.bit_count[b]);
    return rep;
}

UnlinkabilityReport unlinkability_report(const PipelineConfig& cfg,
                                         RotationWindow& window,
                                         const ServerMap& map, uint32_t src4,
                                         uint32_t dst4, uint64_t count,
                                         uint64_t seed) {
    UnlinkabilityReport rep;
    rep.pad_bits = cfg.layout.pad_bits;
    rep.count = count;
    rep.seed = seed;

    PacketView probe;
    probe.net = NetForm::V4;
    probe.src4 = src4;
    probe.dst4 = dst4;
    probe.ttl = 64;
    probe.protocol = 17;
    probe.dont_fragment = true;
    probe.is_udp = true;
    probe.sport = 40000;
    probe.dport = 53;
    probe.payload = {0, 0, 0, 0};

    SeededEntropy ent(seed);
    std::unordered_set<Ipv6Address, Ipv6AddressHash> seen;
    seen.reserve(size_t(count) * 2);
    for (uint64_t i = 0; i < count; ++i) {
        PipelineAction act = process_outbound(probe, window, map, cfg, ent);
        if (act.kind != PipelineAction::Kind::ForwardV6) {
            rep.not_forwarded += 1;
            continue;
        }
        if (!seen.insert(act.packet.src6).second)
            rep.collisions += 1;
    }
    rep.distinct = seen.size();
    return rep;
}

ExhaustiveReport exhaustive_oracle(const CipherParams& cp, uint64_t k0,
                                   uint64_t k1, uint64_t k2) {
    if (cp.block_bits != 16)
        throw std::invalid_argument("exhaustive oracle runs on 16-bit blocks");

    ExhaustiveReport rep;
    std::vector<bool> image(65536, false);
    for (uint64_t x = 0; x < 65536; ++x) {
        rep.checked = x + 1;
        for (const SpnPermutation* p : {&cp.p1, &cp.p2}) {
            if (spn_forward(*p, x) != spn_forward_naive(*p, x)) {
                rep.offending_input = x;
                rep.failure = "fused forward disagrees with naive evaluation";
                return rep;
            }
            if (spn_inverse(*p, x) != spn_inverse_naive(*p, x)) {
                rep.offending_input = x;
                rep.failure = "fused inverse disagrees with naive evaluation";
                return rep;
            }
        }
        uint64_t c = encrypt(cp, k0, k1, k2, x);
        if (image[size_t(c)]) {
            rep.offending_input = x;
            rep.failure = "ciphertext collision, encryption not bijective";
            return rep;
        }
        image[size_t(c)] = true;
        if (decrypt(cp, k0, k1, k2, c) != x) {
            rep.offending_input = x;
            rep.failure = "decrypt(encrypt(x)) != x";
            return rep;
        }
    }
    rep.pass = true;
    return rep;
}

std::string avalanche_json(const AvalancheReport& r) {
    nlohmann::json j;
    j["battery"] = "avalanche";
    j["params"] = {{"n", r.n}, {"trials", r.trials}, {"shards", r.shards}};
    j["seed"] = r.seed;
    j["metrics"] = {{"mean", r.mean},
                    {"stdev", r.stdev},
                    {"per_bit_mean", r.per_bit_mean}};
    return j.dump();
}

std::string unlinkability_json(const UnlinkabilityReport& r) {
    nlohmann::json j;
    j["battery"] = "unlinkability";
    j["params"] = {{"pad_bits", r.pad_bits}, {"count", r.count}};
    j["seed"] = r.seed;
    j["metrics"] = {{"distinct", r.distinct},
                    {"collisions", r.collisions},
                    {"not_forwarded", r.not_forwarded}};
    return j.dump();
}

std::string exhaustive_json(const ExhaustiveReport& r) {
    nlohmann::json j;
    j["battery"] = "exhaustive_oracle";
    j["params"] = {{"n", 16}};
    j["seed"] = nullptr;
    j["metrics"] = {{"pass", r.pass}, {"checked", r.checked}};
    if (r.offending_input)
        j["metrics"]["offending_input"] = *r.offending_input;
    if (!r.failure.empty())
        j["metrics"]["failure"] = r.failure;
    return j.dump();
}

} // namespace ipcloak
