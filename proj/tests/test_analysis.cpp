#include <stdexcept>
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <numeric>

#include "ipcloak/analysis.hpp"

using namespace ipcloak;

namespace {

SpnPermutation identity_spn16() {
    std::array<uint8_t, 256> sbox{};
    for (unsigned i = 0; i < 256; ++i)
        sbox[i] = uint8_t(i);
    std::vector<uint8_t> pbox(16);
    std::iota(pbox.begin(), pbox.end(), uint8_t{0});
    return make_spn(16, sbox, std::move(pbox));
}

} // namespace

TEST_CASE("query bound exact values") {
    CHECK(security_bound(3) == 4);           // 2^2
    CHECK(security_bound(12) == 256);        // 2^8
    CHECK(security_bound(32) == 2642245);    // floor(2^(64/3))
    CHECK(security_bound(48) == 4294967296ull); // 2^32
    CHECK(security_bound(64) == 6981463658331);

    CHECK_THROWS_AS(security_bound(0), std::domain_error);
    CHECK_THROWS_AS(security_bound(65), std::domain_error);
}

TEST_CASE("query bound is the exact integer cube root of 2^(2n)") {
    for (unsigned n = 1; n < 64; ++n) {
        uint64_t r = security_bound(n);
        u128 p = u128{1} << (2 * n);
        CHECK(u128(r) * r * r <= p);
        u128 r1 = u128(r) + 1;
        CHECK(r1 * r1 * r1 > p);
    }
    // 2^128 cannot be bracketed inside 128-bit arithmetic; pin the top case
    // against the long-double cube root, which is within one of the truth
    long double approx = powl(2.0L, 128.0L / 3.0L);
    CHECK(fabsl(approx - (long double)security_bound(64)) < 1.0L);
}

TEST_CASE("trade-off exponents at pinned points") {
    CHECK(data_complexity_log2(32, 1) == 59);
    CHECK(data_complexity_log2(32, 32) == 28);
    CHECK(data_complexity_log2(64, 1) == 123);
    CHECK(data_complexity_log2(64, 64) == 60);
    CHECK(data_complexity_log2(16, 1) == 27);

    CHECK_THROWS_AS(data_complexity_log2(32, 0), std::domain_error);
    CHECK_THROWS_AS(data_complexity_log2(32, 33), std::domain_error);
}

TEST_CASE("each series walks the memory axis with slope minus one") {
    for (unsigned n : {16u, 32u, 48u, 56u, 64u}) {
        auto series = tradeoff_series(n);
        REQUIRE(series.size() == n);
        CHECK(series.front().mem_blocks_log2 == 1);
        CHECK(series.back().mem_blocks_log2 == n);
        for (size_t i = 0; i < series.size(); ++i) {
            const auto& p = series[i];
            CHECK(p.n == n);
            // memory and data exponents always sum to 2n - 4
            CHECK(int(p.mem_blocks_log2) + p.data_pairs_log2 == int(2 * n) - 4);
            if (i > 0)
                CHECK(p.data_pairs_log2 == series[i - 1].data_pairs_log2 - 1);
        }
    }
}

TEST_CASE("csv export carries one row per point under a fixed header") {
    std::string csv = tradeoff_csv({16, 32});
    CHECK(csv.rfind("n,mem_blocks_log2,data_pairs_log2\n", 0) == 0);
    CHECK(csv.find("\n16,1,27\n") != std::string::npos);
    CHECK(csv.find("\n32,32,28\n") != std::string::npos);
    size_t rows = size_t(std::count(csv.begin(), csv.end(), '\n'));
    CHECK(rows == 1 + 16 + 32);
}

TEST_CASE("rate-limited attacker memory in blocks and bits") {
    // an adversary capped at 2^40 observed pairs on the full-width block
    RateLimitedPoint p = rate_limited_memory(64, 40);
    CHECK(p.mem_blocks_log2 == 84);
    CHECK(p.mem_bits_log2 == doctest::Approx(90.0));

    RateLimitedPoint q = rate_limited_memory(32, 20);
    CHECK(q.mem_blocks_log2 == 40);
    CHECK(q.mem_bits_log2 == doctest::Approx(45.0));

    // inversion consistency with the forward map inside its domain
    CHECK(rate_limited_memory(32, data_complexity_log2(32, 7)).mem_blocks_log2 == 7);
}

TEST_CASE("diffusion battery on the identity cipher measures exactly one bit") {
    CipherParams cp;
    cp.block_bits = 16;
    cp.p1 = identity_spn16();
    cp.p2 = identity_spn16();
    AvalancheReport rep = avalanche_report(cp, 0, 0, 0, 3000, 1, 1);
    CHECK(rep.mean == doctest::Approx(1.0));
    CHECK(rep.stdev == doctest::Approx(0.0));
    for (double b : rep.per_bit_mean)
        if (b != 0)
            CHECK(b == doctest::Approx(1.0));
}

TEST_CASE("diffusion sums are invariant under sharding") {
    SeededEntropy ent(800);
    CipherParams cp = make_cipher_params(64, ent);
    uint64_t k0 = ent.word(), k1 = ent.word(), k2 = ent.word();

    AvalancheReport one = avalanche_report(cp, k0, k1, k2, 5000, 99, 1);
    AvalancheReport four = avalanche_report(cp, k0, k1, k2, 5000, 99, 4);
    CHECK(one.mean == four.mean);
    CHECK(one.stdev == four.stdev);
    CHECK(one.per_bit_mean == four.per_bit_mean);
    CHECK(four.shards == 4);
}

TEST_CASE("measured diffusion of the two-round construction") {
    // two rounds move a single flip into a handful of byte clusters, far
    // short of the n/2 a strong PRP would show; these bands pin the real
    // behaviour so a regression in either direction is caught
    SeededEntropy ent(801);
    CipherParams cp64 = make_cipher_params(64, ent);
    uint64_t k0 = ent.word(), k1 = ent.word(), k2 = ent.word();
    AvalancheReport r64 = avalanche_report(cp64, k0, k1, k2, 20000, 4242);
    CHECK(r64.mean > 12.4);
    CHECK(r64.mean < 13.1);
    CHECK(r64.stdev > 4.4);
    CHECK(r64.stdev < 5.2);
    for (unsigned b = 0; b < 64; ++b)
        CHECK(r64.per_bit_mean[b] > 0.0);

    CipherParams cp32 = make_cipher_params(32, ent);
    AvalancheReport r32 = avalanche_report(cp32, ent.word(), ent.word(),
                                           ent.word(), 20000, 4242);
    CHECK(r32.mean > 9.8);
    CHECK(r32.mean < 10.8);

    CHECK_THROWS_AS(avalanche_report(cp64, k0, k1, k2, 0, 1), std::invalid_argument);
}

TEST_CASE("address-reuse probe accounting") {
    SeededEntropy ent(802);
    PipelineConfig cfg;
    cfg.cipher = std::make_shared<const CipherParams>(make_cipher_params(64, ent));
    cfg.layout = make_layout(*Ipv6Prefix::parse("2001:db8::/48"), 32);
    cfg.internal_prefix = *Ipv4Prefix::parse("10.0.0.0/8");
    RotationWindow window(64, ent);
    ServerMap map = load_server_map(
        {{*parse_ipv4("8.8.8.8"), *Ipv6Address::parse("2001:db8:ff::53")}});

    uint32_t src = *parse_ipv4("10.0.0.1");
    uint32_t dst = *parse_ipv4("8.8.8.8");

    UnlinkabilityReport single =
        unlinkability_report(cfg, window, map, src, dst, 1, 5);
    CHECK(single.distinct == 1);
    CHECK(single.collisions == 0);
    CHECK(single.not_forwarded == 0);

    UnlinkabilityReport bulk =
        unlinkability_report(cfg, window, map, src, dst, 10000, 5);
    CHECK(bulk.not_forwarded == 0);
    CHECK(bulk.distinct + bulk.collisions == 10000);
    // 10^4 draws from a 2^32 pad space: collisions are possible but rare
    CHECK(bulk.collisions <= 2);

    // unmapped destination never forwards
    UnlinkabilityReport none = unlinkability_report(
        cfg, window, map, src, *parse_ipv4("1.2.3.4"), 50, 5);
    CHECK(none.not_forwarded == 50);
    CHECK(none.distinct == 0);
}

TEST_CASE("address-reuse probe at the narrow pad width sees birthday collisions") {
    SeededEntropy ent(803);
    PipelineConfig cfg;
    cfg.cipher = std::make_shared<const CipherParams>(make_cipher_params(56, ent));
    cfg.layout = make_layout(*Ipv6Prefix::parse("2001:db8::/48"), 24);
    cfg.internal_prefix = *Ipv4Prefix::parse("10.0.0.0/8");
    RotationWindow window(56, ent);
    ServerMap map = load_server_map(
        {{*parse_ipv4("8.8.8.8"), *Ipv6Address::parse("2001:db8:ff::53")}});

    UnlinkabilityReport rep = unlinkability_report(
        cfg, window, map, *parse_ipv4("10.0.0.1"), *parse_ipv4("8.8.8.8"),
        10000, 7);
    // E[collisions] just under 3 for 10^4 draws from 2^24
    CHECK(rep.collisions <= 12);
    CHECK(rep.distinct == 10000 - rep.collisions);
}

TEST_CASE("desk-scale oracle passes a healthy 16-bit instance") {
    SeededEntropy ent(804);
    CipherParams cp = make_cipher_params(16, ent);
    ExhaustiveReport rep = exhaustive_oracle(cp, 0x1111, 0x2222, 0x3333);
    CHECK(rep.pass);
    CHECK(rep.checked == 65536);
    CHECK_FALSE(rep.offending_input.has_value());
    CHECK(rep.failure.empty());

    CipherParams wide = make_cipher_params(24, ent);
    CHECK_THROWS_AS(exhaustive_oracle(wide, 0, 0, 0), std::invalid_argument);
}

TEST_CASE("desk-scale oracle localizes an inverse-table fault") {
    SeededEntropy ent(805);
    CipherParams cp = make_cipher_params(16, ent);
    // sabotage one inverse S-box entry of the first permutation
    cp.p1.inv_sbox[0x3c] ^= 0x01;

    ExhaustiveReport rep = exhaustive_oracle(cp, 0x1111, 0x2222, 0x3333);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.offending_input.has_value());
    CHECK(rep.failure == "decrypt(encrypt(x)) != x");
    uint64_t x = *rep.offending_input;
    CHECK(decrypt(cp, 0x1111, 0x2222, 0x3333,
                  encrypt(cp, 0x1111, 0x2222, 0x3333, x)) != x);
    CHECK(rep.checked == x + 1);
}

TEST_CASE("desk-scale oracle localizes a fused-table fault") {
    SeededEntropy ent(806);
    CipherParams cp = make_cipher_params(16, ent);
    // flip one bit in the low-byte lane of the second permutation
    cp.p2.fwd_tab[1][0x41] ^= 0x2;

    ExhaustiveReport rep = exhaustive_oracle(cp, 0, 0, 0);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.offending_input.has_value());
    CHECK((*rep.offending_input & 0xff) == 0x41);
    CHECK(rep.failure == "fused forward disagrees with naive evaluation");
}

TEST_CASE("battery reports serialize with a uniform shape") {
    SeededEntropy ent(807);
    CipherParams cp = make_cipher_params(16, ent);

    AvalancheReport av = avalanche_report(cp, 1, 2, 3, 100, 9, 1);
    auto ja = nlohmann::json::parse(avalanche_json(av));
    CHECK(ja["battery"] == "avalanche");
    CHECK(ja["params"]["n"] == 16);
    CHECK(ja["params"]["trials"] == 100);
    CHECK(ja["seed"] == 9);
    CHECK(ja["metrics"]["per_bit_mean"].size() == 16);

    ExhaustiveReport ex = exhaustive_oracle(cp, 1, 2, 3);
    auto je = nlohmann::json::parse(exhaustive_json(ex));
    CHECK(je["battery"] == "exhaustive_oracle");
    CHECK(je["metrics"]["pass"] == true);
    CHECK(je["metrics"]["checked"] == 65536);

    PipelineConfig cfg;
    cfg.cipher = std::make_shared<const CipherParams>(make_cipher_params(56, ent));
    cfg.layout = make_layout(*Ipv6Prefix::parse("2001:db8::/48"), 24);
    cfg.internal_prefix = *Ipv4Prefix::parse("10.0.0.0/8");
    RotationWindow window(56, ent);
    ServerMap map = load_server_map(
        {{*parse_ipv4("8.8.8.8"), *Ipv6Address::parse("2001:db8:ff::53")}});
    UnlinkabilityReport ul = unlinkability_report(
        cfg, window, map, *parse_ipv4("10.0.0.1"), *parse_ipv4("8.8.8.8"), 64, 3);
    auto ju = nlohmann::json::parse(unlinkability_json(ul));
    CHECK(ju["battery"] == "unlinkability");
    CHECK(ju["params"]["pad_bits"] == 24);
    CHECK(ju["metrics"]["distinct"].get<uint64_t>() +
          ju["metrics"]["collisions"].get<uint64_t>() == 64);
}
