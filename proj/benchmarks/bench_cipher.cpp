#include <benchmark/benchmark.h>

#include "ipcloak/cipher.hpp"
#include "ipcloak/rng.hpp"

using namespace ipcloak;

namespace {

struct Fixture {
    CipherParams cp;
    uint64_t k0, k1, k2;

    explicit Fixture(unsigned bits) : cp([&] {
        SeededEntropy ent(97);
        return make_cipher_params(bits, ent);
    }()) {
        SeededEntropy ent(98);
        uint64_t mask = block_mask(bits);
        k0 = ent.word() & mask;
        k1 = ent.word() & mask;
        k2 = ent.word() & mask;
    }
};

void bm_encrypt(benchmark::State& state) {
    Fixture fx(unsigned(state.range(0)));
    uint64_t x = 0x9e3779b97f4a7c15 & block_mask(fx.cp.block_bits);
    for (auto _ : state) {
        x = encrypt(fx.cp, fx.k0, fx.k1, fx.k2, x);
        benchmark::DoNotOptimize(x);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_encrypt)->Arg(32)->Arg(56)->Arg(64);

void bm_decrypt(benchmark::State& state) {
    Fixture fx(unsigned(state.range(0)));
    uint64_t x = 0x9e3779b97f4a7c15 & block_mask(fx.cp.block_bits);
    for (auto _ : state) {
        x = decrypt(fx.cp, fx.k0, fx.k1, fx.k2, x);
        benchmark::DoNotOptimize(x);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_decrypt)->Arg(32)->Arg(56)->Arg(64);

// the same permutation evaluated without the fused tables, for the speedup
// headline
void bm_forward_naive(benchmark::State& state) {
    Fixture fx(unsigned(state.range(0)));
    uint64_t x = 0x0123456789abcdef & block_mask(fx.cp.block_bits);
    for (auto _ : state) {
        x = spn_forward_naive(fx.cp.p1, x);
        benchmark::DoNotOptimize(x);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_forward_naive)->Arg(32)->Arg(56)->Arg(64);

void bm_forward_fused(benchmark::State& state) {
    Fixture fx(unsigned(state.range(0)));
    uint64_t x = 0x0123456789abcdef & block_mask(fx.cp.block_bits);
    for (auto _ : state) {
        x = spn_forward(fx.cp.p1, x);
        benchmark::DoNotOptimize(x);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_forward_fused)->Arg(32)->Arg(56)->Arg(64);

void bm_make_cipher_params(benchmark::State& state) {
    for (auto _ : state) {
        SeededEntropy ent(7);
        CipherParams cp = make_cipher_params(unsigned(state.range(0)), ent);
        benchmark::DoNotOptimize(cp.p1.fwd_tab.data());
    }
}
BENCHMARK(bm_make_cipher_params)->Arg(32)->Arg(64);

} // namespace

BENCHMARK_MAIN();
