#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "ipcloak/pipeline.hpp"
#include "ipcloak/runner.hpp"
#include "ipcloak/traffic.hpp"

using namespace ipcloak;

namespace {

struct Bed {
    SeededEntropy ent;
    RotationWindow window;
    PipelineConfig cfg;
    ServerMap map;
    std::vector<PacketView> queries;

    explicit Bed(bool port_obf) : ent(11), window(56, ent) {
        cfg.cipher =
            std::make_shared<const CipherParams>(make_cipher_params(56, ent));
        cfg.layout = make_layout(*Ipv6Prefix::parse("2001:db8::/48"), 24);
        cfg.internal_prefix = *Ipv4Prefix::parse("10.0.0.0/8");
        cfg.port_obfuscation = port_obf;
        map = load_server_map(
            {{*parse_ipv4("8.8.8.8"), *Ipv6Address::parse("2001:db8:ff::53")}});
        queries = generate_traffic({TrafficProto::Dns, 1024}, cfg.internal_prefix,
                                   {*parse_ipv4("8.8.8.8")}, ent);
    }
};

void bm_outbound(benchmark::State& state) {
    Bed bed(state.range(0) != 0);
    size_t i = 0;
    for (auto _ : state) {
        PipelineAction act = process_outbound(bed.queries[i++ & 1023], bed.window,
                                              bed.map, bed.cfg, bed.ent);
        benchmark::DoNotOptimize(act.packet.src6.bytes[15]);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_outbound)->Arg(0)->Arg(1);

void bm_inbound(benchmark::State& state) {
    Bed bed(state.range(0) != 0);
    std::vector<PacketView> replies;
    replies.reserve(bed.queries.size());
    for (const auto& q : bed.queries) {
        PipelineAction act =
            process_outbound(q, bed.window, bed.map, bed.cfg, bed.ent);
        replies.push_back(make_reply(act.packet));
    }
    size_t i = 0;
    for (auto _ : state) {
        PipelineAction act =
            process_inbound(replies[i++ & 1023], bed.window, bed.map, bed.cfg);
        benchmark::DoNotOptimize(act.packet.dst4);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_inbound)->Arg(0)->Arg(1);

void bm_round_trip(benchmark::State& state) {
    Bed bed(true);
    size_t i = 0;
    for (auto _ : state) {
        PipelineAction out = process_outbound(bed.queries[i++ & 1023], bed.window,
                                              bed.map, bed.cfg, bed.ent);
        PipelineAction back =
            process_inbound(make_reply(out.packet), bed.window, bed.map, bed.cfg);
        benchmark::DoNotOptimize(back.packet.dst4);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_round_trip);

void bm_serialize_parse(benchmark::State& state) {
    Bed bed(true);
    PipelineAction out = process_outbound(bed.queries[0], bed.window, bed.map,
                                          bed.cfg, bed.ent);
    auto wire = serialize_frame(out.packet);
    for (auto _ : state) {
        auto parsed = parse_frame(wire);
        benchmark::DoNotOptimize(parsed);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_serialize_parse);

} // namespace

BENCHMARK_MAIN();
