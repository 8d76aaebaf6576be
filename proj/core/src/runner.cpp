#include "ipcloak/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "ipcloak/pcapio.hpp"
#include "ipcloak/pipeline.hpp"
#include "ipcloak/traffic.hpp"

namespace ipcloak {

namespace {

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "off" || v == "no")
        return false;
    throw std::invalid_argument("bad boolean value: " + std::string(v));
}

uint64_t parse_u64(std::string_view v) {
    uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw std::invalid_argument("bad number: " + std::string(v));
    return out;
}

double parse_double(std::string_view v) {
    try {
        size_t pos = 0;
        double out = std::stod(std::string(v), &pos);
        if (pos != v.size())
            throw std::invalid_argument("");
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad number: " + std::string(v));
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

void apply_config_kv(RunConfig& cfg, std::string_view key, std::string_view value) {
    if (key == "mode")
        cfg.mode = unsigned(parse_u64(value));
    else if (key == "prefix")
        cfg.prefix = value;
    else if (key == "internal_prefix")
        cfg.internal_prefix = value;
    else if (key == "rotate_secs")
        cfg.rotate_secs = parse_double(value);
    else if (key == "rotate_every_n")
        cfg.rotate_every_n = parse_u64(value);
    else if (key == "map")
        cfg.map_path = value;
    else if (key == "in")
        cfg.in_path = value;
    else if (key == "out")
        cfg.out_path = value;
    else if (key == "gen")
        cfg.gen_spec = value;
    else if (key == "reflect")
        cfg.reflect = parse_bool(value);
    else if (key == "port_obfuscation")
        cfg.port_obfuscation = parse_bool(value);
    else if (key == "unmapped_policy") {
        if (value == "pass-through")
            cfg.strict_unmapped = false;
        else if (value == "drop")
            cfg.strict_unmapped = true;
        else
            throw std::invalid_argument("unmapped_policy must be pass-through or drop");
    } else if (key == "drop_non_udp")
        cfg.drop_non_udp = parse_bool(value);
    else if (key == "rotate_now")
        cfg.rotate_now = parse_bool(value);
    else if (key == "seed")
        cfg.seed = parse_u64(value);
    else if (key == "workers")
        cfg.workers = unsigned(parse_u64(value));
    else
        throw std::invalid_argument("unknown config key: " + std::string(key));
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);

    RunConfig cfg;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        size_t eq = body.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        try {
            apply_config_kv(cfg, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " +
                                     e.what());
        }
    }
    return cfg;
}

uint64_t RunStats::total_drops() const {
    uint64_t sum = 0;
    for (const auto& [_, v] : drops)
        sum += v;
    return sum;
}

std::string stats_json(const RunStats& s) {
    nlohmann::json j;
    j["offered"] = s.offered;
    j["forwarded_v6"] = s.forwarded_v6;
    j["forwarded_v4"] = s.forwarded_v4;
    j["passed"] = s.passed;
    j["drops"] = nlohmann::json::object();
    for (const auto& [k, v] : s.drops)
        j["drops"][k] = v;
    j["rotations"] = s.rotations;
    j["distinct_src6_sample"] = s.distinct_src6_sample;
    j["reserved_meta"] = s.reserved_meta;
    j["reflected_ok"] = s.reflected_ok;
    j["reflect_mismatch"] = s.reflect_mismatch;
    j["elapsed_secs"] = s.elapsed_secs;
    j["pps"] = s.pps;
    return j.dump();
}

PacketView make_reply(const PacketView& v6pkt) {
    PacketView reply = v6pkt;
    std::swap(reply.src6, reply.dst6);
    std::swap(reply.sport, reply.dport);
    reply.ttl = 64;
    return reply;
}

namespace {

struct Engine {
    std::shared_ptr<const CipherParams> cipher;
    PipelineConfig pcfg;
    std::unique_ptr<RotationWindow> window;
    ServerMap map;
    Ipv4Prefix internal_prefix{};
    std::unique_ptr<EntropySource> entropy;
};

std::unique_ptr<EntropySource> make_entropy(const RunConfig& cfg, uint64_t offset) {
    if (cfg.seed)
        return std::make_unique<SeededEntropy>(*cfg.seed + offset);
    return std::make_unique<SystemEntropy>();
}

Engine build_engine(const RunConfig& cfg) {
    if (cfg.mode != 56 && cfg.mode != 64)
        throw std::invalid_argument("mode must be 56 or 64");
    unsigned pad_bits = cfg.mode == 56 ? 24 : 32;

    if (cfg.prefix.empty())
        throw std::invalid_argument("an IPv6 prefix is required");
    auto p6 = Ipv6Prefix::parse(cfg.prefix);
    if (!p6)
        throw std::invalid_argument("bad IPv6 prefix: " + cfg.prefix);
    auto p4 = Ipv4Prefix::parse(cfg.internal_prefix);
    if (!p4)
        throw std::invalid_argument("bad internal prefix: " + cfg.internal_prefix);

    Engine eng;
    eng.entropy = make_entropy(cfg, 0);
    eng.cipher = std::make_shared<const CipherParams>(
        make_cipher_params(32 + pad_bits, *eng.entropy));
    eng.pcfg.cipher = eng.cipher;
    eng.pcfg.layout = make_layout(*p6, pad_bits);
    eng.pcfg.internal_prefix = *p4;
    eng.pcfg.port_obfuscation = cfg.port_obfuscation;
    eng.pcfg.strict_unmapped = cfg.strict_unmapped;
    eng.pcfg.drop_non_udp = cfg.drop_non_udp;
    validate_config(eng.pcfg);
    eng.internal_prefix = *p4;
    eng.window = std::make_unique<RotationWindow>(32 + pad_bits, *eng.entropy);

    if (!cfg.map_path.empty())
        eng.map = load_server_map_file(cfg.map_path);
    return eng;
}

std::vector<CapturedPacket> build_input(const RunConfig& cfg, Engine& eng) {
    if (!cfg.gen_spec.empty() && !cfg.in_path.empty())
        throw std::invalid_argument("choose either a capture input or a generator");

    std::vector<CapturedPacket> input;
    if (!cfg.gen_spec.empty()) {
        auto spec = parse_traffic_spec(cfg.gen_spec);
        if (!spec)
            throw std::invalid_argument("bad generator spec: " + cfg.gen_spec);
        std::vector<uint32_t> servers;
        servers.reserve(eng.map.size());
        for (const auto& [v4, _] : eng.map.ip4_to_6)
            servers.push_back(v4);
        std::sort(servers.begin(), servers.end());
        auto views = generate_traffic(*spec, eng.internal_prefix, servers,
                                      *eng.entropy);
        input.reserve(views.size());
        uint32_t i = 0;
        for (const auto& v : views) {
            CapturedPacket cap;
            cap.ts_sec = i / 1000;
            cap.ts_usec = (i % 1000) * 1000;
            cap.bytes = serialize_frame(v);
            input.push_back(std::move(cap));
            ++i;
        }
    } else if (!cfg.in_path.empty()) {
        input = read_pcap(cfg.in_path);
    }
    return input;
}

struct LoopState {
    RunStats stats;
    std::vector<CapturedPacket> output;
    std::unordered_set<Ipv6Address, Ipv6AddressHash> src6_seen;
};

void count_drop(RunStats& stats, DropReason reason) {
    stats.drops[drop_reason_name(reason)] += 1;
}

void emit(LoopState& st, const CapturedPacket& in, std::vector<uint8_t> bytes) {
    CapturedPacket cap;
    cap.ts_sec = in.ts_sec;
    cap.ts_usec = in.ts_usec;
    cap.bytes = std::move(bytes);
    st.output.push_back(std::move(cap));
}

void process_one(const RunConfig& cfg, Engine& eng, LoopState& st,
                 const CapturedPacket& cap) {
    auto pkt = parse_frame(cap.bytes);
    if (!pkt) {
        st.stats.drops["malformed"] += 1;
        return;
    }

    if (pkt->net == NetForm::V4) {
        PipelineAction act =
            process_outbound(*pkt, *eng.window, eng.map, eng.pcfg, *eng.entropy);
        switch (act.kind) {
        case PipelineAction::Kind::ForwardV6:
            if (st.src6_seen.size() < (1u << 20))
                st.src6_seen.insert(act.packet.src6);
            if (!cfg.reflect) {
                st.stats.forwarded_v6 += 1;
                emit(st, cap, serialize_frame(act.packet));
                return;
            }
            break;
        case PipelineAction::Kind::PassThrough:
            st.stats.passed += 1;
            emit(st, cap, {cap.bytes.begin(), cap.bytes.end()});
            return;
        case PipelineAction::Kind::Drop:
            count_drop(st.stats, act.reason);
            return;
        case PipelineAction::Kind::ForwardV4:
            st.stats.drops["malformed"] += 1;
            return;
        }

        // reflect mode: echo the translated packet and run it back inbound
        PacketView reply = make_reply(act.packet);
        PipelineAction back = process_inbound(reply, *eng.window, eng.map, eng.pcfg);
        if (back.kind == PipelineAction::Kind::Drop) {
            count_drop(st.stats, back.reason);
            return;
        }
        if (back.kind != PipelineAction::Kind::ForwardV4) {
            st.stats.reflect_mismatch += 1;
            return;
        }
        st.stats.reserved_meta += back.reserved_meta_seen ? 1 : 0;
        if (back.packet.dst4 == pkt->src4 && back.packet.dport == pkt->sport)
            st.stats.reflected_ok += 1;
        else
            st.stats.reflect_mismatch += 1;
        emit(st, cap, serialize_frame(back.packet));
        return;
    }

    PipelineAction act = process_inbound(*pkt, *eng.window, eng.map, eng.pcfg);
    switch (act.kind) {
    case PipelineAction::Kind::ForwardV4:
        st.stats.forwarded_v4 += 1;
        st.stats.reserved_meta += act.reserved_meta_seen ? 1 : 0;
        emit(st, cap, serialize_frame(act.packet));
        return;
    case PipelineAction::Kind::PassThrough:
        st.stats.passed += 1;
        emit(st, cap, {cap.bytes.begin(), cap.bytes.end()});
        return;
    case PipelineAction::Kind::Drop:
        count_drop(st.stats, act.reason);
        return;
    case PipelineAction::Kind::ForwardV6:
        st.stats.drops["malformed"] += 1;
        return;
    }
}

RunStats run_single(const RunConfig& cfg, Engine& eng,
                    const std::vector<CapturedPacket>& input) {
    LoopState st;
    auto t0 = std::chrono::steady_clock::now();
    auto last_rotate = t0;

    uint64_t i = 0;
    for (const auto& cap : input) {
        if (cfg.rotate_every_n > 0) {
            if (i > 0 && i % cfg.rotate_every_n == 0) {
                eng.window->rotate(*eng.entropy);
                st.stats.rotations += 1;
            }
        } else if (cfg.rotate_secs > 0) {
            auto now = std::chrono::steady_clock::now();
            if (std::chrono::duration<double>(now - last_rotate).count() >=
                cfg.rotate_secs) {
                eng.window->rotate(*eng.entropy);
                st.stats.rotations += 1;
                last_rotate = now;
            }
        }
        st.stats.offered += 1;
        process_one(cfg, eng, st, cap);
        ++i;
    }

    auto t1 = std::chrono::steady_clock::now();
    st.stats.elapsed_secs = std::chrono::duration<double>(t1 - t0).count();
    st.stats.pps = st.stats.elapsed_secs > 0
                       ? double(st.stats.offered) / st.stats.elapsed_secs
                       : 0;
    st.stats.distinct_src6_sample = st.src6_seen.size();

    if (!cfg.out_path.empty())
        write_pcap(cfg.out_path, st.output);
    return st.stats;
}

RunStats run_pool(const RunConfig& cfg, Engine& eng,
                  const std::vector<CapturedPacket>& input) {
    // Pool mode shards the input across workers sharing the window and map.
    // Mid-run rotation is disabled here; deterministic rotation points need
    // the single-threaded loop.
    unsigned workers = cfg.workers;
    std::vector<LoopState> states(workers);
    std::vector<std::unique_ptr<EntropySource>> ents;
    ents.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        ents.push_back(make_entropy(cfg, 1 + w));

    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::thread> pool;
    size_t chunk = (input.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            LoopState& st = states[w];
            EntropySource& ent = *ents[w];
            size_t begin = std::min(input.size(), size_t(w) * chunk);
            size_t end = std::min(input.size(), begin + chunk);
            for (size_t i = begin; i < end; ++i) {
                const CapturedPacket& cap = input[i];
                st.stats.offered += 1;
                auto pkt = parse_frame(cap.bytes);
                if (!pkt) {
                    st.stats.drops["malformed"] += 1;
                    continue;
                }
                PipelineAction act =
                    pkt->net == NetForm::V4
                        ? process_outbound(*pkt, *eng.window, eng.map, eng.pcfg, ent)
                        : process_inbound(*pkt, *eng.window, eng.map, eng.pcfg);
                switch (act.kind) {
                case PipelineAction::Kind::ForwardV6:
                    st.stats.forwarded_v6 += 1;
                    if (st.src6_seen.size() < (1u << 20))
                        st.src6_seen.insert(act.packet.src6);
                    emit(st, cap, serialize_frame(act.packet));
                    break;
                case PipelineAction::Kind::ForwardV4:
                    st.stats.forwarded_v4 += 1;
                    st.stats.reserved_meta += act.reserved_meta_seen ? 1 : 0;
                    emit(st, cap, serialize_frame(act.packet));
                    break;
                case PipelineAction::Kind::PassThrough:
                    st.stats.passed += 1;
                    emit(st, cap, {cap.bytes.begin(), cap.bytes.end()});
                    break;
                case PipelineAction::Kind::Drop:
                    count_drop(st.stats, act.reason);
                    break;
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();

    LoopState merged;
    for (auto& st : states) {
        merged.stats.offered += st.stats.offered;
        merged.stats.forwarded_v6 += st.stats.forwarded_v6;
        merged.stats.forwarded_v4 += st.stats.forwarded_v4;
        merged.stats.passed += st.stats.passed;
        merged.stats.reserved_meta += st.stats.reserved_meta;
        for (const auto& [k, v] : st.stats.drops)
            merged.stats.drops[k] += v;
        for (const auto& a : st.src6_seen)
            merged.src6_seen.insert(a);
        for (auto& cap : st.output)
            merged.output.push_back(std::move(cap));
    }
    auto t1 = std::chrono::steady_clock::now();
    merged.stats.elapsed_secs = std::chrono::duration<double>(t1 - t0).count();
    merged.stats.pps = merged.stats.elapsed_secs > 0
                           ? double(merged.stats.offered) / merged.stats.elapsed_secs
                           : 0;
    merged.stats.distinct_src6_sample = merged.src6_seen.size();

    if (!cfg.out_path.empty())
        write_pcap(cfg.out_path, merged.output);
    return merged.stats;
}

} // namespace

RunStats run(const RunConfig& cfg) {
    Engine eng = build_engine(cfg);
    std::vector<CapturedPacket> input = build_input(cfg, eng);

    if (cfg.rotate_now)
        eng.window->rotate(*eng.entropy);

    RunStats stats;
    if (cfg.workers > 1 && !cfg.reflect)
        stats = run_pool(cfg, eng, input);
    else
        stats = run_single(cfg, eng, input);
    if (cfg.rotate_now)
        stats.rotations += 1;
    return stats;
}

} // namespace ipcloak
