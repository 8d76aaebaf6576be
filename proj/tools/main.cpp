#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "ipcloak/analysis.hpp"
#include "ipcloak/pipeline.hpp"
#include "ipcloak/runner.hpp"
#include "ipcloak/translator.hpp"

namespace {

int run_analyze(const std::string& battery, unsigned n, uint64_t trials,
                uint64_t count, uint64_t seed, const std::string& csv_path) {
    using namespace ipcloak;

    if (battery == "tradeoff") {
        std::string csv = tradeoff_csv({32, 40, 48, 56, 64});
        if (csv_path.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(csv_path, std::ios::trunc);
            if (!out) {
                std::cerr << "error: cannot write " << csv_path << "\n";
                return 1;
            }
            out << csv;
        }
        return 0;
    }

    if (battery == "avalanche") {
        SeededEntropy ent(seed);
        CipherParams cp = make_cipher_params(n, ent);
        uint64_t k0 = ent.bits(n), k1 = ent.bits(n), k2 = ent.bits(n);
        auto rep = avalanche_report(cp, k0, k1, k2, trials, seed);
        std::cout << avalanche_json(rep) << "\n";
        return 0;
    }

    if (battery == "oracle") {
        SeededEntropy ent(seed);
        CipherParams cp = make_cipher_params(16, ent);
        uint64_t k0 = ent.bits(16), k1 = ent.bits(16), k2 = ent.bits(16);
        auto rep = exhaustive_oracle(cp, k0, k1, k2);
        std::cout << exhaustive_json(rep) << "\n";
        return rep.pass ? 0 : 1;
    }

    if (battery == "unlinkability") {
        unsigned pad_bits = n - 32;
        SeededEntropy ent(seed);
        PipelineConfig cfg;
        cfg.cipher = std::make_shared<const CipherParams>(make_cipher_params(n, ent));
        auto prefix = Ipv6Prefix::parse("2001:db8::/48");
        cfg.layout = make_layout(*prefix, pad_bits);
        cfg.internal_prefix = *Ipv4Prefix::parse("10.0.0.0/8");
        RotationWindow window(n, ent);
        auto server6 = *Ipv6Address::parse("2001:db8:ff::53");
        ServerMap map = load_server_map({{0x08080808, server6}});
        auto rep = unlinkability_report(cfg, window, map, 0x0a000001, 0x08080808,
                                        count, seed);
        std::cout << unlinkability_json(rep) << "\n";
        return 0;
    }

    std::cerr << "error: unknown battery '" << battery
              << "' (expected avalanche, unlinkability, oracle or tradeoff)\n";
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"IPv4 address obfuscation gateway: encrypts client addresses "
                 "into IPv6 sources on the way out, restores them on the way back"};
    app.require_subcommand(0, 1);

    std::string config_path, prefix, map_path, in_path, out_path, gen_spec;
    unsigned mode = 0;
    double rotate_secs = -1;
    uint64_t rotate_every_n = 0;
    uint64_t seed = 0;
    auto* opt_config = app.add_option("--config", config_path, "key = value config file");
    auto* opt_mode = app.add_option("--mode", mode, "address mode, 56 or 64");
    auto* opt_prefix = app.add_option("--prefix", prefix, "IPv6 prefix, e.g. 2001:db8::/64");
    auto* opt_map = app.add_option("--map", map_path, "server map file (<ipv4>,<ipv6> lines)");
    auto* opt_in = app.add_option("--in", in_path, "input pcap file");
    auto* opt_out = app.add_option("--out", out_path, "output pcap file");
    auto* opt_gen = app.add_option("--gen", gen_spec, "synthetic input, <proto>:<count>");
    auto* opt_reflect = app.add_flag("--reflect", "echo translated packets back inbound");
    auto* opt_seed = app.add_option("--seed", seed, "deterministic randomness seed");
    auto* opt_rsecs = app.add_option("--rotate-secs", rotate_secs, "rotation period in seconds");
    auto* opt_rn = app.add_option("--rotate-every-n", rotate_every_n,
                                  "rotate after every n packets instead of by timer");
    auto* opt_pobf = app.add_flag("--port-obfuscation", "mask UDP source ports");
    auto* opt_rnow = app.add_flag("--rotate-now", "rotate once before processing");

    auto* analyze = app.add_subcommand("analyze", "statistical batteries and curves");
    std::string battery, csv_path;
    unsigned an_n = 64;
    uint64_t an_trials = 100000, an_count = 10000, an_seed = 1;
    analyze->add_option("--battery", battery,
                        "avalanche | unlinkability | oracle | tradeoff")
        ->required();
    analyze->add_option("--n", an_n, "cipher width in bits");
    analyze->add_option("--trials", an_trials, "avalanche trials");
    analyze->add_option("--count", an_count, "unlinkability packet count");
    analyze->add_option("--seed", an_seed, "battery seed");
    analyze->add_option("--csv", csv_path, "write the trade-off CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze)
            return run_analyze(battery, an_n, an_trials, an_count, an_seed, csv_path);

        ipcloak::RunConfig cfg;
        if (*opt_config)
            cfg = ipcloak::load_run_config(config_path);
        if (*opt_mode)
            cfg.mode = mode;
        if (*opt_prefix)
            cfg.prefix = prefix;
        if (*opt_map)
            cfg.map_path = map_path;
        if (*opt_in)
            cfg.in_path = in_path;
        if (*opt_out)
            cfg.out_path = out_path;
        if (*opt_gen)
            cfg.gen_spec = gen_spec;
        if (*opt_reflect)
            cfg.reflect = true;
        if (*opt_seed)
            cfg.seed = seed;
        if (*opt_rsecs)
            cfg.rotate_secs = rotate_secs;
        if (*opt_rn)
            cfg.rotate_every_n = rotate_every_n;
        if (*opt_pobf)
            cfg.port_obfuscation = true;
        if (*opt_rnow)
            cfg.rotate_now = true;

        ipcloak::RunStats stats = ipcloak::run(cfg);
        std::cout << ipcloak::stats_json(stats) << "\n";
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
