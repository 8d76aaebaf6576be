#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ipcloak/packet.hpp"

namespace ipcloak {

// Runtime settings, loadable from a flat key=value file; command-line flags
// override file values. mode picks the cipher width (56 -> 24-bit padding,
// 64 -> 32-bit padding).
struct RunConfig {
    unsigned mode = 56;
    std::string prefix;
    std::string internal_prefix = "10.0.0.0/8";
    double rotate_secs = 5.0;
    uint64_t rotate_every_n = 0; // 0 = timer-driven rotation
    std::string map_path;
    std::string in_path;  // pcap input
    std::string gen_spec; // "<proto>:<count>" synthetic input
    std::string out_path; // pcap output, empty = discard
    bool reflect = false;
    bool port_obfuscation = false;
    bool strict_unmapped = false;
    bool drop_non_udp = false;
    bool rotate_now = false;
    std::optional<uint64_t> seed;
    unsigned workers = 1;
};

RunConfig load_run_config(const std::string& path);

// Applies one key=value setting; throws std::invalid_argument on unknown
// keys or unparseable values. Keys match the RunConfig field names with
// map/in/out/gen shortened like the flags.
void apply_config_kv(RunConfig& cfg, std::string_view key, std::string_view value);

struct RunStats {
    uint64_t offered = 0;
    uint64_t forwarded_v6 = 0;
    uint64_t forwarded_v4 = 0;
    uint64_t passed = 0;
    std::map<std::string, uint64_t> drops;
    uint64_t rotations = 0;
    uint64_t distinct_src6_sample = 0;
    uint64_t reserved_meta = 0;
    uint64_t reflected_ok = 0;
    uint64_t reflect_mismatch = 0;
    double elapsed_secs = 0;
    double pps = 0; // throughput figure, informational only

    uint64_t total_drops() const;
};

std::string stats_json(const RunStats& s);

// Simulated server echo: endpoints and ports swapped, payload untouched.
PacketView make_reply(const PacketView& v6pkt);

// Classifies every input packet (IPv4 -> outbound, IPv6 under our prefix ->
// inbound, anything else -> pass-through), drives rotation, writes the
// output capture, and returns the counters. Throws on invalid
// configuration or unreadable input. In reflect mode each generated packet
// goes outbound, is echoed, and comes back inbound; the stats then count
// restored packets instead of per-direction forwards.
RunStats run(const RunConfig& cfg);

} // namespace ipcloak
