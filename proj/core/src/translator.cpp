#include "ipcloak/translator.hpp"

#include <fstream>
#include <stdexcept>

namespace ipcloak {

const char* drop_reason_name(DropReason r) {
    switch (r) {
    case DropReason::UnmappedDst:
        return "unmapped_dst";
    case DropReason::UnmappedSrc:
        return "unmapped_src";
    case DropReason::Expired:
        return "expired";
    case DropReason::ForeignPrefix:
        return "foreign_prefix";
    case DropReason::AddrValidation:
        return "addr_validation";
    case DropReason::Fragment:
        return "fragment";
    case DropReason::UnsupportedExtension:
        return "unsupported_extension";
    case DropReason::NonUdp:
        return "non_udp";
    case DropReason::Malformed:
        return "malformed";
    }
    return "unknown";
}

ServerMap load_server_map(const std::vector<std::pair<uint32_t, Ipv6Address>>& records) {
    ServerMap map;
    for (const auto& [v4, v6] : records) {
        if (map.ip4_to_6.contains(v4))
            throw std::invalid_argument("duplicate IPv4 in server map: " + ipv4_str(v4));
        if (map.ip6_to_4.contains(v6))
            throw std::invalid_argument("duplicate IPv6 in server map: " + v6.str());
        map.ip4_to_6.emplace(v4, v6);
        map.ip6_to_4.emplace(v6, v4);
    }
    return map;
}

ServerMap load_server_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open server map file: " + path);

    std::vector<std::pair<uint32_t, Ipv6Address>> records;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#')
            continue;
        size_t end = line.find_last_not_of(" \t\r");
        std::string_view body(line.data() + start, end - start + 1);

        size_t comma = body.find(',');
        if (comma == std::string_view::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected <ipv4>,<ipv6>");
        auto v4 = parse_ipv4(body.substr(0, comma));
        auto v6 = Ipv6Address::parse(body.substr(comma + 1));
        if (!v4 || !v6)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": bad address in record");
        records.emplace_back(*v4, *v6);
    }
    return load_server_map(records);
}

TranslateResult translate_4to6(const PacketView& pkt, const Ipv6Address& new_src6,
                               const Ipv6Address& new_dst6) {
    if (pkt.net != NetForm::V4)
        return DropReason::Malformed;
    if (pkt.is_fragment())
        return DropReason::Fragment;

    PacketView out;
    out.net = NetForm::V6;
    out.src6 = new_src6;
    out.dst6 = new_dst6;
    out.ttl = pkt.ttl;
    out.dscp_ecn = pkt.dscp_ecn;
    out.protocol = pkt.protocol;
    out.is_udp = pkt.is_udp;
    out.sport = pkt.sport;
    out.dport = pkt.dport;
    out.payload = pkt.payload;
    return out;
}

TranslateResult translate_6to4(const PacketView& pkt, uint32_t new_src4,
                               uint32_t new_dst4) {
    if (pkt.net != NetForm::V6)
        return DropReason::Malformed;
    if (pkt.has_ext_headers)
        return DropReason::UnsupportedExtension;

    PacketView out;
    out.net = NetForm::V4;
    out.src4 = new_src4;
    out.dst4 = new_dst4;
    out.ident = 0;
    out.dont_fragment = true;
    out.ttl = pkt.ttl;
    out.dscp_ecn = pkt.dscp_ecn;
    out.protocol = pkt.protocol;
    out.is_udp = pkt.is_udp;
    out.sport = pkt.sport;
    out.dport = pkt.dport;
    out.payload = pkt.payload;
    return out;
}

} // namespace ipcloak
