#include "ipcloak/packet.hpp"

#include <cstring>

namespace ipcloak {

namespace {

constexpr uint8_t kDstMac[6] = {0x02, 0x1c, 0x10, 0x00, 0x00, 0x02};
constexpr uint8_t kSrcMac[6] = {0x02, 0x1c, 0x10, 0x00, 0x00, 0x01};
constexpr uint16_t kEtherV4 = 0x0800;
constexpr uint16_t kEtherV6 = 0x86dd;
constexpr uint8_t kProtoUdp = 17;

uint16_t rd16(const uint8_t* p) {
    return uint16_t(p[0]) << 8 | p[1];
}

void wr16(uint8_t* p, uint16_t v) {
    p[0] = uint8_t(v >> 8);
    p[1] = uint8_t(v & 0xff);
}

void wr32(uint8_t* p, uint32_t v) {
    p[0] = uint8_t(v >> 24);
    p[1] = uint8_t(v >> 16);
    p[2] = uint8_t(v >> 8);
    p[3] = uint8_t(v);
}

// RFC 1071 one's-complement sum; data is taken as big-endian 16-bit words
// with a zero pad byte on odd lengths.
struct ChecksumAccum {
    uint64_t sum = 0;

    void add(std::span<const uint8_t> data) {
        size_t i = 0;
        for (; i + 1 < data.size(); i += 2)
            sum += rd16(data.data() + i);
        if (i < data.size())
            sum += uint16_t(data[i]) << 8;
    }

    void add16(uint16_t v) { sum += v; }
    void add32(uint32_t v) {
        sum += v >> 16;
        sum += v & 0xffff;
    }

    uint16_t finish() const {
        uint64_t s = sum;
        while (s >> 16)
            s = (s & 0xffff) + (s >> 16);
        return uint16_t(~s & 0xffff);
    }
};

bool is_ext_header(uint8_t next) {
    switch (next) {
    case 0:   // hop-by-hop
    case 43:  // routing
    case 44:  // fragment
    case 51:  // AH
    case 60:  // destination options
    case 135: // mobility
        return true;
    default:
        return false;
    }
}

bool parse_udp(std::span<const uint8_t> seg, size_t declared_len, PacketView& pkt) {
    if (declared_len < 8 || seg.size() < declared_len)
        return false;
    if (rd16(seg.data() + 4) != declared_len)
        return false;
    pkt.is_udp = true;
    pkt.sport = rd16(seg.data());
    pkt.dport = rd16(seg.data() + 2);
    pkt.payload.assign(seg.begin() + 8, seg.begin() + ptrdiff_t(declared_len));
    return true;
}

} // namespace

std::optional<PacketView> parse_frame(std::span<const uint8_t> frame) {
    if (frame.size() < 14)
        return std::nullopt;
    uint16_t ether = rd16(frame.data() + 12);
    std::span<const uint8_t> ip = frame.subspan(14);

    PacketView pkt;
    if (ether == kEtherV4) {
        if (ip.size() < 20 || (ip[0] >> 4) != 4)
            return std::nullopt;
        size_t ihl = size_t(ip[0] & 0xf) * 4;
        if (ihl < 20 || ip.size() < ihl)
            return std::nullopt;
        size_t total = rd16(ip.data() + 2);
        if (total < ihl || total > ip.size())
            return std::nullopt;

        pkt.net = NetForm::V4;
        pkt.dscp_ecn = ip[1];
        pkt.ident = rd16(ip.data() + 4);
        uint16_t flags = rd16(ip.data() + 6);
        pkt.dont_fragment = (flags & 0x4000) != 0;
        pkt.more_fragments = (flags & 0x2000) != 0;
        pkt.frag_offset = flags & 0x1fff;
        pkt.ttl = ip[8];
        pkt.protocol = ip[9];
        pkt.src4 = uint32_t(ip[12]) << 24 | uint32_t(ip[13]) << 16 |
                   uint32_t(ip[14]) << 8 | ip[15];
        pkt.dst4 = uint32_t(ip[16]) << 24 | uint32_t(ip[17]) << 16 |
                   uint32_t(ip[18]) << 8 | ip[19];

        std::span<const uint8_t> seg = ip.subspan(ihl, total - ihl);
        if (pkt.protocol == kProtoUdp && !pkt.is_fragment()) {
            if (!parse_udp(seg, seg.size(), pkt))
                return std::nullopt;
        } else {
            pkt.payload.assign(seg.begin(), seg.end());
        }
        return pkt;
    }

    if (ether == kEtherV6) {
        if (ip.size() < 40 || (ip[0] >> 4) != 6)
            return std::nullopt;
        size_t plen = rd16(ip.data() + 4);
        if (40 + plen > ip.size())
            return std::nullopt;

        pkt.net = NetForm::V6;
        pkt.dscp_ecn = uint8_t((ip[0] & 0xf) << 4 | ip[1] >> 4);
        pkt.protocol = ip[6];
        pkt.ttl = ip[7];
        std::memcpy(pkt.src6.bytes.data(), ip.data() + 8, 16);
        std::memcpy(pkt.dst6.bytes.data(), ip.data() + 24, 16);

        std::span<const uint8_t> seg = ip.subspan(40, plen);
        if (is_ext_header(pkt.protocol)) {
            pkt.has_ext_headers = true;
            pkt.payload.assign(seg.begin(), seg.end());
        } else if (pkt.protocol == kProtoUdp) {
            if (!parse_udp(seg, seg.size(), pkt))
                return std::nullopt;
        } else {
            pkt.payload.assign(seg.begin(), seg.end());
        }
        return pkt;
    }

    return std::nullopt;
}

std::vector<uint8_t> serialize_frame(const PacketView& pkt) {
    size_t transport = pkt.is_udp ? 8 + pkt.payload.size() : pkt.payload.size();
    size_t ip_len = pkt.net == NetForm::V4 ? 20 + transport : 40 + transport;
    std::vector<uint8_t> out(14 + ip_len, 0);

    std::memcpy(out.data(), kDstMac, 6);
    std::memcpy(out.data() + 6, kSrcMac, 6);
    wr16(out.data() + 12, pkt.net == NetForm::V4 ? kEtherV4 : kEtherV6);
    uint8_t* ip = out.data() + 14;

    if (pkt.net == NetForm::V4) {
        ip[0] = 0x45;
        ip[1] = pkt.dscp_ecn;
        wr16(ip + 2, uint16_t(20 + transport));
        wr16(ip + 4, pkt.ident);
        uint16_t flags = uint16_t((pkt.dont_fragment ? 0x4000 : 0) |
                                  (pkt.more_fragments ? 0x2000 : 0) |
                                  (pkt.frag_offset & 0x1fff));
        wr16(ip + 6, flags);
        ip[8] = pkt.ttl;
        ip[9] = pkt.protocol;
        wr32(ip + 12, pkt.src4);
        wr32(ip + 16, pkt.dst4);
        ChecksumAccum hdr;
        hdr.add({ip, 20});
        wr16(ip + 10, hdr.finish());
    } else {
        ip[0] = uint8_t(0x60 | pkt.dscp_ecn >> 4);
        ip[1] = uint8_t((pkt.dscp_ecn & 0xf) << 4);
        wr16(ip + 4, uint16_t(transport));
        ip[6] = pkt.protocol;
        ip[7] = pkt.ttl;
        std::memcpy(ip + 8, pkt.src6.bytes.data(), 16);
        std::memcpy(ip + 24, pkt.dst6.bytes.data(), 16);
    }

    uint8_t* seg = ip + (pkt.net == NetForm::V4 ? 20 : 40);
    if (pkt.is_udp) {
        wr16(seg, pkt.sport);
        wr16(seg + 2, pkt.dport);
        wr16(seg + 4, uint16_t(transport));
        if (!pkt.payload.empty())
            std::memcpy(seg + 8, pkt.payload.data(), pkt.payload.size());

        ChecksumAccum ck;
        if (pkt.net == NetForm::V4) {
            ck.add32(pkt.src4);
            ck.add32(pkt.dst4);
            ck.add16(kProtoUdp);
            ck.add16(uint16_t(transport));
        } else {
            ck.add({pkt.src6.bytes.data(), 16});
            ck.add({pkt.dst6.bytes.data(), 16});
            ck.add32(uint32_t(transport));
            ck.add16(kProtoUdp);
        }
        ck.add({seg, transport});
        uint16_t sum = ck.finish();
        wr16(seg + 6, sum == 0 ? 0xffff : sum);
    } else if (!pkt.payload.empty()) {
        std::memcpy(seg, pkt.payload.data(), pkt.payload.size());
    }

    return out;
}

} // namespace ipcloak
