#include "ipcloak/pcapio.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ipcloak {

namespace {

constexpr uint32_t kMagic = 0xa1b2c3d4;
constexpr uint32_t kMagicSwapped = 0xd4c3b2a1;
constexpr uint32_t kLinkEthernet = 1;

uint32_t load_u32(const uint8_t* p, bool swap) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    return swap ? __builtin_bswap32(v) : v;
}

void store_u32(std::vector<uint8_t>& out, uint32_t v) {
    uint8_t b[4];
    std::memcpy(b, &v, 4);
    out.insert(out.end(), b, b + 4);
}

void store_u16(std::vector<uint8_t>& out, uint16_t v) {
    uint8_t b[2];
    std::memcpy(b, &v, 2);
    out.insert(out.end(), b, b + 2);
}

} // namespace

std::vector<CapturedPacket> read_pcap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open capture file: " + path);
    std::vector<uint8_t> data{std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>()};

    if (data.size() < 24)
        throw std::runtime_error(path + ": truncated capture header");
    uint32_t magic = load_u32(data.data(), false);
    bool swap = false;
    if (magic == kMagicSwapped)
        swap = true;
    else if (magic != kMagic)
        throw std::runtime_error(path + ": unsupported capture magic");
    if (load_u32(data.data() + 20, swap) != kLinkEthernet)
        throw std::runtime_error(path + ": unsupported link type");

    std::vector<CapturedPacket> out;
    size_t off = 24;
    while (off < data.size()) {
        if (off + 16 > data.size())
            throw std::runtime_error(path + ": truncated record header");
        CapturedPacket pkt;
        pkt.ts_sec = load_u32(data.data() + off, swap);
        pkt.ts_usec = load_u32(data.data() + off + 4, swap);
        uint32_t incl = load_u32(data.data() + off + 8, swap);
        off += 16;
        if (off + incl > data.size())
            throw std::runtime_error(path + ": truncated record body");
        pkt.bytes.assign(data.begin() + ptrdiff_t(off),
                         data.begin() + ptrdiff_t(off + incl));
        off += incl;
        out.push_back(std::move(pkt));
    }
    return out;
}

void write_pcap(const std::string& path, const std::vector<CapturedPacket>& packets) {
    std::vector<uint8_t> out;
    store_u32(out, kMagic);
    store_u16(out, 2); // version 2.4
    store_u16(out, 4);
    store_u32(out, 0); // thiszone
    store_u32(out, 0); // sigfigs
    store_u32(out, 65535);
    store_u32(out, kLinkEthernet);

    for (const auto& pkt : packets) {
        store_u32(out, pkt.ts_sec);
        store_u32(out, pkt.ts_usec);
        store_u32(out, uint32_t(pkt.bytes.size()));
        store_u32(out, uint32_t(pkt.bytes.size()));
        out.insert(out.end(), pkt.bytes.begin(), pkt.bytes.end());
    }

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw std::runtime_error("cannot open output capture file: " + path);
    os.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
    if (!os)
        throw std::runtime_error("failed writing capture file: " + path);
}

} // namespace ipcloak
