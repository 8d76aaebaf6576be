#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ipcloak {

struct CapturedPacket {
    uint32_t ts_sec = 0;
    uint32_t ts_usec = 0;
    std::vector<uint8_t> bytes;
};

// Classic pcap capture format, magic 0xa1b2c3d4, Ethernet link type. The
// reader accepts either byte order and throws std::runtime_error on bad
// magic, wrong link type or truncated records.
std::vector<CapturedPacket> read_pcap(const std::string& path);

void write_pcap(const std::string& path, const std::vector<CapturedPacket>& packets);

} // namespace ipcloak
