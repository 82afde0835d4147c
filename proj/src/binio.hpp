#pragma once

// Shared helpers for the NOLAB container files: 8 magic bytes, u32-LE
// length-prefixed JSON manifest, little-endian f64 payload, CRC32 trailer.

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vendor_json.hpp"

namespace nolab::binio {

inline void write_container(const std::string& path, const char magic[8],
                            const nlohmann::json& manifest,
                            const std::vector<double>& payload) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(magic, 8);
    const std::string m = manifest.dump();
    const std::uint32_t len = static_cast<std::uint32_t>(m.size());
    unsigned char lenb[4] = {static_cast<unsigned char>(len & 0xff),
                             static_cast<unsigned char>((len >> 8) & 0xff),
                             static_cast<unsigned char>((len >> 16) & 0xff),
                             static_cast<unsigned char>((len >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(lenb), 4);
    out.write(m.data(), static_cast<std::streamsize>(m.size()));
    // doubles are stored little-endian; this code assumes a little-endian host
    const char* raw = reinterpret_cast<const char*>(payload.data());
    const size_t bytes = payload.size() * sizeof(double);
    out.write(raw, static_cast<std::streamsize>(bytes));
    const std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(raw), static_cast<uInt>(bytes)));
    unsigned char crcb[4] = {static_cast<unsigned char>(crc & 0xff),
                             static_cast<unsigned char>((crc >> 8) & 0xff),
                             static_cast<unsigned char>((crc >> 16) & 0xff),
                             static_cast<unsigned char>((crc >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(crcb), 4);
    if (!out) throw std::runtime_error("write failed: " + path);
}

struct Container {
    nlohmann::json manifest;
    std::vector<double> payload;
};

inline Container read_container(const std::string& path, const char magic[8]) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    char got[8];
    if (!in.read(got, 8) || std::memcmp(got, magic, 8) != 0)
        throw std::runtime_error("bad magic bytes in " + path);
    unsigned char lenb[4];
    if (!in.read(reinterpret_cast<char*>(lenb), 4))
        throw std::runtime_error("truncated manifest length in " + path);
    const std::uint32_t len = lenb[0] | (lenb[1] << 8) | (lenb[2] << 16) |
                              (std::uint32_t(lenb[3]) << 24);
    std::string m(len, '\0');
    if (!in.read(m.data(), len)) throw std::runtime_error("truncated manifest in " + path);
    Container c;
    c.manifest = nlohmann::json::parse(m);

    // payload runs to EOF minus the 4-byte CRC trailer
    const std::streampos payload_start = in.tellg();
    in.seekg(0, std::ios::end);
    const std::streamoff total = in.tellg() - payload_start;
    if (total < 4 || (total - 4) % 8 != 0)
        throw std::runtime_error("truncated payload in " + path);
    const size_t bytes = static_cast<size_t>(total - 4);
    in.seekg(payload_start);
    c.payload.resize(bytes / 8);
    if (!in.read(reinterpret_cast<char*>(c.payload.data()),
                 static_cast<std::streamsize>(bytes)))
        throw std::runtime_error("truncated payload in " + path);
    unsigned char crcb[4];
    if (!in.read(reinterpret_cast<char*>(crcb), 4))
        throw std::runtime_error("missing CRC in " + path);
    const std::uint32_t stored = crcb[0] | (crcb[1] << 8) | (crcb[2] << 16) |
                                 (std::uint32_t(crcb[3]) << 24);
    const std::uint32_t computed = static_cast<std::uint32_t>(crc32(
        0L, reinterpret_cast<const Bytef*>(c.payload.data()), static_cast<uInt>(bytes)));
    if (stored != computed) throw std::runtime_error("CRC mismatch in " + path);
    return c;
}

}  // namespace nolab::binio
