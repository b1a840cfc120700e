// iq_io.hpp - raw IQ files: interleaved little-endian float32 (cf32)
//
// <file>       I0 Q0 I1 Q1 ... as IEEE-754 binary32, little endian
// <file>.meta  key=value lines; sample_rate_hz is required on read

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "scfdma/types.hpp"

namespace scfdma {

using IqMeta = std::map<std::string, std::string>;

namespace detail {

inline std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big)
        return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
    return v;
}

}  // namespace detail

inline void write_iq(const std::string& path, const ComplexStream& s, IqMeta meta = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write IQ file: " + path);
    std::vector<std::uint32_t> words;
    words.reserve(2 * s.size());
    for (const auto& v : s.samples) {
        words.push_back(detail::to_le(std::bit_cast<std::uint32_t>(static_cast<float>(v.real()))));
        words.push_back(detail::to_le(std::bit_cast<std::uint32_t>(static_cast<float>(v.imag()))));
    }
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
    if (!out) throw ConfigError("short write on IQ file: " + path);

    meta["format"] = "cf32_le";
    meta["sample_rate_hz"] = std::to_string(s.sample_rate_hz);
    meta["samples"] = std::to_string(s.size());
    std::ofstream m(path + ".meta");
    if (!m) throw ConfigError("cannot write IQ sidecar: " + path + ".meta");
    for (const auto& [k, v] : meta) m << k << '=' << v << '\n';
}

inline IqMeta read_iq_meta(const std::string& path) {
    std::ifstream in(path + ".meta");
    if (!in) throw ConfigError("missing IQ sidecar: " + path + ".meta");
    IqMeta meta;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return meta;
}

inline ComplexStream read_iq(const std::string& path) {
    const auto meta = read_iq_meta(path);
    const auto it = meta.find("sample_rate_hz");
    if (it == meta.end()) throw ConfigError("IQ sidecar lacks sample_rate_hz: " + path);
    const auto fmt = meta.find("format");
    if (fmt != meta.end() && fmt->second != "cf32_le") throw ConfigError("unsupported IQ format: " + fmt->second);

    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw ConfigError("cannot open IQ file: " + path);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % 8 != 0) throw ConfigError("IQ file size is not a whole number of cf32 samples");
    in.seekg(0);
    std::vector<std::uint32_t> words(bytes / 4);
    in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
    ComplexStream s;
    s.sample_rate_hz = std::stod(it->second);
    s.samples.resize(words.size() / 2);
    for (std::size_t i = 0; i < s.samples.size(); ++i)
        s.samples[i] = {std::bit_cast<float>(detail::to_le(words[2 * i])),
                        std::bit_cast<float>(detail::to_le(words[2 * i + 1]))};
    return s;
}

}  // namespace scfdma
