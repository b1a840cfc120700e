// config.hpp - flat key=value run description
//
//   # comment
//   N = 72
//   channel = pedestrian_a
//   snr_db = -10
//   sir_db = none
//
// Keys mirror the SignalConfig / Scenario field names. Unknown keys are an
// error so typos do not silently fall back to defaults.

#pragma once

#include <charconv>
#include <limits>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scfdma/caf_estimation.hpp"
#include "scfdma/channel.hpp"
#include "scfdma/detector.hpp"
#include "scfdma/types.hpp"

namespace scfdma {

struct RunConfig {
    SignalConfig signal;
    Scenario scenario;
    DetectorOptions detector;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> workers;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    return out;
}

template <class Int>
inline Int to_integer(const std::string& key, const std::string& v) {
    Int out{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

inline bool is_none(const std::string& v) { return v == "none" || v.empty(); }

}  // namespace detail

/// Parses "a,b,c" or "lo:step:hi" into numbers.
inline std::vector<double> parse_values(const std::string& text) {
    const std::string s = detail::trim(text);
    if (s.empty()) throw ConfigError("empty value list");
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(detail::to_double("range", detail::trim(item)));
        if (parts.size() != 3) throw ConfigError("range must be lo:step:hi");
        const double lo = parts[0], step = parts[1], hi = parts[2];
        if (!(step > 0.0) || hi < lo) throw ConfigError("range: need step > 0 and hi >= lo");
        const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
        for (long long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
        return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(detail::to_double("values", detail::trim(item)));
    return out;
}

/// Applies one key=value pair; throws ConfigError on unknown keys or bad values.
inline void apply_setting(RunConfig& rc, const std::string& key, const std::string& value) {
    using detail::to_double;
    using detail::to_integer;
    auto& g = rc.signal;
    auto& s = rc.scenario;
    if (key == "N") g.N = to_integer<int>(key, value);
    else if (key == "M") g.M = to_integer<int>(key, value);
    else if (key == "cp_mode") g.cp_mode = parse_cp_mode(value);
    else if (key == "rho") g.rho = to_integer<int>(key, value);
    else if (key == "rolloff") g.rolloff = to_double(key, value);
    else if (key == "delta_f") g.delta_f = to_double(key, value);
    else if (key == "modulation") g.modulation = parse_modulation(value);
    else if (key == "c_x") g.c_x = to_double(key, value);
    else if (key == "rrc_span") g.rrc_span = to_integer<int>(key, value);
    else if (key == "channel" || key == "profile") s.profile = ChannelProfile::from_name(value);
    else if (key == "doppler_hz") s.profile.doppler_hz = to_double(key, value);
    else if (key == "snr_db") s.snr_db = to_double(key, value);
    else if (key == "sir_db") s.sir_db = detail::is_none(value) ? std::nullopt : std::optional(to_double(key, value));
    else if (key == "cfo_hz") s.cfo_hz = to_double(key, value);
    else if (key == "phase_offset")
        s.phase_offset = detail::is_none(value) ? std::nullopt : std::optional(to_double(key, value));
    else if (key == "timing_offset")
        s.timing_offset = detail::is_none(value) ? std::nullopt : std::optional(to_double(key, value));
    else if (key == "observation_s") s.observation_s = to_double(key, value);
    else if (key == "quantizer_bits") s.quantizer_bits = to_integer<int>(key, value);
    else if (key == "overloading_factor") s.overloading_factor = to_double(key, value);
    else if (key == "p_fa") s.p_fa = to_double(key, value);
    else if (key == "cutoff_hz")
        s.cutoff_hz = detail::is_none(value) ? std::nullopt : std::optional(to_double(key, value));
    else if (key == "filter_order") s.filter_order = to_integer<int>(key, value);
    else if (key == "window") rc.detector.window = parse_window(value);
    else if (key == "kaiser_beta") rc.detector.window.kaiser_beta = to_double(key, value);
    else if (key == "u_sw")
        rc.detector.u_sw = detail::is_none(value) ? std::nullopt
                                                  : std::optional(to_integer<std::size_t>(key, value));
    else if (key == "seed") rc.seed = to_integer<std::uint64_t>(key, value);
    else if (key == "trials") rc.trials = to_integer<std::size_t>(key, value);
    else if (key == "workers") rc.workers = to_integer<std::size_t>(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
}

/// Parses key=value text. Line order matters only in that `doppler_hz` after
/// `channel` overrides the profile's default Doppler.
inline RunConfig parse_config(std::istream& in) {
    RunConfig rc;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        apply_setting(rc, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    rc.signal.validate();
    rc.scenario.validate();
    return rc;
}

inline RunConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

}  // namespace scfdma
