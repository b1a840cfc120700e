// types.hpp - shared value types for the SC-FDMA cyclostationarity toolkit
//
// ComplexStream is the currency passed between the waveform generator, the
// channel chain and the estimators. SignalConfig carries the LTE uplink
// numerology plus the pulse-shaping parameters.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scfdma {

using cd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Invalid configuration or argument. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a trustworthy result
/// (singular covariance, non-finite statistic). CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CpMode { Long, Short };

enum class Modulation { BPSK, QPSK, QAM16, QAM64 };

inline Modulation parse_modulation(std::string_view name) {
    if (name == "BPSK" || name == "bpsk") return Modulation::BPSK;
    if (name == "QPSK" || name == "qpsk") return Modulation::QPSK;
    if (name == "QAM16" || name == "qam16" || name == "16QAM") return Modulation::QAM16;
    if (name == "QAM64" || name == "qam64" || name == "64QAM") return Modulation::QAM64;
    throw ConfigError("unsupported modulation: " + std::string(name));
}

inline std::string_view to_string(Modulation m) {
    switch (m) {
    case Modulation::BPSK: return "BPSK";
    case Modulation::QPSK: return "QPSK";
    case Modulation::QAM16: return "QAM16";
    case Modulation::QAM64: return "QAM64";
    }
    return "?";
}

inline CpMode parse_cp_mode(std::string_view name) {
    if (name == "long" || name == "Long") return CpMode::Long;
    if (name == "short" || name == "Short") return CpMode::Short;
    throw ConfigError("unknown cp_mode: " + std::string(name));
}

inline std::string_view to_string(CpMode m) { return m == CpMode::Long ? "long" : "short"; }

/// SC-FDMA numerology. Defaults are the 1.4 MHz LTE uplink setup:
/// 72 occupied of 128 subcarriers, 15 kHz spacing, 4x oversampling,
/// RRC roll-off 0.35, unit-power 16-QAM.
struct SignalConfig {
    int N = 72;                 ///< DFT-spread block length
    int M = 128;                ///< subcarriers (IDFT size)
    CpMode cp_mode = CpMode::Long;
    int rho = 4;                ///< samples per symbol period T
    double rolloff = 0.35;
    double delta_f = 15e3;      ///< subcarrier spacing, Hz
    Modulation modulation = Modulation::QAM16;
    double c_x = 1.0;           ///< constellation second moment
    int rrc_span = 12;          ///< RRC length in symbol periods

    static constexpr int kSymbolsPerSlot = 7;

    /// Expansion factor M/N; only integer values admit the closed forms.
    double expansion() const { return static_cast<double>(M) / N; }
    bool integer_expansion() const { return N > 0 && M % N == 0; }

    /// CP length, in symbol periods T, of the given SC-FDMA symbol.
    /// Long CP: M/4. Short CP: 10/128 of M for the first symbol of each
    /// 7-symbol slot, 9/128 of M for the rest.
    int cp_length(std::size_t symbol_index = 0) const {
        if (cp_mode == CpMode::Long) return static_cast<int>(std::lround(M / 4.0));
        const bool first = symbol_index % kSymbolsPerSlot == 0;
        return static_cast<int>(std::lround((first ? 10.0 : 9.0) * M / 128.0));
    }

    /// Symbol period T = 1/(M delta_f), seconds.
    double symbol_period() const { return 1.0 / (M * delta_f); }
    double sample_rate() const { return rho * M * delta_f; }

    void validate() const {
        if (N < 1) throw ConfigError("N must be >= 1");
        if (M <= N) throw ConfigError("M must exceed N");
        if (rho < 1) throw ConfigError("rho must be >= 1");
        if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw ConfigError("rolloff must lie in [0,1]");
        if (!(delta_f > 0.0)) throw ConfigError("delta_f must be positive");
        if (!(c_x > 0.0)) throw ConfigError("c_x must be positive");
        if (rrc_span < 1) throw ConfigError("rrc_span must be >= 1");
        for (std::size_t s = 0; s < static_cast<std::size_t>(kSymbolsPerSlot); ++s) {
            const int L = cp_length(s);
            if (L <= 0 || L >= M) throw ConfigError("CP length must satisfy 0 < L < M");
        }
    }
};

/// Complex baseband samples with their sample rate.
struct ComplexStream {
    std::vector<cd> samples;
    double sample_rate_hz = 0.0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

inline double mean_power(const std::vector<cd>& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& v : x) acc += std::norm(v);
    return acc / static_cast<double>(x.size());
}

inline double mean_power(const ComplexStream& s) { return mean_power(s.samples); }

inline void require_nonempty(const ComplexStream& s, const char* what) {
    if (s.empty()) throw ConfigError(std::string(what) + ": empty stream");
}

}  // namespace scfdma
