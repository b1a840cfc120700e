// waveform.hpp - LTE SC-FDMA uplink baseband generator
//
// Chain per block: constellation mapping -> N-point DFT -> localized mapping
// onto subcarriers 0..N-1 of M -> M-point IDFT (scaled 1/M) -> cyclic prefix.
// The CP-extended symbol stream is then RRC pulse shaped at rho samples per
// symbol period T, giving f_s = rho * M * delta_f.
//
// DFT convention: forward unnormalized, inverse scaled by 1/M. With it the
// time samples at positions m = Q n reproduce the input symbols scaled by
// 1/Q, which is what the closed-form LFDMA expression requires.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "scfdma/fft.hpp"
#include "scfdma/rng.hpp"
#include "scfdma/types.hpp"

namespace scfdma {

struct SymbolBlock {
    std::vector<cd> symbols;
};

/// Unit-average-power constellation points.
inline std::vector<cd> constellation(Modulation m) {
    std::vector<cd> pts;
    auto square_qam = [&pts](int levels_per_rail) {
        double energy = 0.0;
        std::vector<double> levels;
        for (int i = 0; i < levels_per_rail; ++i) levels.push_back(2.0 * i - (levels_per_rail - 1));
        for (double l : levels) energy += l * l;
        energy = 2.0 * energy / levels_per_rail;
        const double scale = 1.0 / std::sqrt(energy);
        for (double re : levels)
            for (double im : levels) pts.emplace_back(re * scale, im * scale);
    };
    switch (m) {
    case Modulation::BPSK:
        pts = {{1.0, 0.0}, {-1.0, 0.0}};
        break;
    case Modulation::QPSK:
        square_qam(2);
        break;
    case Modulation::QAM16:
        square_qam(4);
        break;
    case Modulation::QAM64:
        square_qam(8);
        break;
    }
    return pts;
}

/// Draw `count` blocks of N constellation points scaled to power c_x.
inline std::vector<SymbolBlock> map_symbols(Rng& source, std::size_t count,
                                            const SignalConfig& config) {
    if (count < 1) throw ConfigError("map_symbols: count must be >= 1");
    const auto pts = constellation(config.modulation);
    const double scale = std::sqrt(config.c_x);
    std::vector<SymbolBlock> blocks(count);
    for (auto& b : blocks) {
        b.symbols.resize(static_cast<std::size_t>(config.N));
        for (auto& s : b.symbols) s = scale * pts[source.below(pts.size())];
    }
    return blocks;
}

inline std::vector<SymbolBlock> map_symbols(std::uint64_t seed, std::size_t count,
                                            const SignalConfig& config) {
    Rng rng(seed);
    return map_symbols(rng, count, config);
}

/// Time-domain LFDMA samples of one block via the DFT/IDFT pipeline.
inline std::vector<cd> lfdma_block_dft(const SymbolBlock& block, const SignalConfig& config) {
    if (block.symbols.size() != static_cast<std::size_t>(config.N))
        throw ConfigError("lfdma_block_dft: block length must equal N");
    if (config.M <= config.N) throw ConfigError("lfdma_block_dft: M must exceed N");
    const auto X = fft::forward(block.symbols);
    std::vector<cd> mapped(static_cast<std::size_t>(config.M), cd{0.0, 0.0});
    std::copy(X.begin(), X.end(), mapped.begin());
    auto x = fft::backward(mapped);
    const double inv_m = 1.0 / config.M;
    for (auto& v : x) v *= inv_m;
    return x;
}

/// Direct evaluation of the closed-form LFDMA time samples, m = Q n + q:
///   q = 0:  x_n / Q
///   q != 0: (1 - e^{j2pi q/Q}) / (QN) * sum_p x_p / (1 - e^{j2pi((n-p)/N + q/(QN))})
/// Defined for integer expansion factors only.
inline std::vector<cd> lfdma_block_closed_form(const SymbolBlock& block,
                                               const SignalConfig& config) {
    const int N = config.N;
    if (block.symbols.size() != static_cast<std::size_t>(N))
        throw ConfigError("lfdma_block_closed_form: block length must equal N");
    if (!config.integer_expansion() || config.M / N < 1)
        throw ConfigError("lfdma_block_closed_form: M must be an integer multiple Q >= 1 of N");
    const int Q = config.M / N;
    const auto& x = block.symbols;
    std::vector<cd> out(static_cast<std::size_t>(config.M));
    for (int n = 0; n < N; ++n) {
        out[static_cast<std::size_t>(Q * n)] = x[static_cast<std::size_t>(n)] / static_cast<double>(Q);
        for (int q = 1; q < Q; ++q) {
            const cd front = (1.0 - std::polar(1.0, 2.0 * kPi * q / Q)) / static_cast<double>(Q * N);
            cd acc{0.0, 0.0};
            for (int p = 0; p < N; ++p) {
                const double phase =
                    2.0 * kPi * (static_cast<double>(n - p) / N + static_cast<double>(q) / (Q * N));
                acc += x[static_cast<std::size_t>(p)] / (1.0 - std::polar(1.0, phase));
            }
            out[static_cast<std::size_t>(Q * n + q)] = front * acc;
        }
    }
    return out;
}

/// Prepend the last L samples of `body`.
inline std::vector<cd> add_cp(std::span<const cd> body, int L) {
    const auto M = static_cast<int>(body.size());
    if (L <= 0 || L >= M) throw ConfigError("add_cp: need 0 < L < M");
    std::vector<cd> out;
    out.reserve(body.size() + static_cast<std::size_t>(L));
    out.insert(out.end(), body.end() - L, body.end());
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

/// Root-raised-cosine taps spanning `span_symbols` periods at `rho` samples
/// per period (span*rho+1 taps, centred), normalized to unit energy.
inline std::vector<double> rrc_taps(double rolloff, int rho, int span_symbols) {
    if (rho < 1) throw ConfigError("rrc_taps: rho must be >= 1");
    if (span_symbols < 1) throw ConfigError("rrc_taps: span must be >= 1");
    if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw ConfigError("rrc_taps: rolloff must lie in [0,1]");
    const int half = span_symbols * rho / 2;
    std::vector<double> h(static_cast<std::size_t>(2 * half + 1));
    const double a = rolloff;
    for (int n = -half; n <= half; ++n) {
        const double t = static_cast<double>(n) / rho;
        double v;
        if (n == 0) {
            v = 1.0 - a + 4.0 * a / kPi;
        } else if (a > 0.0 && std::abs(std::abs(4.0 * a * t) - 1.0) < 1e-12) {
            v = a / std::sqrt(2.0) *
                ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * a)) +
                 (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * a)));
        } else {
            const double num = std::sin(kPi * t * (1.0 - a)) + 4.0 * a * t * std::cos(kPi * t * (1.0 + a));
            const double den = kPi * t * (1.0 - (4.0 * a * t) * (4.0 * a * t));
            v = num / den;
        }
        h[static_cast<std::size_t>(n + half)] = v;
    }
    double energy = 0.0;
    for (double v : h) energy += v * v;
    const double norm = 1.0 / std::sqrt(energy);
    for (double& v : h) v *= norm;
    return h;
}

inline std::vector<double> rrc_taps(const SignalConfig& config) {
    return rrc_taps(config.rolloff, config.rho, config.rrc_span);
}

/// Place `symbols` at T-spaced instants (every rho samples) and convolve with
/// the centred FIR `taps`. The (taps.size()-1)/2 sample group delay is
/// removed, so output[rho*m] is the peak instant of symbol m. Output length
/// is symbols.size() * rho.
inline ComplexStream pulse_shape(std::span<const cd> symbols, std::span<const double> taps,
                                 int rho, double sample_rate_hz) {
    if (symbols.empty()) throw ConfigError("pulse_shape: empty input");
    if (taps.empty()) throw ConfigError("pulse_shape: empty filter");
    if (rho < 1) throw ConfigError("pulse_shape: rho must be >= 1");
    const auto K = static_cast<long long>(taps.size());
    const long long D = (K - 1) / 2;
    const auto S = static_cast<long long>(symbols.size());
    const long long total = S * rho;
    ComplexStream out;
    out.sample_rate_hz = sample_rate_hz;
    out.samples.assign(static_cast<std::size_t>(total), cd{0.0, 0.0});
    for (long long k = 0; k < total; ++k) {
        // contributing symbols: 0 <= k + D - m*rho < K
        const long long hi_num = k + D;
        long long m_hi = hi_num / rho;
        long long lo_num = k + D - (K - 1);
        long long m_lo = lo_num <= 0 ? 0 : (lo_num + rho - 1) / rho;
        if (m_hi >= S) m_hi = S - 1;
        cd acc{0.0, 0.0};
        for (long long m = m_lo; m <= m_hi; ++m)
            acc += symbols[static_cast<std::size_t>(m)] * taps[static_cast<std::size_t>(k + D - m * rho)];
        out.samples[static_cast<std::size_t>(k)] = acc;
    }
    return out;
}

/// Pulse shape a sequence of CP-extended blocks with the config's RRC.
inline ComplexStream pulse_shape(const std::vector<std::vector<cd>>& blocks,
                                 const SignalConfig& config) {
    std::vector<cd> flat;
    for (const auto& b : blocks) flat.insert(flat.end(), b.begin(), b.end());
    if (flat.empty()) throw ConfigError("pulse_shape: empty input");
    const auto taps = rrc_taps(config);
    return pulse_shape(flat, taps, config.rho, config.sample_rate());
}

/// Pre-pulse-shaping symbol stream of a frame with its block layout.
struct FrameSymbols {
    std::vector<cd> symbols;                ///< concatenated CP-extended blocks
    std::vector<std::size_t> block_starts;  ///< index of each block's first CP symbol
    std::vector<int> cp_lengths;            ///< L of each block
};

inline FrameSymbols generate_symbol_stream(const SignalConfig& config, std::size_t num_blocks,
                                           std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    const auto data = map_symbols(rng, num_blocks, config);
    FrameSymbols f;
    f.symbols.reserve(num_blocks * static_cast<std::size_t>(config.M + config.cp_length(0)));
    for (std::size_t b = 0; b < num_blocks; ++b) {
        const int L = config.cp_length(b);
        const auto body = lfdma_block_dft(data[b], config);
        const auto with_cp = add_cp(body, L);
        f.block_starts.push_back(f.symbols.size());
        f.cp_lengths.push_back(L);
        f.symbols.insert(f.symbols.end(), with_cp.begin(), with_cp.end());
    }
    return f;
}

inline std::size_t samples_for_duration(const SignalConfig& config, double duration_s) {
    return static_cast<std::size_t>(std::llround(duration_s * config.sample_rate()));
}

/// End-to-end SC-FDMA stream of the given duration. Sample 0 is the peak
/// instant of the first CP symbol of block 0 (filter delay trimmed).
inline ComplexStream generate_frame(const SignalConfig& config, double duration_s,
                                    std::uint64_t seed) {
    config.validate();
    const double first_block = (config.M + config.cp_length(0)) * config.symbol_period();
    if (!(duration_s >= first_block * (1.0 - 1e-12)))
        throw ConfigError("generate_frame: duration shorter than one block period");
    const std::size_t U = samples_for_duration(config, duration_s);
    const auto rho = static_cast<std::size_t>(config.rho);
    std::size_t blocks = 0, symbols = 0;
    while (symbols * rho < U) {
        symbols += static_cast<std::size_t>(config.M + config.cp_length(blocks));
        ++blocks;
    }
    const auto frame = generate_symbol_stream(config, blocks, seed);
    const auto taps = rrc_taps(config);
    auto out = pulse_shape(frame.symbols, taps, config.rho, config.sample_rate());
    out.samples.resize(U);
    return out;
}

}  // namespace scfdma
