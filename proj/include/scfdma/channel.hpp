// channel.hpp - propagation and receiver impairment chain
//
// Stage order (fixed):
//   fading -> interference -> CFO / phase / timing -> receive filter -> AWGN -> quantizer
//
// SNR is referenced to the signal power measured at the receive-filter output
// for each record. Every stochastic stage draws from its own sub-seed,
// derive_seed(master, "<stage>", trial), so a chain replays bit-exactly.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scfdma/rng.hpp"
#include "scfdma/types.hpp"
#include "scfdma/waveform.hpp"

namespace scfdma {

// ---------------------------------------------------------------------------
// Multipath profiles

enum class ChannelKind { AwgnOnly, PedestrianA, VehicularA };

inline std::string_view to_string(ChannelKind k) {
    switch (k) {
    case ChannelKind::AwgnOnly: return "awgn";
    case ChannelKind::PedestrianA: return "pedestrian_a";
    case ChannelKind::VehicularA: return "vehicular_a";
    }
    return "?";
}

struct TapSpec {
    double delay_ns = 0.0;
    double power_db = 0.0;
};

struct ChannelProfile {
    ChannelKind kind = ChannelKind::AwgnOnly;
    std::vector<TapSpec> taps{{0.0, 0.0}};
    double doppler_hz = 0.0;

    static ChannelProfile awgn_only() { return {}; }

    /// ITU-R M.1225 Pedestrian A.
    static ChannelProfile pedestrian_a(double doppler_hz = 9.72) {
        return {ChannelKind::PedestrianA,
                {{0.0, 0.0}, {110.0, -9.7}, {190.0, -19.2}, {410.0, -22.8}},
                doppler_hz};
    }

    /// ITU-R M.1225 Vehicular A.
    static ChannelProfile vehicular_a(double doppler_hz = 194.44) {
        return {ChannelKind::VehicularA,
                {{0.0, 0.0}, {310.0, -1.0}, {710.0, -9.0}, {1090.0, -10.0}, {1730.0, -15.0}, {2510.0, -20.0}},
                doppler_hz};
    }

    static ChannelProfile from_name(std::string_view name) {
        if (name == "awgn") return awgn_only();
        if (name == "pedestrian_a" || name == "peda") return pedestrian_a();
        if (name == "vehicular_a" || name == "veha") return vehicular_a();
        throw ConfigError("unknown channel profile: " + std::string(name));
    }
};

struct SampleTap {
    std::size_t delay = 0;  ///< samples
    double power = 0.0;     ///< linear, taps sum to 1
};

/// Tap delays rounded to the nearest sample; coincident taps merge by power.
inline std::vector<SampleTap> sample_taps(const ChannelProfile& profile, double sample_rate_hz) {
    if (profile.taps.empty()) throw ConfigError("channel profile needs at least one tap");
    std::vector<SampleTap> out;
    double total = 0.0;
    for (const auto& t : profile.taps) {
        if (t.delay_ns < 0.0) throw ConfigError("tap delays must be non-negative");
        const auto d = static_cast<std::size_t>(std::llround(t.delay_ns * 1e-9 * sample_rate_hz));
        const double p = std::pow(10.0, t.power_db / 10.0);
        total += p;
        auto it = std::find_if(out.begin(), out.end(), [d](const SampleTap& s) { return s.delay == d; });
        if (it != out.end())
            it->power += p;
        else
            out.push_back({d, p});
    }
    for (auto& s : out) s.power /= total;
    std::sort(out.begin(), out.end(), [](const SampleTap& a, const SampleTap& b) { return a.delay < b.delay; });
    return out;
}

/// Rayleigh tap gain as a sum of sinusoids with random arrival angles and
/// phases: h(t) = sqrt(P/K) sum_i exp(j(2 pi f_d cos(alpha_i) t + phi_i)).
/// Its ensemble autocorrelation is P J0(2 pi f_d tau).
class SumOfSinusoids {
public:
    SumOfSinusoids(double doppler_hz, double power, int oscillators, Rng& rng)
        : amplitude_(std::sqrt(power / oscillators)) {
        if (oscillators < 1) throw ConfigError("need at least one oscillator");
        freq_.reserve(static_cast<std::size_t>(oscillators));
        phase_.reserve(static_cast<std::size_t>(oscillators));
        for (int i = 0; i < oscillators; ++i) {
            const double alpha = rng.uniform(0.0, 2.0 * kPi);
            freq_.push_back(2.0 * kPi * doppler_hz * std::cos(alpha));
            phase_.push_back(rng.uniform(0.0, 2.0 * kPi));
        }
    }

    cd at(double t_seconds) const {
        cd acc{0.0, 0.0};
        for (std::size_t i = 0; i < freq_.size(); ++i) acc += std::polar(1.0, freq_[i] * t_seconds + phase_[i]);
        return amplitude_ * acc;
    }

private:
    double amplitude_;
    std::vector<double> freq_;
    std::vector<double> phase_;
};

inline constexpr int kFadingOscillators = 32;

inline ComplexStream apply_fading(const ComplexStream& r, const ChannelProfile& profile,
                                  std::uint64_t seed) {
    require_nonempty(r, "apply_fading");
    if (profile.kind == ChannelKind::AwgnOnly) return r;
    const double fs = r.sample_rate_hz;
    const auto taps = sample_taps(profile, fs);
    const std::size_t U = r.size();
    if (taps.back().delay >= U) throw ConfigError("apply_fading: tap delay exceeds the record");

    // Gains evaluated on a knot grid fine enough that the Doppler phase moves
    // < 0.01 rad between knots, linearly interpolated in between.
    std::size_t step = 256;
    if (profile.doppler_hz > 0.0)
        step = std::clamp<std::size_t>(
            static_cast<std::size_t>(0.01 * fs / (2.0 * kPi * profile.doppler_hz)), 1, 256);

    Rng rng(seed);
    ComplexStream out{std::vector<cd>(U, cd{0.0, 0.0}), fs};
    for (const auto& tap : taps) {
        SumOfSinusoids gain(profile.doppler_hz, tap.power, kFadingOscillators, rng);
        cd g0 = gain.at(0.0);
        for (std::size_t k0 = 0; k0 < U; k0 += step) {
            const std::size_t k1 = std::min(k0 + step, U);
            const cd g1 = gain.at(static_cast<double>(k0 + step) / fs);
            for (std::size_t n = std::max(k0, tap.delay); n < k1; ++n) {
                const double w = static_cast<double>(n - k0) / static_cast<double>(step);
                out.samples[n] += (g0 + w * (g1 - g0)) * r.samples[n - tap.delay];
            }
            g0 = g1;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Frequency offset, phase and timing

inline constexpr int kFractionalDelayTaps = 33;

/// Delay by `delay_samples` (>= 0): integer shift plus a 33-tap
/// Blackman-windowed sinc for the fractional part. Zero-filled at the start.
inline std::vector<cd> fractional_delay(const std::vector<cd>& x, double delay_samples) {
    if (!(delay_samples >= 0.0)) throw ConfigError("fractional_delay: negative delay");
    const auto D = static_cast<long long>(std::floor(delay_samples));
    const double frac = delay_samples - static_cast<double>(D);
    const auto U = static_cast<long long>(x.size());
    std::vector<cd> y(x.size(), cd{0.0, 0.0});
    if (frac == 0.0) {
        for (long long n = D; n < U; ++n) y[static_cast<std::size_t>(n)] = x[static_cast<std::size_t>(n - D)];
        return y;
    }
    constexpr int half = kFractionalDelayTaps / 2;
    constexpr double width = half + 1.0;
    std::vector<double> h(kFractionalDelayTaps);
    double sum = 0.0;
    for (int k = -half; k <= half; ++k) {
        const double v = k - frac;
        const double sinc = std::abs(v) < 1e-15 ? 1.0 : std::sin(kPi * v) / (kPi * v);
        const double w = 0.42 + 0.5 * std::cos(kPi * v / width) + 0.08 * std::cos(2.0 * kPi * v / width);
        h[static_cast<std::size_t>(k + half)] = sinc * w;
        sum += sinc * w;
    }
    for (double& v : h) v /= sum;
    // y[n] = sum_k h[k + half] x[n - D - k]; the interior needs no bounds checks.
    auto tap_sum = [&](long long n, bool checked) {
        double re = 0.0, im = 0.0;
        for (int k = -half; k <= half; ++k) {
            const long long m = n - D - k;
            if (checked && (m < 0 || m >= U)) continue;
            const double w = h[static_cast<std::size_t>(k + half)];
            re += w * x[static_cast<std::size_t>(m)].real();
            im += w * x[static_cast<std::size_t>(m)].imag();
        }
        return cd{re, im};
    };
    const long long lo = std::min(U, D + half), hi = std::max(lo, U - half + D);
    for (long long n = 0; n < lo; ++n) y[static_cast<std::size_t>(n)] = tap_sum(n, true);
    for (long long n = lo; n < std::min(hi, U); ++n) y[static_cast<std::size_t>(n)] = tap_sum(n, false);
    for (long long n = std::max(lo, std::min(hi, U)); n < U; ++n) y[static_cast<std::size_t>(n)] = tap_sum(n, true);
    return y;
}

/// r(u) e^{j(2 pi cfo u / f_s + phase)}, then delayed by timing_frac symbol
/// periods (timing_frac * samples_per_symbol samples).
inline ComplexStream apply_impairments(const ComplexStream& r, double cfo_hz, double phase,
                                       double timing_frac, int samples_per_symbol) {
    require_nonempty(r, "apply_impairments");
    const double fs = r.sample_rate_hz;
    if (!(std::abs(cfo_hz) < fs / 2.0)) throw ConfigError("apply_impairments: CFO beyond Nyquist");
    if (!(timing_frac >= 0.0 && timing_frac < 1.0))
        throw ConfigError("apply_impairments: timing offset must lie in [0, 1)");
    ComplexStream out{r.samples, fs};
    if (cfo_hz != 0.0 || phase != 0.0) {
        const double step = cfo_hz / fs;
        for (std::size_t u = 0; u < out.size(); ++u) {
            double cycles = step * static_cast<double>(u);
            cycles -= std::floor(cycles);
            out.samples[u] *= std::polar(1.0, 2.0 * kPi * cycles + phase);
        }
    }
    if (timing_frac > 0.0) out.samples = fractional_delay(out.samples, timing_frac * samples_per_symbol);
    return out;
}

// ---------------------------------------------------------------------------
// Receive filter

struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

/// Digital Butterworth low-pass from the bilinear transform with frequency
/// prewarping, stored as cascaded second-order sections each with unit DC
/// gain (a first-order section for odd orders).
class ButterworthLowpass {
public:
    ButterworthLowpass(int order, double cutoff_hz, double sample_rate_hz) {
        if (order < 1) throw ConfigError("Butterworth order must be >= 1");
        if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0))
            throw ConfigError("Butterworth cutoff must lie in (0, f_s/2)");
        fs_ = sample_rate_hz;
        const double wc = 2.0 * fs_ * std::tan(kPi * cutoff_hz / fs_);
        auto to_z = [this](cd s) { return (1.0 + s / (2.0 * fs_)) / (1.0 - s / (2.0 * fs_)); };
        for (int k = 1; k <= order / 2; ++k) {
            const cd s = wc * std::polar(1.0, kPi * (2.0 * k + order - 1.0) / (2.0 * order));
            const cd z = to_z(s);
            Biquad q;
            q.a1 = -2.0 * z.real();
            q.a2 = std::norm(z);
            const double g = (1.0 + q.a1 + q.a2) / 4.0;
            q.b0 = g;
            q.b1 = 2.0 * g;
            q.b2 = g;
            sections_.push_back(q);
        }
        if (order % 2 == 1) {
            const double z = to_z(cd{-wc, 0.0}).real();
            Biquad q;
            q.a1 = -z;
            q.a2 = 0.0;
            const double g = (1.0 - z) / 2.0;
            q.b0 = g;
            q.b1 = g;
            q.b2 = 0.0;
            sections_.push_back(q);
        }
    }

    const std::vector<Biquad>& sections() const { return sections_; }

    cd response(double f_hz) const {
        const cd zi = std::polar(1.0, -2.0 * kPi * f_hz / fs_);
        cd h{1.0, 0.0};
        for (const auto& q : sections_)
            h *= (q.b0 + q.b1 * zi + q.b2 * zi * zi) / (1.0 + q.a1 * zi + q.a2 * zi * zi);
        return h;
    }

    /// Direct form II transposed, zero initial state.
    std::vector<cd> apply(std::vector<cd> x) const {
        for (const auto& q : sections_) {
            cd s1{0.0, 0.0}, s2{0.0, 0.0};
            for (auto& v : x) {
                const cd in = v;
                const cd out = q.b0 * in + s1;
                s1 = q.b1 * in - q.a1 * out + s2;
                s2 = q.b2 * in - q.a2 * out;
                v = out;
            }
        }
        return x;
    }

private:
    double fs_ = 1.0;
    std::vector<Biquad> sections_;
};

inline constexpr int kReceiveFilterOrder = 13;

/// Default receive cutoff: the symbol rate M delta_f, capped at 0.45 f_s.
inline double default_cutoff_hz(const SignalConfig& config) {
    return std::min(config.M * config.delta_f, 0.45 * config.sample_rate());
}

inline ComplexStream receive_filter(const ComplexStream& r, int order, double cutoff_hz) {
    require_nonempty(r, "receive_filter");
    ButterworthLowpass lp(order, cutoff_hz, r.sample_rate_hz);
    return {lp.apply(r.samples), r.sample_rate_hz};
}

// ---------------------------------------------------------------------------
// Additive disturbances and ADC

/// Adds circular complex Gaussian noise of power reference_power / 10^(snr/10).
inline ComplexStream add_awgn(const ComplexStream& r, double snr_db, double reference_power,
                              std::uint64_t seed) {
    require_nonempty(r, "add_awgn");
    const double power = reference_power / std::pow(10.0, snr_db / 10.0);
    Rng rng(seed);
    ComplexStream out = r;
    for (auto& v : out.samples) v += rng.complex_normal(power);
    return out;
}

/// Gaussian multiuser interference at power reference_power / 10^(sir/10);
/// an infinite SIR leaves the input untouched.
inline ComplexStream add_interference(const ComplexStream& r, double sir_db, double reference_power,
                                      std::uint64_t seed) {
    require_nonempty(r, "add_interference");
    if (std::isinf(sir_db) && sir_db > 0.0) return r;
    return add_awgn(r, sir_db, reference_power, seed);
}

/// Uniform mid-rise quantizer applied per rail. The clip level of each rail
/// is overloading_factor times that rail's rms; inputs beyond it saturate.
inline ComplexStream quantize(const ComplexStream& r, int bits, double overloading_factor) {
    require_nonempty(r, "quantize");
    if (bits < 2 || bits > 52) throw ConfigError("quantize: bits must lie in [2, 52]");
    if (!(overloading_factor > 0.0)) throw ConfigError("quantize: overloading factor must be positive");
    double pi = 0.0, pq = 0.0;
    for (const auto& v : r.samples) {
        pi += v.real() * v.real();
        pq += v.imag() * v.imag();
    }
    const double n = static_cast<double>(r.size());
    const double clip_i = overloading_factor * std::sqrt(pi / n);
    const double clip_q = overloading_factor * std::sqrt(pq / n);
    const double levels = std::ldexp(1.0, bits);
    const double top = levels / 2.0 - 1.0;
    auto rail = [&](double x, double clip) {
        if (clip <= 0.0) return 0.0;
        const double step = 2.0 * clip / levels;
        const double idx = std::clamp(std::floor(x / step), -levels / 2.0, top);
        return step * (idx + 0.5);
    };
    ComplexStream out{std::vector<cd>(r.size()), r.sample_rate_hz};
    for (std::size_t i = 0; i < r.size(); ++i)
        out.samples[i] = {rail(r.samples[i].real(), clip_i), rail(r.samples[i].imag(), clip_q)};
    return out;
}

// ---------------------------------------------------------------------------
// Full chain

struct Scenario {
    ChannelProfile profile = ChannelProfile::awgn_only();
    double snr_db = 0.0;
    std::optional<double> sir_db;        ///< absent: no interference
    double cfo_hz = 500e3;
    std::optional<double> phase_offset;  ///< absent: uniform on [-pi, pi) per trial
    std::optional<double> timing_offset; ///< fraction of T; absent: uniform on [0, 1)
    double observation_s = 12.8e-3;
    int quantizer_bits = 16;             ///< 0 disables the quantizer
    double overloading_factor = 4.0;
    double p_fa = 0.01;
    std::optional<double> cutoff_hz;     ///< absent: default_cutoff_hz(config)
    int filter_order = kReceiveFilterOrder;

    void validate() const {
        if (!(observation_s > 0.0)) throw ConfigError("observation_s must be positive");
        if (quantizer_bits != 0 && (quantizer_bits < 2 || quantizer_bits > 52))
            throw ConfigError("quantizer_bits must be 0 or lie in [2, 52]");
        if (!(p_fa > 0.0 && p_fa < 1.0)) throw ConfigError("p_fa must lie in (0, 1)");
        if (phase_offset && !(*phase_offset >= -kPi && *phase_offset < kPi))
            throw ConfigError("phase_offset must lie in [-pi, pi)");
        if (timing_offset && !(*timing_offset >= 0.0 && *timing_offset < 1.0))
            throw ConfigError("timing_offset must lie in [0, 1)");
    }
};

/// Nominal power of a generated stream: c_x (N/M)^2 / rho.
inline double nominal_signal_power(const SignalConfig& config) {
    const double ratio = static_cast<double>(config.N) / config.M;
    return config.c_x * ratio * ratio / config.rho;
}

/// Runs the impairment chain for one trial. With `signal` null the record
/// holds interference and noise only (H0), referenced to the nominal signal
/// power.
inline ComplexStream apply_channel_chain(const ComplexStream* signal, std::size_t length,
                                         const Scenario& scenario, const SignalConfig& config,
                                         std::uint64_t master_seed, std::uint64_t trial) {
    scenario.validate();
    const double fs = config.sample_rate();
    const double cutoff = scenario.cutoff_hz.value_or(default_cutoff_hz(config));
    const ButterworthLowpass lp(scenario.filter_order, cutoff, fs);

    Rng offsets(derive_seed(master_seed, "impairments", trial));
    const double phase = scenario.phase_offset ? *scenario.phase_offset : offsets.uniform(-kPi, kPi);
    const double timing = scenario.timing_offset ? *scenario.timing_offset : offsets.uniform();

    auto front_end = [&](const ComplexStream& x) {
        auto y = apply_impairments(x, scenario.cfo_hz, phase, timing, config.rho);
        y.samples = lp.apply(std::move(y.samples));
        return y;
    };

    ComplexStream rx{std::vector<cd>(length, cd{0.0, 0.0}), fs};
    double signal_power = nominal_signal_power(config);
    double pre_filter_power = signal_power;
    if (signal != nullptr) {
        if (signal->size() != length) throw ConfigError("apply_channel_chain: length mismatch");
        const auto faded = apply_fading(*signal, scenario.profile, derive_seed(master_seed, "fading", trial));
        pre_filter_power = mean_power(faded);
        rx = front_end(faded);
        signal_power = mean_power(rx);
    }
    if (scenario.sir_db) {
        const ComplexStream silent{std::vector<cd>(length, cd{0.0, 0.0}), fs};
        const auto interference = front_end(add_interference(
            silent, *scenario.sir_db, pre_filter_power, derive_seed(master_seed, "interference", trial)));
        for (std::size_t i = 0; i < length; ++i) rx.samples[i] += interference.samples[i];
    }
    if (!(signal_power > 0.0)) throw NumericalError("signal power after the receive filter is zero");
    rx = add_awgn(rx, scenario.snr_db, signal_power, derive_seed(master_seed, "noise", trial));
    if (scenario.quantizer_bits > 0) rx = quantize(rx, scenario.quantizer_bits, scenario.overloading_factor);
    return rx;
}

}  // namespace scfdma
